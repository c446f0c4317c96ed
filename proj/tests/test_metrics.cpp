#include "doctest.h"
#include "ddcl/error.hpp"
#include "ddcl/metrics.hpp"

using namespace ddcl;

TEST_CASE("errors split into confusion and forgetting") {
  const MetaClassMap meta{{0, 0}, {1, 0}, {2, 1}, {3, 1}};
  const std::vector<ClassId> truth{0, 0, 1, 2, 3, 3};
  const std::vector<ClassId> pred{0, 1, 2, 2, 2, 0};
  const ErrorSplit e = decompose_errors(truth, pred, meta);
  CHECK(e.confusion == 2);
  CHECK(e.forgetting == 2);
  CHECK(e.total() == 4);
  const std::vector<ClassId> unknown{7};
  const std::vector<ClassId> zero{0};
  CHECK_THROWS_AS(decompose_errors(unknown, zero, meta), InputError);
  CHECK_THROWS_AS(decompose_errors(truth, zero, meta), ShapeError);
}

TEST_CASE("confusion plus forgetting equals the error count") {
  const MetaClassMap meta{{0, 0}, {1, 0}, {2, 1}};
  const std::vector<ClassId> truth{0, 1, 2, 0, 1, 2, 2};
  const std::vector<ClassId> pred{1, 1, 0, 0, 2, 1, 2};
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += truth[i] != pred[i];
  CHECK(decompose_errors(truth, pred, meta).total() == wrong);
}

TEST_CASE("per-class and mean accuracy") {
  const std::vector<ClassId> truth{0, 0, 0, 0, 5, 5};
  const std::vector<ClassId> pred{0, 0, 0, 5, 0, 0};
  const auto acc = per_class_accuracy(truth, pred);
  CHECK(acc.at(0) == doctest::Approx(0.75));
  CHECK(acc.at(5) == 0.0);
  CHECK(mean_accuracy(acc) == doctest::Approx(0.375));
  const std::vector<double> empty;
  CHECK_THROWS_AS(mean_accuracy(empty), InputError);
}

TEST_CASE("accuracy over a class subset") {
  RoundReport r;
  r.per_class_accuracy = {{0, 1.0}, {1, 0.5}, {2, 0.0}};
  const std::vector<ClassId> first{0, 1};
  CHECK(r.accuracy_over(first) == doctest::Approx(0.75));
}
