#include <algorithm>
#include <set>

#include "doctest.h"
#include "ddcl/error.hpp"
#include "ddcl/memory.hpp"
#include "ddcl/rng.hpp"
#include "oracles.hpp"

using namespace ddcl;

TEST_CASE("herding worked example") {
  const Matrix f{{0.0}, {1.0}, {2.0}};
  CHECK(herding_select(f, 3) == std::vector<std::size_t>{1, 0, 2});
  CHECK(herding_select(f, 1) == std::vector<std::size_t>{1});
  CHECK(herding_select(f, 10).size() == 3);
  CHECK_THROWS_AS(herding_select(f, 0), InputError);
  CHECK_THROWS_AS(herding_select(Matrix(), 1), InputError);
  CHECK(herding_select(Matrix{{3.0}}, 1) == std::vector<std::size_t>{0});
}

TEST_CASE("herding matches the brute-force oracle on integer features") {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.index(8);
    const std::size_t d = 1 + rng.index(3);
    Matrix f(n, d);
    for (double& v : f.values()) v = static_cast<double>(static_cast<int>(rng.index(7)) - 3);
    const std::size_t m = 1 + rng.index(n + 1);
    CHECK(herding_select(f, m) == oracle::herding(f, m));
  }
}

TEST_CASE("herding matches the brute-force oracle on real features") {
  Rng rng(102);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.index(8);
    const Matrix f = oracle::random_matrix(n, 1 + rng.index(4), rng);
    CHECK(herding_select(f, n) == oracle::herding(f, n));
  }
}

TEST_CASE("random_select is a seeded subset") {
  const auto a = random_select(20, 5, 3);
  CHECK(a == random_select(20, 5, 3));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 5);
  for (std::size_t i : a) CHECK(i < 20);
  CHECK(random_select(3, 5, 1).size() == 3);
}

TEST_CASE("rebalance to 20 classes under K=2000 gives 100 each") {
  ExemplarMemory mem(2000);
  Rng rng(7);
  for (ClassId c = 0; c < 10; ++c) {
    const Matrix f = oracle::random_matrix(300, 2, rng);
    std::vector<std::size_t> ids(300);
    for (std::size_t i = 0; i < 300; ++i) ids[i] = 1000 * static_cast<std::size_t>(c) + i;
    mem.admit_class(c, f, ids);
  }
  CHECK(mem.quota() == 200);
  const auto before = mem.exemplars(3);
  mem.rebalance(20);
  CHECK(mem.quota() == 100);
  CHECK(mem.exemplars(3).size() == 100);
  CHECK(std::equal(mem.exemplars(3).begin(), mem.exemplars(3).end(), before.begin()));
  CHECK(mem.total_stored() == 1000);
}

TEST_CASE("memory never exceeds its budget and stores sample ids") {
  ExemplarMemory mem(50);
  Rng rng(8);
  for (ClassId c = 0; c < 12; ++c) {
    const std::size_t n = 5 + rng.index(30);
    const Matrix f = oracle::random_matrix(n, 3, rng);
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = 100 * static_cast<std::size_t>(c) + i;
    mem.admit_class(c, f, ids, c % 2 == 0 ? ExemplarPolicy::herding : ExemplarPolicy::random, 5);
    CHECK(mem.total_stored() <= 50);
    for (std::size_t s : mem.exemplars(c)) CHECK(s / 100 == static_cast<std::size_t>(c));
  }
  CHECK(mem.class_count() == 12);
  CHECK(mem.quota() == 4);
}

TEST_CASE("memory errors") {
  ExemplarMemory mem(10);
  const Matrix f{{1.0}, {2.0}};
  const std::vector<std::size_t> ids{4, 9};
  mem.admit_class(1, f, ids);
  CHECK(mem.exemplars(1).size() == 2);
  CHECK_THROWS_AS(mem.admit_class(1, f, ids), StateError);
  const std::vector<std::size_t> short_ids{4};
  CHECK_THROWS_AS(mem.admit_class(2, f, short_ids), ShapeError);
  CHECK_THROWS_AS(mem.exemplars(5), StateError);
  CHECK_THROWS(mem.restore(1, {{0, std::vector<std::size_t>(11, 0)}}));
}

TEST_CASE("restore reproduces a memory") {
  ExemplarMemory mem(20);
  Rng rng(4);
  for (ClassId c = 0; c < 3; ++c) {
    const Matrix f = oracle::random_matrix(10, 2, rng);
    std::vector<std::size_t> ids(10);
    for (std::size_t i = 0; i < 10; ++i) ids[i] = i;
    mem.admit_class(c, f, ids);
  }
  ExemplarMemory copy(20);
  copy.restore(mem.sized_for(), mem.classes());
  CHECK(copy == mem);
}
