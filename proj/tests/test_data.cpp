#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "ddcl/data.hpp"
#include "ddcl/error.hpp"

using namespace ddcl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ddcl_test_data";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("tiny noise keeps samples on their centres") {
  SyntheticSpec spec;
  spec.within_class_std = 1e-9;
  spec.train_per_class = 5;
  spec.test_per_class = 3;
  spec.seed = 1;
  const Dataset d = generate(spec);
  for (const auto* split : {&d.train, &d.test}) {
    for (const auto& s : *split) {
      const Vector& c = d.centres.at(s.class_id);
      for (std::size_t k = 0; k < c.size(); ++k) CHECK(std::abs(s.features[k] - c[k]) < 1e-6);
    }
  }
}

TEST_CASE("generation is deterministic and labelled as documented") {
  SyntheticSpec spec;
  spec.seed = 12;
  spec.train_per_class = 4;
  spec.test_per_class = 2;
  const Dataset a = generate(spec);
  const Dataset b = generate(spec);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train.size() == spec.total_classes() * 4);
  const MetaClassMap meta = a.meta_classes();
  CHECK(meta.size() == 20);
  CHECK(meta.at(0) == 0);
  CHECK(meta.at(4) == 0);
  CHECK(meta.at(5) == 1);
  CHECK(meta.at(10) == 2);
  CHECK(meta.at(19) == 11);
  spec.seed = 13;
  CHECK_FALSE(generate(spec).train == a.train);
}

TEST_CASE("nearest centre stays within the meta-class when groups are tight") {
  SyntheticSpec spec;
  spec.intra_meta_spread = 0.1;
  spec.inter_meta_spread = 100.0;
  spec.background_classes = 0;
  spec.meta_classes = 4;
  spec.train_per_class = 1;
  spec.test_per_class = 1;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const Dataset d = generate(spec);
    const MetaClassMap meta = d.meta_classes();
    for (const auto& [id, c] : d.centres) {
      ClassId best = -1;
      double best_d = INFINITY;
      for (const auto& [other, oc] : d.centres) {
        if (other == id) continue;
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) s += (c[k] - oc[k]) * (c[k] - oc[k]);
        if (s < best_d) {
          best_d = s;
          best = other;
        }
      }
      CHECK(meta.at(best) == meta.at(id));
    }
  }
}

TEST_CASE("class sample means converge to centres") {
  SyntheticSpec spec;
  spec.train_per_class = 400;
  spec.test_per_class = 1;
  spec.seed = 3;
  const Dataset d = generate(spec);
  const auto by_class = d.train_indices_by_class();
  for (const auto& [id, idx] : by_class) {
    const Vector mean = column_mean(gather_features(d.train, idx));
    for (std::size_t k = 0; k < mean.size(); ++k) {
      CHECK(std::abs(mean[k] - d.centres.at(id)[k]) < 3.0 * spec.within_class_std / std::sqrt(400.0));
    }
  }
}

TEST_CASE("invalid synthetic specs are rejected") {
  SyntheticSpec spec;
  spec.intra_meta_spread = 20.0;
  CHECK_THROWS_AS(generate(spec), InputError);
  spec = SyntheticSpec{};
  spec.within_class_std = 0.0;
  CHECK_THROWS_AS(generate(spec), InputError);
}

TEST_CASE("csv loading") {
  const fs::path p = scratch("two.csv");
  write_file(p, "f0,f1,label,meta\n1.5,-2,3,1\n0.25,4e-3,0,0\n");
  const auto rows = load_csv(p);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].features == Vector{1.5, -2.0});
  CHECK(rows[0].class_id == 3);
  CHECK(rows[0].meta_class_id == 1);
  CHECK(rows[1].features == Vector{0.25, 0.004});

  write_file(p, "");
  CHECK_THROWS_AS(load_csv(p), SchemaError);
  write_file(p, "f0,f1,label\n1,2,3\n");
  CHECK_THROWS_AS(load_csv(p), SchemaError);
  write_file(p, "f0,f1,label,meta\n1,2,3,1\n1,2,3\n");
  CHECK_THROWS_AS(load_csv(p), SchemaError);
  write_file(p, "f0,f1,label,meta\n1,2,3,1\n1,x,3,1\n");
  try {
    load_csv(p);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("csv round trip is exact") {
  SyntheticSpec spec;
  spec.train_per_class = 3;
  spec.test_per_class = 1;
  spec.seed = 8;
  const Dataset d = generate(spec);
  const fs::path p = scratch("round.csv");
  write_csv(p, d.train);
  CHECK(load_csv(p) == d.train);
}

TEST_CASE("round schedules") {
  const MetaClassMap meta{{0, 0}, {1, 0}, {2, 1}, {3, 1}};
  CHECK(class_order(meta, SchedulePolicy::id_order) == std::vector<ClassId>{0, 1, 2, 3});
  CHECK(class_order(meta, SchedulePolicy::split_similar) == std::vector<ClassId>{0, 2, 1, 3});

  Dataset d;
  for (ClassId c = 0; c < 4; ++c) d.train.push_back({{0.0}, c, c / 2});
  const auto id = schedule_rounds(d, 2, SchedulePolicy::id_order);
  REQUIRE(id.size() == 2);
  CHECK(id[0].new_classes == std::vector<ClassId>{0, 1});
  CHECK(id[1].new_classes == std::vector<ClassId>{2, 3});
  CHECK(id[1].index == 2);
  const auto split = schedule_rounds(d, 2, SchedulePolicy::split_similar);
  CHECK(split[0].new_classes == std::vector<ClassId>{0, 2});
  CHECK(split[1].new_classes == std::vector<ClassId>{1, 3});
  CHECK(split[1].train_indices.at(3) == std::vector<std::size_t>{3});
}

TEST_CASE("schedules cover every class exactly once") {
  SyntheticSpec spec;
  spec.train_per_class = 2;
  spec.test_per_class = 1;
  const Dataset d = generate(spec);
  for (auto policy : {SchedulePolicy::id_order, SchedulePolicy::split_similar}) {
    for (std::size_t k : {1u, 3u, 4u, 7u}) {
      std::multiset<ClassId> seen;
      for (const auto& r : schedule_rounds(d, k, policy)) seen.insert(r.new_classes.begin(), r.new_classes.end());
      CHECK(seen.size() == 20);
      CHECK(std::set<ClassId>(seen.begin(), seen.end()).size() == 20);
    }
  }
}

TEST_CASE("split_similar interleaves meta-classes") {
  SyntheticSpec spec;
  spec.train_per_class = 2;
  spec.test_per_class = 1;
  const Dataset d = generate(spec);
  const auto rounds = schedule_rounds(d, 4, SchedulePolicy::split_similar);
  REQUIRE(rounds.size() == 5);
  CHECK(rounds[0].new_classes == std::vector<ClassId>{0, 5, 10, 11});
  CHECK(rounds[3].new_classes == std::vector<ClassId>{1, 6, 2, 7});
  CHECK(rounds[4].new_classes == std::vector<ClassId>{3, 8, 4, 9});
}
