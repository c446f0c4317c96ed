#include "ddcl/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "ddcl/error.hpp"
#include "ddcl/rng.hpp"

namespace ddcl {

std::size_t Dataset::dim() const {
  if (!train.empty()) return train.front().features.size();
  if (!test.empty()) return test.front().features.size();
  return 0;
}

MetaClassMap Dataset::meta_classes() const {
  MetaClassMap meta;
  for (const auto* split : {&train, &test}) {
    for (const auto& s : *split) {
      auto [it, inserted] = meta.emplace(s.class_id, s.meta_class_id);
      if (!inserted && it->second != s.meta_class_id) {
        throw InputError("class " + std::to_string(s.class_id) + " has more than one meta-class");
      }
    }
  }
  return meta;
}

std::map<ClassId, std::vector<std::size_t>> Dataset::train_indices_by_class() const {
  std::map<ClassId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < train.size(); ++i) by_class[train[i].class_id].push_back(i);
  return by_class;
}

Matrix gather_features(std::span<const LabeledSample> samples, std::span<const std::size_t> indices) {
  if (indices.empty()) return {};
  Matrix out(indices.size(), samples[indices.front()].features.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto& f = samples[indices[k]].features;
    if (f.size() != out.cols()) throw ShapeError("inconsistent feature width");
    std::copy(f.begin(), f.end(), out.row(k).begin());
  }
  return out;
}

Matrix gather_features(std::span<const LabeledSample> samples) {
  if (samples.empty()) return {};
  Matrix out(samples.size(), samples.front().features.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    if (samples[k].features.size() != out.cols()) throw ShapeError("inconsistent feature width");
    std::copy(samples[k].features.begin(), samples[k].features.end(), out.row(k).begin());
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (total_classes() < 2) throw InputError("synthetic benchmark needs at least two classes");
  if (dim == 0) throw InputError("dim must be positive");
  if (!(intra_meta_spread > 0.0)) throw InputError("intra_meta_spread must be positive");
  if (!(inter_meta_spread > intra_meta_spread)) throw InputError("inter_meta_spread must exceed intra_meta_spread");
  if (!(within_class_std > 0.0)) throw InputError("within_class_std must be positive");
  if (train_per_class == 0 || test_per_class == 0) throw InputError("need train and test samples per class");
}

Dataset generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Dataset ds;

  auto draw_meta_centre = [&] {
    Vector c(spec.dim);
    for (double& v : c) v = rng.uniform(0.0, spec.inter_meta_spread);
    return c;
  };
  // Uniform point in the ball of radius intra_meta_spread around `base`.
  auto offset_centre = [&](const Vector& base) {
    Vector dir(spec.dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : dir) {
        v = rng.normal();
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    const double radius = spec.intra_meta_spread * std::pow(rng.uniform(), 1.0 / static_cast<double>(spec.dim));
    Vector c = base;
    for (std::size_t k = 0; k < spec.dim; ++k) c[k] += radius * dir[k] / norm;
    return c;
  };

  ClassId next_class = 0;
  const std::size_t total_meta = spec.meta_classes + spec.background_classes;
  for (std::size_t meta = 0; meta < total_meta; ++meta) {
    const Vector meta_centre = draw_meta_centre();
    const std::size_t members = meta < spec.meta_classes ? spec.classes_per_meta : 1;
    for (std::size_t k = 0; k < members; ++k) ds.centres.emplace(next_class++, offset_centre(meta_centre));
  }

  MetaClassMap meta_of;
  for (const auto& [id, centre] : ds.centres) {
    const auto grouped = static_cast<ClassId>(spec.meta_classes * spec.classes_per_meta);
    meta_of[id] = id < grouped ? id / static_cast<ClassId>(spec.classes_per_meta)
                               : static_cast<ClassId>(spec.meta_classes) + (id - grouped);
  }

  auto draw_sample = [&](ClassId id) {
    LabeledSample s;
    s.class_id = id;
    s.meta_class_id = meta_of.at(id);
    s.features = ds.centres.at(id);
    for (double& v : s.features) v += spec.within_class_std * rng.normal();
    return s;
  };
  for (const auto& [id, centre] : ds.centres) {
    for (std::size_t k = 0; k < spec.train_per_class; ++k) ds.train.push_back(draw_sample(id));
    for (std::size_t k = 0; k < spec.test_per_class; ++k) ds.test.push_back(draw_sample(id));
  }
  return ds;
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line_no, const char* what) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ParseError(line_no, std::string("malformed ") + what + " '" + text + "'");
  }
  return value;
}

}  // namespace

std::vector<LabeledSample> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty file, header required");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 3 || header[header.size() - 2] != "label" || header.back() != "meta") {
    throw SchemaError(path.string() + ": header must be f0,...,f{d-1},label,meta");
  }
  const std::size_t dim = header.size() - 2;
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[k] != "f" + std::to_string(k)) {
      throw SchemaError(path.string() + ": header column " + std::to_string(k) + " must be f" + std::to_string(k));
    }
  }

  std::vector<LabeledSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != dim + 2) {
      throw SchemaError(path.string() + ": line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " + std::to_string(dim + 2));
    }
    LabeledSample s;
    s.features.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const double v = parse_number<double>(fields[k], line_no, "feature");
      if (!std::isfinite(v)) throw ParseError(line_no, "non-finite feature");
      s.features.push_back(v);
    }
    s.class_id = parse_number<ClassId>(fields[dim], line_no, "label");
    s.meta_class_id = parse_number<ClassId>(fields[dim + 1], line_no, "meta");
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_csv(const std::filesystem::path& path, std::span<const LabeledSample> samples) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const std::size_t dim = samples.empty() ? 0 : samples.front().features.size();
  for (std::size_t k = 0; k < dim; ++k) out << 'f' << k << ',';
  out << "label,meta\n";
  char buf[64];
  for (const auto& s : samples) {
    if (s.features.size() != dim) throw ShapeError("write_csv: inconsistent feature width");
    for (double v : s.features) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    out << s.class_id << ',' << s.meta_class_id << '\n';
  }
}

std::vector<ClassId> class_order(const MetaClassMap& meta, SchedulePolicy policy) {
  std::vector<ClassId> order;
  if (policy == SchedulePolicy::id_order) {
    for (const auto& [id, m] : meta) order.push_back(id);
    return order;
  }
  std::map<ClassId, std::vector<ClassId>> groups;
  for (const auto& [id, m] : meta) groups[m].push_back(id);
  std::size_t depth = 0;
  while (order.size() < meta.size()) {
    for (const auto& [m, members] : groups) {
      if (depth < members.size()) order.push_back(members[depth]);
    }
    ++depth;
  }
  return order;
}

std::vector<RoundSpec> schedule_rounds(const Dataset& dataset, std::size_t classes_per_round, SchedulePolicy policy) {
  if (classes_per_round == 0) throw InputError("classes_per_round must be positive");
  const auto order = class_order(dataset.meta_classes(), policy);
  const auto by_class = dataset.train_indices_by_class();
  std::vector<RoundSpec> rounds;
  for (std::size_t start = 0; start < order.size(); start += classes_per_round) {
    RoundSpec r;
    r.index = rounds.size() + 1;
    for (std::size_t k = start; k < std::min(order.size(), start + classes_per_round); ++k) {
      const ClassId id = order[k];
      r.new_classes.push_back(id);
      auto it = by_class.find(id);
      r.train_indices[id] = it == by_class.end() ? std::vector<std::size_t>{} : it->second;
    }
    rounds.push_back(std::move(r));
  }
  return rounds;
}

}  // namespace ddcl
