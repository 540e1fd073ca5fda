#include "bioid/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bioid/csv.hpp"
#include "bioid/errors.hpp"
#include "bioid/rng.hpp"

namespace bioid {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

int parse_int(const std::string& field, std::size_t line_no,
              const char* what) {
  const std::string t = trim(field);
  if (t.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": empty " +
                    std::string(what));
  }
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size()) {
    throw DataError("line " + std::to_string(line_no) + ": non-integer " +
                    std::string(what) + " '" + t + "'");
  }
  if (v < 0) {
    throw DataError("line " + std::to_string(line_no) + ": negative " +
                    std::string(what));
  }
  return static_cast<int>(v);
}

double parse_feature(const std::string& field, std::size_t line_no, int col) {
  const std::string t = trim(field);
  char* end = nullptr;
  const double v = t.empty() ? 0.0 : std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw DataError("line " + std::to_string(line_no) +
                    ": non-numeric feature f" + std::to_string(col + 1) +
                    " '" + t + "'");
  }
  if (!std::isfinite(v)) {
    throw DataError("line " + std::to_string(line_no) +
                    ": non-finite feature f" + std::to_string(col + 1));
  }
  return v;
}

void sort_samples(std::vector<FeatureVector>& samples) {
  std::sort(samples.begin(), samples.end(),
            [](const FeatureVector& a, const FeatureVector& b) {
              if (a.person_id != b.person_id) return a.person_id < b.person_id;
              return a.trial_id < b.trial_id;
            });
}

void check_people_coverage(const std::vector<FeatureVector>& samples,
                           int n_people) {
  std::vector<bool> seen(static_cast<std::size_t>(n_people), false);
  for (const auto& s : samples) seen[static_cast<std::size_t>(s.person_id)] = true;
  for (int p = 0; p < n_people; ++p) {
    if (!seen[static_cast<std::size_t>(p)]) {
      throw DataError("person " + std::to_string(p) +
                      " has no samples (person ids must cover [0, N))");
    }
  }
}

}  // namespace

bool operator==(const FeatureVector& a, const FeatureVector& b) {
  return a.person_id == b.person_id && a.trial_id == b.trial_id &&
         a.features.size() == b.features.size() && a.features == b.features;
}

bool operator==(const LabeledDataset& a, const LabeledDataset& b) {
  return a.n_people == b.n_people && a.split_tag == b.split_tag &&
         a.samples == b.samples;
}

int LabeledDataset::dims() const {
  return samples.empty() ? 0 : static_cast<int>(samples.front().features.size());
}

std::optional<int> LabeledDataset::trials_per_person() const {
  if (samples.empty() || n_people == 0) return std::nullopt;
  std::vector<int> counts(static_cast<std::size_t>(n_people), 0);
  for (const auto& s : samples) {
    if (s.person_id < 0 || s.person_id >= n_people) return std::nullopt;
    ++counts[static_cast<std::size_t>(s.person_id)];
  }
  for (int c : counts) {
    if (c != counts.front()) return std::nullopt;
  }
  return counts.front();
}

Eigen::VectorXd encode_target(int person_id, int n_people) {
  if (n_people < 1 || person_id < 0 || person_id >= n_people) {
    throw std::invalid_argument("encode_target: person_id " +
                                std::to_string(person_id) +
                                " out of range [0, " +
                                std::to_string(n_people) + ")");
  }
  Eigen::VectorXd t = Eigen::VectorXd::Constant(n_people, -1.0);
  t(person_id) = 1.0;
  return t;
}

Eigen::VectorXd Normalizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) {
    throw std::invalid_argument("Normalizer::apply: dimension mismatch");
  }
  return (x - mean).cwiseQuotient(stddev);
}

Eigen::VectorXd Normalizer::invert(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) {
    throw std::invalid_argument("Normalizer::invert: dimension mismatch");
  }
  return x.cwiseProduct(stddev) + mean;
}

Normalizer fit_normalizer(const LabeledDataset& train) {
  if (train.samples.empty()) {
    throw std::invalid_argument("fit_normalizer: empty training set");
  }
  const int p = train.dims();
  const auto n = static_cast<double>(train.samples.size());

  Normalizer norm;
  norm.mean = Eigen::VectorXd::Zero(p);
  for (const auto& s : train.samples) norm.mean += s.features;
  norm.mean /= n;

  Eigen::VectorXd ss = Eigen::VectorXd::Zero(p);
  for (const auto& s : train.samples) {
    const Eigen::VectorXd d = s.features - norm.mean;
    ss += d.cwiseProduct(d);
  }
  // Unbiased (n-1) convention; a single sample degenerates to the floor.
  norm.stddev = (n > 1.0) ? Eigen::VectorXd((ss / (n - 1.0)).cwiseSqrt())
                          : Eigen::VectorXd(Eigen::VectorXd::Zero(p));
  for (int j = 0; j < p; ++j) {
    if (norm.stddev(j) < Normalizer::kStddevFloor) {
      norm.stddev(j) = Normalizer::kStddevFloor;
      norm.clamped_columns.push_back(j);
    }
  }
  return norm;
}

FeatureVector apply_normalizer(const Normalizer& n, const FeatureVector& v) {
  return FeatureVector{v.person_id, v.trial_id, n.apply(v.features)};
}

LabeledDataset apply_normalizer(const Normalizer& n, const LabeledDataset& ds) {
  LabeledDataset out;
  out.n_people = ds.n_people;
  out.split_tag = ds.split_tag;
  out.samples.reserve(ds.samples.size());
  for (const auto& s : ds.samples) out.samples.push_back(apply_normalizer(n, s));
  return out;
}

LabeledDataset load_dataset(const std::filesystem::path& path,
                            int expected_dims) {
  if (expected_dims < 1) {
    throw std::invalid_argument("load_dataset: expected_dims must be >= 1");
  }
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open dataset file: " + path.string());
  }

  std::string line;
  std::size_t line_no = 0;

  // Header: person_id,trial_id,f1,...,fP
  if (!std::getline(in, line)) {
    throw DataError(path.string() + ": no samples (empty file)");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const auto fields = csv::split_line(line);
    if (static_cast<int>(fields.size()) != expected_dims + 2) {
      throw DataError("line 1: header has " + std::to_string(fields.size()) +
                      " columns, expected " + std::to_string(expected_dims + 2));
    }
    if (trim(fields[0]) != "person_id" || trim(fields[1]) != "trial_id") {
      throw DataError("line 1: header must start with person_id,trial_id");
    }
    for (int j = 0; j < expected_dims; ++j) {
      if (trim(fields[static_cast<std::size_t>(j) + 2]) !=
          "f" + std::to_string(j + 1)) {
        throw DataError("line 1: feature column " + std::to_string(j + 3) +
                        " must be named f" + std::to_string(j + 1));
      }
    }
  }

  LabeledDataset ds;
  std::set<std::pair<int, int>> keys;
  int max_person = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = csv::split_line(line);
    if (static_cast<int>(fields.size()) != expected_dims + 2) {
      throw DataError("line " + std::to_string(line_no) + ": has " +
                      std::to_string(fields.size()) + " columns, expected " +
                      std::to_string(expected_dims + 2));
    }
    FeatureVector fv;
    fv.person_id = parse_int(fields[0], line_no, "person_id");
    fv.trial_id = parse_int(fields[1], line_no, "trial_id");
    fv.features.resize(expected_dims);
    for (int j = 0; j < expected_dims; ++j) {
      fv.features(j) = parse_feature(fields[static_cast<std::size_t>(j) + 2],
                                     line_no, j);
    }
    if (!keys.insert({fv.person_id, fv.trial_id}).second) {
      throw DataError("line " + std::to_string(line_no) +
                      ": duplicate (person_id, trial_id) = (" +
                      std::to_string(fv.person_id) + ", " +
                      std::to_string(fv.trial_id) + ")");
    }
    max_person = std::max(max_person, fv.person_id);
    ds.samples.push_back(std::move(fv));
  }

  if (ds.samples.empty()) {
    throw DataError(path.string() + ": no samples");
  }
  ds.n_people = max_person + 1;
  check_people_coverage(ds.samples, ds.n_people);
  sort_samples(ds.samples);
  return ds;
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write dataset file: " + path.string());
  }
  const int p = ds.dims();
  out << "person_id,trial_id";
  for (int j = 1; j <= p; ++j) out << ",f" << j;
  out << "\n";
  for (const auto& s : ds.samples) {
    out << s.person_id << "," << s.trial_id;
    for (int j = 0; j < p; ++j) out << "," << csv::fmt(s.features(j));
    out << "\n";
  }
}

std::pair<LabeledDataset, LabeledDataset> split_train_test(
    const LabeledDataset& ds, int train_per_person) {
  if (train_per_person < 1) {
    throw std::invalid_argument("split_train_test: train_per_person must be >= 1");
  }
  std::map<int, std::vector<const FeatureVector*>> by_person;
  for (const auto& s : ds.samples) by_person[s.person_id].push_back(&s);
  for (auto& [person, samples] : by_person) {
    std::sort(samples.begin(), samples.end(),
              [](const FeatureVector* a, const FeatureVector* b) {
                return a->trial_id < b->trial_id;
              });
  }

  for (const auto& [person, samples] : by_person) {
    if (static_cast<int>(samples.size()) < train_per_person) {
      throw DataError("person " + std::to_string(person) + " has " +
                      std::to_string(samples.size()) +
                      " samples, need at least " +
                      std::to_string(train_per_person) + " for the train split");
    }
    if (static_cast<int>(samples.size()) == train_per_person) {
      throw DataError("empty test split: person " + std::to_string(person) +
                      " has no samples left after taking " +
                      std::to_string(train_per_person) + " for training");
    }
  }

  LabeledDataset train, test;
  train.n_people = test.n_people = ds.n_people;
  train.split_tag = SplitTag::kTrain;
  test.split_tag = SplitTag::kTest;
  for (const auto& [person, samples] : by_person) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto& dst = (static_cast<int>(i) < train_per_person) ? train : test;
      dst.samples.push_back(*samples[i]);
    }
  }
  return {std::move(train), std::move(test)};
}

LabeledDataset generate_synthetic(int n_people, int trials, int dims,
                                  std::uint64_t seed, double spread) {
  if (n_people < 2 || trials < 2 || dims < 1 || !(spread > 0.0)) {
    throw std::invalid_argument(
        "generate_synthetic: need n_people >= 2, trials >= 2, dims >= 1, "
        "spread > 0");
  }
  rng::Engine eng(seed);

  // Fixed draw order: all class means first, then samples person-major,
  // trial-minor, one normal per feature.
  std::vector<Eigen::VectorXd> means;
  means.reserve(static_cast<std::size_t>(n_people));
  for (int p = 0; p < n_people; ++p) {
    Eigen::VectorXd mu(dims);
    for (int j = 0; j < dims; ++j) mu(j) = spread * rng::normal(eng);
    means.push_back(std::move(mu));
  }

  LabeledDataset ds;
  ds.n_people = n_people;
  ds.samples.reserve(static_cast<std::size_t>(n_people) * trials);
  for (int p = 0; p < n_people; ++p) {
    for (int t = 0; t < trials; ++t) {
      FeatureVector fv;
      fv.person_id = p;
      fv.trial_id = t;
      fv.features.resize(dims);
      for (int j = 0; j < dims; ++j) {
        fv.features(j) = means[static_cast<std::size_t>(p)](j) + rng::normal(eng);
      }
      ds.samples.push_back(std::move(fv));
    }
  }
  return ds;
}

}  // namespace bioid
