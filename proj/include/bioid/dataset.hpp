#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

namespace bioid {

// One biometric sample: a P-dimensional feature vector with identity labels.
struct FeatureVector {
  int person_id = 0;
  int trial_id = 0;
  Eigen::VectorXd features;
};

bool operator==(const FeatureVector& a, const FeatureVector& b);

enum class SplitTag { kTrain, kTest };

// Samples are kept sorted by (person_id, trial_id). Every person_id in
// [0, n_people) appears and (person_id, trial_id) pairs are unique;
// load/generate/split all enforce this.
struct LabeledDataset {
  int n_people = 0;
  SplitTag split_tag = SplitTag::kTrain;
  std::vector<FeatureVector> samples;

  int dims() const;
  // Trial count shared by all persons, or nullopt when ragged.
  std::optional<int> trials_per_person() const;
};

bool operator==(const LabeledDataset& a, const LabeledDataset& b);

// +1 at the owner's output, -1 elsewhere.
Eigen::VectorXd encode_target(int person_id, int n_people);

// Per-feature affine map fitted on training data only. Stddevs use the
// unbiased (n-1) convention and are clamped below at kStddevFloor.
struct Normalizer {
  static constexpr double kStddevFloor = 1e-8;

  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  std::vector<int> clamped_columns;  // constant features found during fit

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& x) const;
};

Normalizer fit_normalizer(const LabeledDataset& train);
FeatureVector apply_normalizer(const Normalizer& n, const FeatureVector& v);
LabeledDataset apply_normalizer(const Normalizer& n, const LabeledDataset& ds);

// CSV schema: header "person_id,trial_id,f1,...,fP", one sample per row.
LabeledDataset load_dataset(const std::filesystem::path& path,
                            int expected_dims);
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path);

// Per person, the lowest trial_ids go to train, the rest to test.
std::pair<LabeledDataset, LabeledDataset> split_train_test(
    const LabeledDataset& ds, int train_per_person);

// Isotropic Gaussian mixture: one class mean per person drawn from
// N(0, spread^2 I), samples drawn around it with unit within-class stddev.
// Pure function of (seed, parameters).
LabeledDataset generate_synthetic(int n_people, int trials, int dims,
                                  std::uint64_t seed, double spread);

}  // namespace bioid
