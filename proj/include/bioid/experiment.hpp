#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bioid/dataset.hpp"
#include "bioid/stats.hpp"
#include "bioid/train.hpp"

namespace bioid {

// The four training schemes of the multi-start study. Committee schemes
// combine 3 members trained under the corresponding single scheme.
enum class Scheme {
  kMseSingle,      // a
  kMseregSingle,   // b
  kMseCommittee,   // c
  kMseregCommittee // d
};

constexpr int kCommitteeMembers = 3;

std::string scheme_name(Scheme s);
char scheme_letter(Scheme s);
// Accepts both the letter ("a".."d") and the long name.
Scheme parse_scheme(const std::string& token);
bool is_committee(Scheme s);
TrainScheme train_scheme_of(Scheme s);

struct RunRecord {
  Scheme scheme = Scheme::kMseSingle;
  int run_index = 0;
  std::uint64_t run_seed = 0;  // member i trains from derive_seed(run_seed, i)
  double ident_rate = 0.0;
  double min_dcf = 0.0;
  bool stalled = false;  // any member stalled; excluded from summaries
};

struct ExperimentConfig {
  int n_runs = 100;
  std::uint64_t base_seed = 0;
  int hidden_dim = 30;
  int jobs = 1;
  double p_true = 0.5;
  double c_miss = 1.0;
  double c_fa = 1.0;
  TrainConfig mse = TrainConfig::defaults_for(TrainScheme::kMse);
  TrainConfig msereg = TrainConfig::defaults_for(TrainScheme::kMsereg);
  // Test hook: committee members all reuse member 0's seed, which makes the
  // committee schemes reproduce their single-scheme counterparts.
  bool force_identical_member_seeds = false;
};

// Trains n_runs fresh models (or member triples) on the train split and
// scores each on the test split. Deterministic in (data, config); runs may
// execute on cfg.jobs threads, output order is by run_index regardless.
std::vector<RunRecord> run_scheme(Scheme scheme, const LabeledDataset& train,
                                  const LabeledDataset& test,
                                  const ExperimentConfig& cfg);

struct SchemeSummary {
  Scheme scheme = Scheme::kMseSingle;
  int run_count = 0;  // valid (non-stalled) records
  int excluded = 0;
  stats::MeanStd ident;
  stats::MeanStd dcf;
  std::optional<double> corr;     // empty when either metric has no variance
  std::optional<stats::OlsLine> line;  // min_dcf on ident_rate
};

// Gaussian fit = sample mean/stddev (n-1). Requires >= 2 valid records.
SchemeSummary summarize(std::span<const RunRecord> records);

struct MetricHistogram {
  std::string metric;  // "ident_rate" or "min_dcf"
  stats::Histogram hist;
};

std::vector<MetricHistogram> emit_histograms(std::span<const RunRecord> records,
                                             int bins);

struct ScatterData {
  std::vector<std::pair<double, double>> points;  // (ident_rate, min_dcf)
  std::optional<stats::OlsLine> line;
};

ScatterData emit_scatter(std::span<const RunRecord> records);

// File emission, one directory per scheme under out_dir plus a global
// summary.csv shaped like a results table.
void write_records_csv(std::span<const RunRecord> records,
                       const std::filesystem::path& path);
void write_histogram_csv(const MetricHistogram& h,
                         const std::filesystem::path& path);
void write_scatter_csv(const ScatterData& s, const std::filesystem::path& path);
void write_summary_csv(std::span<const SchemeSummary> summaries,
                       const std::filesystem::path& path);

}  // namespace bioid
