// bioid: committee-of-MLPs biometric identification / verification toolkit.
//
// Subcommands: gen-data, train, committee, eval, experiment.
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
// stall during training. All randomness flows from explicit --seed flags.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "bioid/csv.hpp"
#include "bioid/dataset.hpp"
#include "bioid/errors.hpp"
#include "bioid/eval.hpp"
#include "bioid/experiment.hpp"
#include "bioid/mlp.hpp"
#include "bioid/model_io.hpp"
#include "bioid/train.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitStall = 3;

void echo(const std::string& key, const std::string& value) {
  std::cout << "config " << key << "=" << value << "\n";
}

void echo(const std::string& key, double value) {
  echo(key, bioid::csv::fmt(value));
}

template <typename T>
void echo(const std::string& key, T value) {
  echo(key, std::to_string(value));
}

int infer_dims(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw bioid::DataError("cannot open dataset file: " + path.string());
  std::string header;
  if (!std::getline(in, header)) {
    throw bioid::DataError(path.string() + ": no samples (empty file)");
  }
  const auto fields = bioid::csv::split_line(header);
  if (fields.size() < 3) {
    throw bioid::DataError(path.string() + ": header has too few columns");
  }
  return static_cast<int>(fields.size()) - 2;
}

struct LoadedSplits {
  bioid::LabeledDataset full;
  bioid::LabeledDataset train;
  bioid::LabeledDataset test;
};

// train_per_person = 0 means: use the whole file as the training split.
LoadedSplits load_and_split(const fs::path& path, int train_per_person) {
  LoadedSplits out;
  out.full = bioid::load_dataset(path, infer_dims(path));
  if (train_per_person == 0) {
    out.train = out.full;
  } else {
    auto [train, test] = bioid::split_train_test(out.full, train_per_person);
    out.train = std::move(train);
    out.test = std::move(test);
  }
  return out;
}

// ---------------------------------------------------------------- gen-data

struct GenDataOpts {
  int people = 22;
  int trials = 10;
  int dims = 9;
  std::uint64_t seed = 0;
  double spread = 2.0;
  std::string out;
};

int run_gen_data(const GenDataOpts& o) {
  echo("subcommand", std::string("gen-data"));
  echo("people", o.people);
  echo("trials", o.trials);
  echo("dims", o.dims);
  echo("seed", o.seed);
  echo("spread", o.spread);
  echo("out", o.out);

  const auto ds =
      bioid::generate_synthetic(o.people, o.trials, o.dims, o.seed, o.spread);
  bioid::save_dataset(ds, o.out);
  std::cout << "wrote " << ds.samples.size() << " samples to " << o.out << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainOpts {
  std::string data;
  std::string scheme = "mse";
  int epochs = -1;  // -1: scheme default
  std::uint64_t seed = 0;
  int hidden = 30;
  int train_per_person = 5;
  std::string out;
  std::string report;
};

int run_train(const TrainOpts& o) {
  const auto scheme = (o.scheme == "msereg") ? bioid::TrainScheme::kMsereg
                                             : bioid::TrainScheme::kMse;
  auto cfg = bioid::TrainConfig::defaults_for(scheme);
  if (o.epochs > 0) cfg.epochs = o.epochs;
  cfg.seed = o.seed;

  echo("subcommand", std::string("train"));
  echo("data", o.data);
  echo("scheme", o.scheme);
  echo("epochs", cfg.epochs);
  echo("seed", o.seed);
  echo("hidden", o.hidden);
  echo("train_per_person", o.train_per_person);
  echo("out", o.out);

  const auto splits = load_and_split(o.data, o.train_per_person);
  const auto norm = bioid::fit_normalizer(splits.train);
  for (int col : norm.clamped_columns) {
    std::cerr << "warning: feature f" << col + 1
              << " is constant in the training split; stddev clamped\n";
  }
  const auto train_norm = bioid::apply_normalizer(norm, splits.train);

  const bioid::MlpTopology topology{splits.train.dims(), o.hidden,
                                    splits.train.n_people};
  const auto m0 = bioid::init_weights(topology, o.seed);
  auto [model, report] = (scheme == bioid::TrainScheme::kMse)
                             ? bioid::train_lm(m0, train_norm, cfg)
                             : bioid::train_lm_bayes(m0, train_norm, cfg);

  bioid::save_model(model, o.out,
                    bioid::ModelMeta{o.scheme, o.seed, report.accepted_steps});
  if (o.report.empty()) {
    bioid::write_report_csv(report, std::cout);
  } else {
    std::ofstream rout(o.report);
    if (!rout) throw bioid::DataError("cannot write " + o.report);
    bioid::write_report_csv(report, rout);
  }
  std::cout << "final_train_mse " << bioid::csv::fmt(report.final_train_mse)
            << "\n";
  if (scheme == bioid::TrainScheme::kMsereg) {
    std::cout << "final_gamma " << bioid::csv::fmt(report.final_gamma)
              << " final_alpha " << bioid::csv::fmt(report.final_alpha)
              << " final_beta " << bioid::csv::fmt(report.final_beta) << "\n";
  }
  std::cout << "model written to " << o.out << "\n";
  if (report.stalled) {
    std::cerr << "error: training stalled (damping exceeded its ceiling)\n";
    return kExitStall;
  }
  return kExitOk;
}

// --------------------------------------------------------------- committee

struct CommitteeOpts {
  std::vector<std::string> models;
  std::string out;
};

int run_committee(const CommitteeOpts& o) {
  echo("subcommand", std::string("committee"));
  for (std::size_t i = 0; i < o.models.size(); ++i) {
    echo("model" + std::to_string(i), o.models[i]);
  }
  echo("out", o.out);

  std::vector<bioid::MlpModel> members;
  members.reserve(o.models.size());
  for (const auto& path : o.models) {
    members.push_back(bioid::load_model(path));
  }
  const bioid::Committee committee(std::move(members));
  bioid::save_committee(committee, o.out);
  std::cout << "committee of " << committee.size() << " written to " << o.out
            << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- eval

struct EvalOpts {
  std::string model;
  std::string data;
  int train_per_person = 5;
  double p_true = 0.5;
  double c_miss = 1.0;
  double c_fa = 1.0;
  std::string det_out;
  std::string det_svg;
};

int run_eval(const EvalOpts& o) {
  echo("subcommand", std::string("eval"));
  echo("model", o.model);
  echo("data", o.data);
  echo("train_per_person", o.train_per_person);
  echo("p_true", o.p_true);
  echo("c_miss", o.c_miss);
  echo("c_fa", o.c_fa);

  if (o.train_per_person < 1) {
    throw std::invalid_argument(
        "eval: --train-per-person must be >= 1 (the train split defines the "
        "feature normalization)");
  }
  const auto splits = load_and_split(o.data, o.train_per_person);
  const auto norm = bioid::fit_normalizer(splits.train);

  const auto loaded = bioid::load_model_or_committee(o.model);
  const bioid::MlpTopology topology = std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>,
                                     bioid::MlpModel>) {
          return m.topology;
        } else {
          return m.topology();
        }
      },
      loaded);
  if (topology.output_dim != splits.test.n_people ||
      topology.input_dim != splits.test.dims()) {
    throw bioid::DataError(
        "eval: model topology does not match the dataset (outputs " +
        std::to_string(topology.output_dim) + ", people " +
        std::to_string(splits.test.n_people) + ")");
  }
  const bioid::Scorer scorer = std::visit(
      [](const auto& m) { return bioid::make_scorer(m); }, loaded);

  const auto tensor = bioid::build_tensor(scorer, splits.test, norm);
  const double ident = bioid::identification_rate(tensor);
  const auto split = bioid::split_scores(tensor);
  const auto dcf = bioid::min_dcf(split, o.c_miss, o.c_fa, o.p_true);

  std::cout << "identification_rate " << bioid::csv::fmt(ident) << " ("
            << bioid::csv::fmt(100.0 * ident, 4) << "%)\n";
  std::cout << "min_dcf " << bioid::csv::fmt(dcf.min_dcf) << " ("
            << bioid::csv::fmt(100.0 * dcf.min_dcf, 4) << "%)\n";
  std::cout << "min_dcf_threshold " << bioid::csv::fmt(dcf.threshold) << "\n";

  if (!o.det_out.empty() || !o.det_svg.empty()) {
    const auto curve = bioid::det_curve(split);
    if (!o.det_out.empty()) {
      std::ofstream out(o.det_out);
      if (!out) throw bioid::DataError("cannot write " + o.det_out);
      bioid::write_det_csv(curve, out);
      std::cout << "det curve written to " << o.det_out << "\n";
    }
    if (!o.det_svg.empty()) {
      std::ofstream out(o.det_svg);
      if (!out) throw bioid::DataError("cannot write " + o.det_svg);
      bioid::write_det_svg(curve, out);
      std::cout << "det plot written to " << o.det_svg << "\n";
    }
  }
  return kExitOk;
}

// -------------------------------------------------------------- experiment

struct ExperimentOpts {
  std::string data;
  int runs = 100;
  std::uint64_t seed = 0;
  std::vector<std::string> schemes = {"a", "b", "c", "d"};
  std::string out;
  int jobs = 0;  // 0: hardware concurrency
  int bins = 20;
  int hidden = 30;
  int train_per_person = 5;
  double p_true = 0.5;
  double c_miss = 1.0;
  double c_fa = 1.0;
  int mse_epochs = 10;
  int msereg_epochs = 50;
};

int run_experiment(const ExperimentOpts& o) {
  bioid::ExperimentConfig cfg;
  cfg.n_runs = o.runs;
  cfg.base_seed = o.seed;
  cfg.hidden_dim = o.hidden;
  cfg.jobs = (o.jobs > 0)
                 ? o.jobs
                 : static_cast<int>(
                       std::max(1u, std::thread::hardware_concurrency()));
  cfg.p_true = o.p_true;
  cfg.c_miss = o.c_miss;
  cfg.c_fa = o.c_fa;
  cfg.mse.epochs = o.mse_epochs;
  cfg.msereg.epochs = o.msereg_epochs;

  std::vector<bioid::Scheme> schemes;
  for (const auto& token : o.schemes) schemes.push_back(bioid::parse_scheme(token));

  echo("subcommand", std::string("experiment"));
  echo("data", o.data);
  echo("runs", cfg.n_runs);
  echo("seed", cfg.base_seed);
  {
    std::ostringstream names;
    for (std::size_t i = 0; i < schemes.size(); ++i) {
      names << (i ? "," : "") << bioid::scheme_name(schemes[i]);
    }
    echo("schemes", names.str());
  }
  echo("out", o.out);
  echo("jobs", cfg.jobs);
  echo("bins", o.bins);
  echo("hidden", cfg.hidden_dim);
  echo("train_per_person", o.train_per_person);
  echo("p_true", cfg.p_true);
  echo("c_miss", cfg.c_miss);
  echo("c_fa", cfg.c_fa);
  echo("mse_epochs", cfg.mse.epochs);
  echo("msereg_epochs", cfg.msereg.epochs);

  const auto splits = load_and_split(o.data, o.train_per_person);
  fs::create_directories(o.out);

  std::vector<bioid::SchemeSummary> summaries;
  for (const auto scheme : schemes) {
    const auto records =
        bioid::run_scheme(scheme, splits.train, splits.test, cfg);
    const fs::path dir = fs::path(o.out) / bioid::scheme_name(scheme);
    fs::create_directories(dir);
    bioid::write_records_csv(records, dir / "records.csv");
    for (const auto& h : bioid::emit_histograms(records, o.bins)) {
      bioid::write_histogram_csv(h, dir / ("histogram_" + h.metric + ".csv"));
    }
    bioid::write_scatter_csv(bioid::emit_scatter(records), dir / "scatter.csv");
    const auto summary = bioid::summarize(records);
    summaries.push_back(summary);

    std::cout << bioid::scheme_name(scheme) << ": ident "
              << bioid::csv::fmt(100.0 * summary.ident.mean, 4) << "% +- "
              << bioid::csv::fmt(100.0 * summary.ident.stddev, 4)
              << "%, min_dcf " << bioid::csv::fmt(100.0 * summary.dcf.mean, 4)
              << "% +- " << bioid::csv::fmt(100.0 * summary.dcf.stddev, 4)
              << "%, corr "
              << (summary.corr ? bioid::csv::fmt(*summary.corr, 4)
                               : std::string("NA"));
    if (summary.excluded > 0) {
      std::cout << " (" << summary.excluded << " stalled runs excluded)";
    }
    std::cout << "\n";
  }
  bioid::write_summary_csv(summaries, fs::path(o.out) / "summary.csv");
  std::cout << "summary written to " << (fs::path(o.out) / "summary.csv").string()
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "bioid: committee-of-MLPs biometric identification and verification"};
  app.require_subcommand(1);

  GenDataOpts gen;
  auto* gen_cmd =
      app.add_subcommand("gen-data", "Generate a synthetic geometry dataset");
  gen_cmd->add_option("--people", gen.people, "Number of persons (N)")
      ->check(CLI::Range(2, 100000));
  gen_cmd->add_option("--trials", gen.trials, "Realizations per person (R)")
      ->check(CLI::Range(2, 100000));
  gen_cmd->add_option("--dims", gen.dims, "Feature dimensions (P)")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--spread", gen.spread, "Class-separation parameter")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();

  TrainOpts tr;
  auto* tr_cmd = app.add_subcommand("train", "Train one MLP");
  tr_cmd->add_option("--data", tr.data, "Dataset CSV")->required();
  tr_cmd->add_option("--scheme", tr.scheme, "mse or msereg")
      ->check(CLI::IsMember({"mse", "msereg"}));
  tr_cmd->add_option("--epochs", tr.epochs,
                     "Accepted LM updates (default 10 mse / 50 msereg)");
  tr_cmd->add_option("--seed", tr.seed, "Weight-init seed");
  tr_cmd->add_option("--hidden", tr.hidden, "Hidden layer width")
      ->check(CLI::PositiveNumber);
  tr_cmd->add_option("--train-per-person", tr.train_per_person,
                     "Train samples per person (0 = train on whole file)")
      ->check(CLI::NonNegativeNumber);
  tr_cmd->add_option("--out", tr.out, "Model checkpoint path")->required();
  tr_cmd->add_option("--report", tr.report,
                     "Training report CSV (default: stdout)");

  CommitteeOpts cm;
  auto* cm_cmd =
      app.add_subcommand("committee", "Bundle trained models into a committee");
  cm_cmd->add_option("--models", cm.models, "Member checkpoints m1,m2,m3")
      ->required()
      ->delimiter(',');
  cm_cmd->add_option("--out", cm.out, "Committee file path")->required();

  EvalOpts ev;
  auto* ev_cmd = app.add_subcommand(
      "eval", "Evaluate identification and verification on the test split");
  ev_cmd->add_option("--model", ev.model, "Model or committee file")->required();
  ev_cmd->add_option("--data", ev.data, "Dataset CSV")->required();
  ev_cmd->add_option("--train-per-person", ev.train_per_person,
                     "Train samples per person (defines split + normalization)");
  ev_cmd->add_option("--p-true", ev.p_true, "Prior probability of the target");
  ev_cmd->add_option("--c-miss", ev.c_miss, "Cost of a miss");
  ev_cmd->add_option("--c-fa", ev.c_fa, "Cost of a false acceptance");
  ev_cmd->add_option("--det-out", ev.det_out, "DET curve CSV path");
  ev_cmd->add_option("--det-svg", ev.det_svg, "DET curve SVG path");

  ExperimentOpts ex;
  auto* ex_cmd = app.add_subcommand(
      "experiment", "Multi-start study over the four training schemes");
  ex_cmd->add_option("--data", ex.data, "Dataset CSV")->required();
  ex_cmd->add_option("--runs", ex.runs, "Random initializations per scheme")
      ->check(CLI::Range(2, 1000000));
  ex_cmd->add_option("--seed", ex.seed, "Base seed");
  ex_cmd->add_option("--schemes", ex.schemes,
                     "Schemes a,b,c,d or long names (default all)")
      ->delimiter(',');
  ex_cmd->add_option("--out", ex.out, "Output directory")->required();
  ex_cmd->add_option("--jobs", ex.jobs, "Worker threads (0 = hardware)");
  ex_cmd->add_option("--bins", ex.bins, "Histogram bins")
      ->check(CLI::Range(2, 10000));
  ex_cmd->add_option("--hidden", ex.hidden, "Hidden layer width")
      ->check(CLI::PositiveNumber);
  ex_cmd->add_option("--train-per-person", ex.train_per_person,
                     "Train samples per person");
  ex_cmd->add_option("--p-true", ex.p_true, "Prior probability of the target");
  ex_cmd->add_option("--c-miss", ex.c_miss, "Cost of a miss");
  ex_cmd->add_option("--c-fa", ex.c_fa, "Cost of a false acceptance");
  ex_cmd->add_option("--mse-epochs", ex.mse_epochs, "Epochs for schemes a/c");
  ex_cmd->add_option("--msereg-epochs", ex.msereg_epochs,
                     "Epochs for schemes b/d");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return run_gen_data(gen);
    if (tr_cmd->parsed()) return run_train(tr);
    if (cm_cmd->parsed()) return run_committee(cm);
    if (ev_cmd->parsed()) return run_eval(ev);
    if (ex_cmd->parsed()) return run_experiment(ex);
  } catch (const bioid::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
