#include "bioid/train.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "bioid/csv.hpp"

namespace bioid {

namespace {

constexpr double kMuFloor = 1e-20;
constexpr double kDivFloor = 1e-12;

void check_compatible(const MlpModel& m, const LabeledDataset& data,
                      const char* what) {
  if (data.samples.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty dataset");
  }
  if (data.dims() != m.topology.input_dim) {
    throw std::invalid_argument(std::string(what) +
                                ": dataset dims do not match model input");
  }
  if (data.n_people != m.topology.output_dim) {
    throw std::invalid_argument(std::string(what) +
                                ": dataset people do not match model outputs");
  }
}

// Targets as columns: column p is the +/-1 encoding of person p.
Eigen::MatrixXd target_columns(int n_people) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(n_people, n_people, -1.0);
  t.diagonal().setOnes();
  return t;
}

double sse_of(const MlpModel& m, const LabeledDataset& data,
              const Eigen::MatrixXd& targets) {
  double sse = 0.0;
  for (const auto& s : data.samples) {
    const Eigen::VectorXd err = targets.col(s.person_id) - forward(m, s.features);
    sse += err.squaredNorm();
  }
  return sse;
}

// Solve with only the lower triangle of jtj populated; nullopt when the
// factorization fails (can only happen at mu ~ 0 on a singular system).
std::optional<Eigen::VectorXd> try_lm_step(const Eigen::MatrixXd& jtj,
                                           const Eigen::VectorXd& jte,
                                           const Eigen::VectorXd& theta,
                                           double mu, double alpha,
                                           double beta) {
  Eigen::MatrixXd m = beta * jtj;
  m.diagonal().array() += alpha + mu;
  const auto llt = m.selfadjointView<Eigen::Lower>().llt();
  if (llt.info() != Eigen::Success) return std::nullopt;
  return llt.solve(beta * jte - alpha * theta);
}

// tr(M^-1) for SPD M via ||L^-1||_F^2.
double trace_inverse_spd(const Eigen::MatrixXd& jtj, double alpha,
                         double beta) {
  Eigen::MatrixXd m = beta * jtj;
  m.diagonal().array() += alpha;
  const auto llt = m.selfadjointView<Eigen::Lower>().llt();
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("trace_inverse_spd: factorization failed");
  }
  Eigen::MatrixXd linv =
      Eigen::MatrixXd::Identity(jtj.rows(), jtj.cols());
  llt.matrixL().solveInPlace(linv);
  return linv.squaredNorm();
}

struct Hyper {
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.0;
};

std::pair<MlpModel, TrainReport> run_lm(const MlpModel& m0,
                                        const LabeledDataset& data,
                                        const TrainConfig& cfg) {
  check_compatible(m0, data, "train");
  if (cfg.epochs < 1 || !(cfg.mu0 > 0.0) || !(cfg.mu_up > 1.0) ||
      !(cfg.mu_down > 0.0 && cfg.mu_down < 1.0)) {
    throw std::invalid_argument("train: invalid config");
  }

  const bool bayes = cfg.scheme == TrainScheme::kMsereg;
  const int w = m0.topology.param_count();
  const auto n_resid = static_cast<double>(data.samples.size()) *
                       m0.topology.output_dim;
  const Eigen::MatrixXd targets = target_columns(data.n_people);

  MlpModel model = m0;
  Eigen::VectorXd theta = model.flatten();
  double sse = sse_of(model, data, targets);
  double ssw = theta.squaredNorm();

  Hyper hp;
  if (bayes) {
    // Start from gamma = W so both hyperparameters are positive from the
    // first accept decision.
    hp.gamma = static_cast<double>(w);
    hp.alpha = hp.gamma / (2.0 * std::max(ssw, kDivFloor));
    hp.beta = (n_resid > w)
                  ? (n_resid - hp.gamma) / (2.0 * std::max(sse, kDivFloor))
                  : 1.0;
  }

  const auto display = [&](double sse_v, double ssw_v, const Hyper& h) {
    return bayes ? h.beta * sse_v + h.alpha * ssw_v : sse_v / n_resid;
  };

  TrainReport report;
  report.scheme = cfg.scheme;
  report.seed = cfg.seed;

  Eigen::MatrixXd jac(static_cast<Eigen::Index>(n_resid), w);
  Eigen::VectorXd resid(static_cast<Eigen::Index>(n_resid));
  Eigen::MatrixXd jtj(w, w);

  double mu = cfg.mu0;
  while (report.accepted_steps < cfg.epochs && !report.stalled) {
    assemble_system(model, data, jac, resid);
    jtj.setZero();
    jtj.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
    const Eigen::VectorXd jte = jac.transpose() * resid;

    EpochRecord rec;
    rec.epoch = report.accepted_steps + 1;
    rec.alpha = hp.alpha;
    rec.beta = hp.beta;
    rec.objective_before = display(sse, ssw, hp);

    bool accepted = false;
    const double obj_cur = hp.beta * sse + hp.alpha * ssw;
    while (true) {
      const auto delta = try_lm_step(jtj, jte, theta, mu, hp.alpha, hp.beta);
      if (delta) {
        const Eigen::VectorXd theta_c = theta + *delta;
        const MlpModel model_c = MlpModel::unflatten(model.topology, theta_c);
        const double sse_c = sse_of(model_c, data, targets);
        const double ssw_c = theta_c.squaredNorm();
        const double obj_c = hp.beta * sse_c + hp.alpha * ssw_c;
        if (std::isfinite(obj_c) && obj_c <= obj_cur) {
          theta = theta_c;
          model = model_c;
          sse = sse_c;
          ssw = ssw_c;
          rec.mu = mu;
          accepted = true;
          mu = std::max(mu * cfg.mu_down, kMuFloor);
          break;
        }
      }
      ++rec.rejected_tries;
      mu *= cfg.mu_up;
      if (mu > cfg.mu_max) break;
    }
    report.rejected_steps += rec.rejected_tries;

    if (!accepted) {
      rec.mu = mu;
      rec.objective_after = rec.objective_before;
      report.epochs.push_back(rec);
      report.stalled = true;
      break;
    }

    rec.accepted = true;
    rec.objective_after = display(sse, ssw, hp);
    ++report.accepted_steps;

    if (bayes) {
      // Foresee-Hagan re-estimation from the Gauss-Newton Hessian
      // H = 2(beta JtJ + alpha I) at this epoch's Jacobian:
      //   gamma = W - 2 alpha tr(H^-1) = W - alpha tr((beta JtJ + alpha I)^-1)
      const double trace = trace_inverse_spd(jtj, hp.alpha, hp.beta);
      hp.gamma = w - hp.alpha * trace;
      hp.alpha = hp.gamma / (2.0 * std::max(ssw, kDivFloor));
      double beta_new = (n_resid - hp.gamma) / (2.0 * std::max(sse, kDivFloor));
      if (!(beta_new > 0.0)) beta_new = kDivFloor;  // underdetermined fit
      hp.beta = beta_new;
      rec.gamma = hp.gamma;
    }
    report.epochs.push_back(rec);
  }

  report.final_train_mse = sse / n_resid;
  if (bayes) {
    report.final_alpha = hp.alpha;
    report.final_beta = hp.beta;
    report.final_gamma = hp.gamma;
  }
  return {std::move(model), std::move(report)};
}

}  // namespace

TrainConfig TrainConfig::defaults_for(TrainScheme scheme) {
  TrainConfig cfg;
  cfg.scheme = scheme;
  cfg.epochs = (scheme == TrainScheme::kMsereg) ? 50 : 10;
  return cfg;
}

double mse(const MlpModel& m, const LabeledDataset& data) {
  check_compatible(m, data, "mse");
  const Eigen::MatrixXd targets = target_columns(data.n_people);
  const auto n_resid = static_cast<double>(data.samples.size()) *
                       m.topology.output_dim;
  return sse_of(m, data, targets) / n_resid;
}

void assemble_system(const MlpModel& m, const LabeledDataset& data,
                     Eigen::MatrixXd& jac, Eigen::VectorXd& resid) {
  check_compatible(m, data, "assemble_system");
  const int n_out = m.topology.output_dim;
  const int w = m.topology.param_count();
  const auto rows = static_cast<Eigen::Index>(data.samples.size()) * n_out;
  jac.resize(rows, w);
  resid.resize(rows);
  const Eigen::MatrixXd targets = target_columns(data.n_people);
  Eigen::Index row = 0;
  for (const auto& s : data.samples) {
    jacobian_into(m, s.features, jac.middleRows(row, n_out));
    resid.segment(row, n_out) =
        targets.col(s.person_id) - forward(m, s.features);
    row += n_out;
  }
}

Eigen::VectorXd lm_step(const Eigen::MatrixXd& jtj, const Eigen::VectorXd& jte,
                        const Eigen::VectorXd& theta, double mu, double alpha,
                        double beta) {
  const auto delta = try_lm_step(jtj, jte, theta, mu, alpha, beta);
  if (!delta) {
    throw std::runtime_error("lm_step: normal equations not positive definite");
  }
  return *delta;
}

std::pair<MlpModel, TrainReport> train_lm(const MlpModel& m0,
                                          const LabeledDataset& data,
                                          const TrainConfig& cfg) {
  if (cfg.scheme != TrainScheme::kMse) {
    throw std::invalid_argument("train_lm: config scheme must be MSE");
  }
  return run_lm(m0, data, cfg);
}

std::pair<MlpModel, TrainReport> train_lm_bayes(const MlpModel& m0,
                                                const LabeledDataset& data,
                                                const TrainConfig& cfg) {
  if (cfg.scheme != TrainScheme::kMsereg) {
    throw std::invalid_argument("train_lm_bayes: config scheme must be MSEREG");
  }
  return run_lm(m0, data, cfg);
}

void write_report_csv(const TrainReport& report, std::ostream& out) {
  out << "epoch,objective,mu,accepted\n";
  for (const auto& rec : report.epochs) {
    out << rec.epoch << "," << csv::fmt(rec.objective_after) << ","
        << csv::fmt(rec.mu) << "," << (rec.accepted ? 1 : 0) << "\n";
  }
}

}  // namespace bioid
