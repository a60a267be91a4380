#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rsreg/bandwidth.hpp"
#include "rsreg/comparators.hpp"
#include "rsreg/errors.hpp"
#include "rsreg/inference.hpp"
#include "rsreg/ols.hpp"
#include "rsreg/simulators.hpp"

namespace rsreg {

enum class Method { proposed, nw_hac, mac };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::nw_hac: return "nw-hac";
    case Method::mac: return "mac";
  }
  throw invalid_input("method_name: unknown method");
}

struct ExperimentConfig {
  std::vector<int> n_set;
  int reps = 500;
  double alpha = 0.05;
  std::vector<Method> methods = {Method::proposed, Method::nw_hac, Method::mac};
  std::vector<ErrorProcessSpec> spec_grid;
  std::uint64_t seed = 1;
  Eigen::VectorXd true_beta = default_true_beta();
  SmoothingConfig smoothing;
  BandwidthOptions bandwidth;
  HacConfig hac;
  MacConfig mac_cfg;
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.n_set.empty()) throw invalid_input("experiment: empty n_set");
  for (int n : cfg.n_set)
    if (n < 1) throw invalid_input("experiment: n must be positive");
  if (cfg.reps < 1) throw invalid_input("experiment: reps must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw invalid_input("experiment: alpha outside (0, 1)");
  if (cfg.methods.empty()) throw invalid_input("experiment: no methods requested");
  if (cfg.spec_grid.empty()) throw invalid_input("experiment: empty spec grid");
  for (const ErrorProcessSpec& s : cfg.spec_grid) validate(s);
  if (cfg.true_beta.size() != 4) throw invalid_input("experiment: beta must have 4 entries");
}

/// Interval score: width plus 2/alpha times the distance by which the truth
/// escapes the interval.
inline double winkler_score(double lo, double hi, double truth, double alpha) {
  if (!(lo <= hi)) throw invalid_input("winkler_score: lo > hi");
  if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("winkler_score: alpha outside (0, 1)");
  double score = hi - lo;
  if (truth < lo) score += 2.0 / alpha * (lo - truth);
  if (truth > hi) score += 2.0 / alpha * (truth - hi);
  return score;
}

struct ReplicationResult {
  Method method = Method::proposed;
  bool ok = true;
  std::string error;  // tag when !ok
  bool joint_covered = false;
  std::vector<int> marginal_covered;
  Eigen::VectorXd winkler;
  double log_volume = 0.0;
  MemoryBranch branch = MemoryBranch::short_memory;
  bool truncation_active = false;
  bool has_branch = false;  // only the proposed method takes a branch
};

namespace detail {

inline void score_intervals(ReplicationResult& r,
                            const std::vector<std::pair<double, double>>& intervals,
                            const Eigen::VectorXd& truth, double alpha) {
  const int k = static_cast<int>(intervals.size());
  r.marginal_covered.resize(k);
  r.winkler.resize(k);
  for (int j = 0; j < k; ++j) {
    const auto [lo, hi] = intervals[j];
    r.marginal_covered[j] = (lo <= truth[j] && truth[j] <= hi) ? 1 : 0;
    r.winkler[j] = winkler_score(lo, hi, truth[j], alpha);
  }
}

}  // namespace detail

/// Runs every requested method on one simulated replication.  The dataset
/// comes from gen_dataset(n, spec, rep_seed); the auxiliary smoothing draw
/// uses the further substream {rep_seed, 2}.  Method failures are recorded,
/// not thrown.
inline std::vector<ReplicationResult> run_replication(int n, const ErrorProcessSpec& spec,
                                                      std::uint64_t rep_seed,
                                                      const ExperimentConfig& cfg) {
  const SimulatedDataset sim = gen_dataset(n, spec, rep_seed, cfg.true_beta);
  const Eigen::VectorXd& truth = cfg.true_beta;

  std::vector<ReplicationResult> out;
  out.reserve(cfg.methods.size());
  for (Method method : cfg.methods) {
    ReplicationResult r;
    r.method = method;
    try {
      if (method == Method::proposed) {
        SmoothingConfig scfg = cfg.smoothing;
        const BandwidthDecision dec = select_bandwidth(sim.dataset, scfg, cfg.bandwidth);
        scfg.h = dec.h;
        auto vgen = substream(rep_seed, {2});
        const CoefficientInference inf = infer(sim.dataset, scfg, dec, vgen);
        const EllipsoidRegion region = joint_region(inf, cfg.alpha);
        r.joint_covered = region.contains(truth);
        std::vector<std::pair<double, double>> intervals;
        for (int j = 0; j < 4; ++j) intervals.push_back(marginal_ci(inf, j, cfg.alpha));
        detail::score_intervals(r, intervals, truth, cfg.alpha);
        r.log_volume = region.log_volume;
        r.branch = dec.branch;
        r.truncation_active = inf.truncation_active;
        r.has_branch = true;
      } else {
        const OlsFit fit = ols_fit(sim.dataset);
        const Eigen::MatrixXd cov = method == Method::nw_hac
                                        ? nw_hac_cov(sim.dataset, cfg.hac).cov
                                        : mac_cov(sim.dataset, cfg.mac_cfg).cov;
        const auto [region, intervals] = comparator_regions(fit.beta, cov, n, cfg.alpha);
        r.joint_covered = region.contains(truth);
        detail::score_intervals(r, intervals, truth, cfg.alpha);
        r.log_volume = region.log_volume;
      }
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// One aggregated cell of the experiment table.
struct AggregateRow {
  std::string model;
  double param1 = 0.0;
  double param2 = 0.0;
  std::string margin;
  int n = 0;
  std::string method;
  Eigen::Vector4d cov_beta = Eigen::Vector4d::Zero();  // percent
  Eigen::Vector4d winkler = Eigen::Vector4d::Zero();
  double cov_joint = 0.0;  // percent
  double log_volume = 0.0;
  double branch_longmem_frac = 0.0;
  double trunc_frac = 0.0;
  bool has_branch = false;
  int n_errors = 0;
  int n_ok = 0;
};

/// Deterministic Monte Carlo experiment.  Replications are distributed over a
/// work queue; every replication draws only from the substream derived from
/// (seed, spec index, n index, rep index), so the result is byte-identical
/// for any worker count.  threads = 0 picks the hardware count.
inline std::vector<AggregateRow> run_experiment(const ExperimentConfig& cfg, int threads = 0) {
  validate(cfg);
  const int n_specs = static_cast<int>(cfg.spec_grid.size());
  const int n_sizes = static_cast<int>(cfg.n_set.size());
  const long cells = static_cast<long>(n_specs) * n_sizes * cfg.reps;

  std::vector<std::vector<ReplicationResult>> results(cells);
  std::atomic<long> next{0};
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<int>(std::min<long>(threads, cells));

  auto worker = [&]() {
    for (long idx = next.fetch_add(1); idx < cells; idx = next.fetch_add(1)) {
      const int r = static_cast<int>(idx % cfg.reps);
      const int ni = static_cast<int>(idx / cfg.reps % n_sizes);
      const int si = static_cast<int>(idx / cfg.reps / n_sizes);
      const std::uint64_t rep_seed =
          derive_seed(cfg.seed, {static_cast<std::uint64_t>(si), static_cast<std::uint64_t>(ni),
                                 static_cast<std::uint64_t>(r)});
      results[idx] = run_replication(cfg.n_set[ni], cfg.spec_grid[si], rep_seed, cfg);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  // index-ordered reduction
  std::vector<AggregateRow> rows;
  rows.reserve(static_cast<std::size_t>(n_specs) * n_sizes * cfg.methods.size());
  for (int si = 0; si < n_specs; ++si)
    for (int ni = 0; ni < n_sizes; ++ni)
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        AggregateRow row;
        row.model = model_name(cfg.spec_grid[si]);
        std::tie(row.param1, row.param2) = model_params(cfg.spec_grid[si]);
        row.margin = margin_name(cfg.spec_grid[si]);
        row.n = cfg.n_set[ni];
        row.method = method_name(cfg.methods[mi]);
        for (int r = 0; r < cfg.reps; ++r) {
          const long idx = (static_cast<long>(si) * n_sizes + ni) * cfg.reps + r;
          const ReplicationResult& rep = results[idx][mi];
          if (!rep.ok) {
            ++row.n_errors;
            continue;
          }
          ++row.n_ok;
          row.cov_joint += rep.joint_covered;
          for (int j = 0; j < 4; ++j) {
            row.cov_beta[j] += rep.marginal_covered[j];
            row.winkler[j] += rep.winkler[j];
          }
          row.log_volume += rep.log_volume;
          row.has_branch = rep.has_branch;
          if (rep.has_branch) {
            row.branch_longmem_frac += rep.branch == MemoryBranch::long_memory;
            row.trunc_frac += rep.truncation_active;
          }
        }
        if (row.n_ok > 0) {
          row.cov_joint *= 100.0 / row.n_ok;
          row.cov_beta *= 100.0 / row.n_ok;
          row.winkler /= row.n_ok;
          row.log_volume /= row.n_ok;
          row.branch_longmem_frac /= row.n_ok;
          row.trunc_frac /= row.n_ok;
        }
        rows.push_back(std::move(row));
      }
  return rows;
}

namespace detail {

inline std::string csv_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace detail

inline std::string experiment_csv(const std::vector<AggregateRow>& rows) {
  std::string out =
      "model,param1,param2,margin,n,method,cov_b0,cov_b1,cov_b2,cov_b3,"
      "wink_b0,wink_b1,wink_b2,wink_b3,cov_joint,log_vol,"
      "branch_longmem_frac,trunc_frac,n_errors\n";
  for (const AggregateRow& r : rows) {
    out += r.model + ',' + detail::csv_num(r.param1) + ',' + detail::csv_num(r.param2) + ',' +
           r.margin + ',' + std::to_string(r.n) + ',' + r.method;
    if (r.n_ok == 0) {
      for (int i = 0; i < 10; ++i) out += ",na";
    } else {
      for (int j = 0; j < 4; ++j) out += ',' + detail::csv_num(r.cov_beta[j]);
      for (int j = 0; j < 4; ++j) out += ',' + detail::csv_num(r.winkler[j]);
      out += ',' + detail::csv_num(r.cov_joint) + ',' + detail::csv_num(r.log_volume);
    }
    if (r.has_branch && r.n_ok > 0)
      out += ',' + detail::csv_num(r.branch_longmem_frac) + ',' +
             detail::csv_num(r.trunc_frac);
    else
      out += ",na,na";
    out += ',' + std::to_string(r.n_errors) + '\n';
  }
  return out;
}

inline void save_experiment_csv(const std::vector<AggregateRow>& rows,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("save_experiment_csv: cannot open " + path);
  out << experiment_csv(rows);
  if (!out) throw data_error("save_experiment_csv: write failed for " + path);
}

enum class SweepAxis { arma_grid, fgm_grid, arfima_d, fgn_h };

inline SweepAxis sweep_axis_from_name(const std::string& name) {
  if (name == "arma_grid") return SweepAxis::arma_grid;
  if (name == "fgm_grid") return SweepAxis::fgm_grid;
  if (name == "arfima_d") return SweepAxis::arfima_d;
  if (name == "fgn_h") return SweepAxis::fgn_h;
  throw invalid_input("sweep axis must be one of arma_grid, fgm_grid, arfima_d, fgn_h");
}

inline std::vector<ErrorProcessSpec> default_sweep_grid(SweepAxis axis,
                                                        Margin margin = Margin::gaussian) {
  std::vector<ErrorProcessSpec> grid;
  switch (axis) {
    case SweepAxis::arma_grid:
      for (double phi : {0.0, 0.3, 0.6})
        for (double theta : {0.0, 0.4, 0.8}) grid.push_back(arma_spec(phi, theta, margin));
      break;
    case SweepAxis::fgm_grid:
      for (double l1 : {-0.5, 0.0, 0.15, 0.5})
        for (double l2 : {0.0, 0.10}) grid.push_back(fgm_spec(l1, l2, margin));
      break;
    case SweepAxis::arfima_d:
      for (double d : {0.15, 0.25, 0.35, 0.45}) grid.push_back(arfima_spec(d, margin));
      break;
    case SweepAxis::fgn_h:
      for (double h : {0.6, 0.7, 0.8, 0.9}) grid.push_back(fgn_spec(h, margin));
      break;
  }
  return grid;
}

/// Parameter sweep along one model axis; cfg.spec_grid is replaced by the
/// axis's default grid.
inline std::vector<AggregateRow> sweep(SweepAxis axis, ExperimentConfig cfg,
                                       Margin margin = Margin::gaussian, int threads = 0) {
  cfg.spec_grid = default_sweep_grid(axis, margin);
  return run_experiment(cfg, threads);
}

}  // namespace rsreg
