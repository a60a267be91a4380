#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "rsreg/bandwidth.hpp"
#include "rsreg/inference.hpp"
#include "rsreg/simulators.hpp"

namespace rsreg {

struct CalibrationTable {
  std::vector<double> d;
  std::vector<double> c;
  Eigen::MatrixXd max_dev;          // worst |coverage - (1-alpha)| over n, d x C
  Eigen::MatrixXd mean_log_volume;  // d x C
  CalibrationGrid grid;             // selected C per d
};

/// Regenerates the C(d) calibration table on ARFIMA(0,d,0) designs with the
/// forced long-memory bandwidth h = C log(n)/n.  For each d the selected C
/// minimizes the worst joint-coverage deviation over n; ties go to the
/// smaller mean log-volume.  Common random numbers: every candidate C sees
/// the same dataset and the same auxiliary draw within a replication.
inline CalibrationTable calibrate_grid_detailed(
    const std::vector<double>& d_grid, const std::vector<double>& c_candidates,
    const std::vector<int>& n_set, int reps, double alpha, std::uint64_t seed,
    Margin margin = Margin::gaussian, const Eigen::VectorXd& beta = default_true_beta(),
    int threads = 0) {
  if (d_grid.empty() || c_candidates.empty() || n_set.empty())
    throw invalid_input("calibrate_grid: empty input list");
  for (std::size_t i = 0; i < d_grid.size(); ++i) {
    if (!(d_grid[i] > 0.0 && d_grid[i] < 0.5))
      throw invalid_input("calibrate_grid: d outside (0, 0.5)");
    if (i > 0 && !(d_grid[i] > d_grid[i - 1]))
      throw invalid_input("calibrate_grid: d grid must be strictly increasing");
  }
  for (double c : c_candidates)
    if (!(c > 0.0)) throw invalid_input("calibrate_grid: C candidates must be positive");
  for (int n : n_set)
    if (n < 15) throw invalid_input("calibrate_grid: n too small");
  if (reps < 1) throw invalid_input("calibrate_grid: reps must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("calibrate_grid: alpha outside (0, 1)");
  if (beta.size() != 4) throw invalid_input("calibrate_grid: beta must have 4 entries");

  const int n_d = static_cast<int>(d_grid.size());
  const int n_c = static_cast<int>(c_candidates.size());
  const int n_n = static_cast<int>(n_set.size());
  const long items = static_cast<long>(n_d) * n_n * reps;

  struct Cell {
    int covered = 0;
    int ok = 0;
    double log_volume = 0.0;
  };
  std::vector<std::vector<Cell>> raw(items, std::vector<Cell>(n_c));

  std::atomic<long> next{0};
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<int>(std::min<long>(threads, items));
  auto worker = [&]() {
    const SmoothingConfig base;
    for (long idx = next.fetch_add(1); idx < items; idx = next.fetch_add(1)) {
      const int r = static_cast<int>(idx % reps);
      const int ni = static_cast<int>(idx / reps % n_n);
      const int di = static_cast<int>(idx / reps / n_n);
      const int n = n_set[ni];
      const std::uint64_t rep_seed =
          derive_seed(seed, {static_cast<std::uint64_t>(di), static_cast<std::uint64_t>(ni),
                             static_cast<std::uint64_t>(r)});
      const SimulatedDataset sim = gen_dataset(n, arfima_spec(d_grid[di], margin), rep_seed, beta);
      auto vgen = substream(rep_seed, {2});
      const Eigen::VectorXd v = draw_aux(base.aux, n, vgen);
      for (int ci = 0; ci < n_c; ++ci) {
        SmoothingConfig cfg = base;
        cfg.h = c_candidates[ci] * std::log(static_cast<double>(n)) / n;
        BandwidthDecision dec;
        dec.branch = MemoryBranch::long_memory;
        dec.h = cfg.h;
        dec.c_of_d = c_candidates[ci];
        Cell& cell = raw[idx][ci];
        try {
          const CoefficientInference inf = infer(sim.dataset, cfg, dec, v);
          const EllipsoidRegion region = joint_region(inf, alpha);
          cell.covered = region.contains(beta);
          cell.log_volume = region.log_volume;
          cell.ok = 1;
        } catch (const std::exception&) {
          cell = Cell{};
        }
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  CalibrationTable table;
  table.d = d_grid;
  table.c = c_candidates;
  table.max_dev.setZero(n_d, n_c);
  table.mean_log_volume.setZero(n_d, n_c);
  table.grid.d = d_grid;
  table.grid.c.resize(n_d);
  for (int di = 0; di < n_d; ++di) {
    for (int ci = 0; ci < n_c; ++ci) {
      double worst = 0.0, lv_sum = 0.0;
      long lv_count = 0;
      for (int ni = 0; ni < n_n; ++ni) {
        long covered = 0;
        for (int r = 0; r < reps; ++r) {
          const long idx = (static_cast<long>(di) * n_n + ni) * reps + r;
          const Cell& cell = raw[idx][ci];
          covered += cell.covered;
          lv_sum += cell.log_volume;
          lv_count += cell.ok;
        }
        worst = std::max(worst,
                         std::abs(static_cast<double>(covered) / reps - (1.0 - alpha)));
      }
      table.max_dev(di, ci) = worst;
      table.mean_log_volume(di, ci) = lv_count > 0 ? lv_sum / lv_count : HUGE_VAL;
    }
    int best = 0;
    for (int ci = 1; ci < n_c; ++ci) {
      if (table.max_dev(di, ci) < table.max_dev(di, best) ||
          (table.max_dev(di, ci) == table.max_dev(di, best) &&
           table.mean_log_volume(di, ci) < table.mean_log_volume(di, best)))
        best = ci;
    }
    table.grid.c[di] = c_candidates[best];
  }
  return table;
}

inline CalibrationGrid calibrate_grid(const std::vector<double>& d_grid,
                                      const std::vector<double>& c_candidates,
                                      const std::vector<int>& n_set, int reps, double alpha,
                                      std::uint64_t seed, Margin margin = Margin::gaussian,
                                      const Eigen::VectorXd& beta = default_true_beta(),
                                      int threads = 0) {
  return calibrate_grid_detailed(d_grid, c_candidates, n_set, reps, alpha, seed, margin, beta,
                                 threads)
      .grid;
}

}  // namespace rsreg
