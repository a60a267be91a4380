#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rsreg/calibration.hpp"
#include "rsreg/harness.hpp"
#include "test_util.hpp"

namespace {

using Eigen::VectorXd;

rsreg::ExperimentConfig small_config() {
  rsreg::ExperimentConfig cfg;
  cfg.n_set = {250};
  cfg.reps = 8;
  cfg.spec_grid = {rsreg::fgm_spec(0.15, 0.0)};
  cfg.methods = {rsreg::Method::proposed, rsreg::Method::nw_hac};
  cfg.seed = 31;
  return cfg;
}

TEST(WinklerScore, FormulaCases) {
  EXPECT_EQ(rsreg::winkler_score(-1.0, 1.0, 0.0, 0.05), 2.0);
  EXPECT_EQ(rsreg::winkler_score(-1.0, 1.0, 1.0, 0.05), 2.0);
  EXPECT_EQ(rsreg::winkler_score(-1.0, 1.0, 1.25, 0.05), 2.0 + 40.0 * 0.25);
  EXPECT_EQ(rsreg::winkler_score(-1.0, 1.0, -2.0, 0.05), 2.0 + 40.0 * 1.0);
  EXPECT_EQ(rsreg::winkler_score(0.0, 0.0, 5.0, 0.10), 20.0 * 5.0);
  EXPECT_THROW(rsreg::winkler_score(1.0, -1.0, 0.0, 0.05), rsreg::invalid_input);
  EXPECT_THROW(rsreg::winkler_score(-1.0, 1.0, 0.0, 0.0), rsreg::invalid_input);
  EXPECT_THROW(rsreg::winkler_score(-1.0, 1.0, 0.0, 1.0), rsreg::invalid_input);
}

TEST(WinklerScore, ProperlyPenalizesMiscalibratedIntervals) {
  auto gen = rsreg::substream(99, {0});
  const double z = rsreg::normal_quantile(0.975);
  double correct = 0.0, shifted = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    const double truth = rsreg::normal_draw(gen);
    correct += rsreg::winkler_score(-z, z, truth, 0.05);
    shifted += rsreg::winkler_score(-z + 1.0, z + 1.0, truth, 0.05);
  }
  EXPECT_LT(correct / reps, shifted / reps);
}

TEST(RunExperiment, SingleRepRowsAreBinary) {
  rsreg::ExperimentConfig cfg;
  cfg.n_set = {400};
  cfg.reps = 1;
  cfg.spec_grid = {rsreg::arma_spec(0.3, 0.4)};
  cfg.seed = 5;
  const auto rows = rsreg::run_experiment(cfg, 1);
  ASSERT_EQ(rows.size(), 3u);
  for (const rsreg::AggregateRow& row : rows) {
    EXPECT_EQ(row.n_errors, 0) << row.method;
    EXPECT_EQ(row.n_ok, 1);
    EXPECT_TRUE(row.cov_joint == 0.0 || row.cov_joint == 100.0);
    for (int j = 0; j < 4; ++j) {
      EXPECT_TRUE(row.cov_beta[j] == 0.0 || row.cov_beta[j] == 100.0);
      EXPECT_GT(row.winkler[j], 0.0);
    }
    EXPECT_TRUE(std::isfinite(row.log_volume));
  }
  EXPECT_TRUE(rows[0].has_branch);
  EXPECT_FALSE(rows[1].has_branch);
  EXPECT_FALSE(rows[2].has_branch);
  EXPECT_EQ(rows[0].method, "proposed");
  EXPECT_EQ(rows[1].method, "nw-hac");
  EXPECT_EQ(rows[2].method, "mac");
}

TEST(RunExperiment, AggregatesEqualReplicationMeans) {
  const rsreg::ExperimentConfig cfg = small_config();
  const auto rows = rsreg::run_experiment(cfg, 1);
  ASSERT_EQ(rows.size(), 2u);

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    double joint = 0.0;
    Eigen::Vector4d cov = Eigen::Vector4d::Zero(), wink = Eigen::Vector4d::Zero();
    double lv = 0.0;
    for (int r = 0; r < cfg.reps; ++r) {
      const std::uint64_t rep_seed =
          rsreg::derive_seed(cfg.seed, {0, 0, static_cast<std::uint64_t>(r)});
      const auto reps = rsreg::run_replication(250, cfg.spec_grid[0], rep_seed, cfg);
      ASSERT_TRUE(reps[mi].ok);
      joint += reps[mi].joint_covered;
      for (int j = 0; j < 4; ++j) {
        cov[j] += reps[mi].marginal_covered[j];
        wink[j] += reps[mi].winkler[j];
      }
      lv += reps[mi].log_volume;
    }
    EXPECT_EQ(rows[mi].cov_joint, joint * 100.0 / cfg.reps);
    for (int j = 0; j < 4; ++j) {
      EXPECT_EQ(rows[mi].cov_beta[j], cov[j] * 100.0 / cfg.reps);
      EXPECT_EQ(rows[mi].winkler[j], wink[j] / cfg.reps);
    }
    EXPECT_EQ(rows[mi].log_volume, lv / cfg.reps);
  }
}

TEST(RunExperiment, ByteIdenticalAcrossThreadCounts) {
  rsreg::ExperimentConfig cfg;
  cfg.n_set = {250};
  cfg.reps = 20;
  cfg.spec_grid = {rsreg::arma_spec(0.0, 0.0), rsreg::fgm_spec(0.15, 0.10)};
  cfg.seed = 77;
  const std::string serial = rsreg::experiment_csv(rsreg::run_experiment(cfg, 1));
  const std::string pooled = rsreg::experiment_csv(rsreg::run_experiment(cfg, 4));
  EXPECT_EQ(serial, pooled);
  EXPECT_EQ(serial, rsreg::experiment_csv(rsreg::run_experiment(cfg, 2)));

  cfg.seed = 78;
  EXPECT_NE(serial, rsreg::experiment_csv(rsreg::run_experiment(cfg, 1)));
}

TEST(RunExperiment, MethodErrorsAreRecordedNotThrown) {
  rsreg::ExperimentConfig cfg;
  cfg.n_set = {80};  // mac_cov requires n >= 100
  cfg.reps = 5;
  cfg.spec_grid = {rsreg::arma_spec(0.3, 0.4)};
  cfg.seed = 9;
  const auto rows = rsreg::run_experiment(cfg, 1);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].n_errors, 0);
  EXPECT_EQ(rows[1].n_errors, 0);
  EXPECT_EQ(rows[2].n_errors, 5);
  EXPECT_EQ(rows[2].n_ok, 0);
  const std::string csv = rsreg::experiment_csv(rows);
  EXPECT_NE(csv.find(",na,na,na"), std::string::npos);
  EXPECT_NE(csv.find(",5\n"), std::string::npos);

  const auto reps = rsreg::run_replication(80, cfg.spec_grid[0],
                                           rsreg::derive_seed(9, {0, 0, 0}), cfg);
  EXPECT_FALSE(reps[2].ok);
  EXPECT_NE(reps[2].error.find("mac_cov"), std::string::npos);
}

TEST(RunExperiment, ValidatesConfig) {
  rsreg::ExperimentConfig cfg = small_config();
  cfg.n_set.clear();
  EXPECT_THROW(rsreg::run_experiment(cfg, 1), rsreg::invalid_input);
  cfg = small_config();
  cfg.reps = 0;
  EXPECT_THROW(rsreg::run_experiment(cfg, 1), rsreg::invalid_input);
  cfg = small_config();
  cfg.alpha = 1.0;
  EXPECT_THROW(rsreg::run_experiment(cfg, 1), rsreg::invalid_input);
  cfg = small_config();
  cfg.methods.clear();
  EXPECT_THROW(rsreg::run_experiment(cfg, 1), rsreg::invalid_input);
  cfg = small_config();
  cfg.spec_grid.clear();
  EXPECT_THROW(rsreg::run_experiment(cfg, 1), rsreg::invalid_input);
  cfg = small_config();
  cfg.true_beta = VectorXd::Ones(3);
  EXPECT_THROW(rsreg::run_experiment(cfg, 1), rsreg::invalid_input);
  cfg = small_config();
  cfg.spec_grid = {rsreg::arfima_spec(0.7)};
  EXPECT_THROW(rsreg::run_experiment(cfg, 1), rsreg::invalid_input);
}

TEST(Sweep, DefaultGridShapes) {
  EXPECT_EQ(rsreg::default_sweep_grid(rsreg::SweepAxis::arma_grid).size(), 9u);
  EXPECT_EQ(rsreg::default_sweep_grid(rsreg::SweepAxis::fgm_grid).size(), 8u);
  EXPECT_EQ(rsreg::default_sweep_grid(rsreg::SweepAxis::arfima_d).size(), 4u);
  EXPECT_EQ(rsreg::default_sweep_grid(rsreg::SweepAxis::fgn_h).size(), 4u);
  for (auto axis : {rsreg::SweepAxis::arma_grid, rsreg::SweepAxis::fgm_grid,
                    rsreg::SweepAxis::arfima_d, rsreg::SweepAxis::fgn_h})
    for (const auto& spec : rsreg::default_sweep_grid(axis, rsreg::Margin::standardized_t5)) {
      EXPECT_NO_THROW(rsreg::validate(spec));
      EXPECT_EQ(rsreg::margin_name(spec), "t5");
    }
  EXPECT_EQ(rsreg::sweep_axis_from_name("arfima_d"), rsreg::SweepAxis::arfima_d);
  EXPECT_THROW(rsreg::sweep_axis_from_name("bogus"), rsreg::invalid_input);
}

TEST(Sweep, MatchesRunExperimentOnTheSameGrid) {
  rsreg::ExperimentConfig cfg;
  cfg.n_set = {100};
  cfg.reps = 2;
  cfg.methods = {rsreg::Method::proposed};
  cfg.seed = 12;
  cfg.spec_grid = {rsreg::arma_spec(0.9, 0.9)};  // overwritten by sweep

  const auto swept = rsreg::sweep(rsreg::SweepAxis::arfima_d, cfg, rsreg::Margin::gaussian, 1);
  ASSERT_EQ(swept.size(), 4u);
  const double d_vals[] = {0.15, 0.25, 0.35, 0.45};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(swept[i].model, "arfima");
    EXPECT_EQ(swept[i].param1, d_vals[i]);
    EXPECT_EQ(swept[i].n, 100);
  }

  cfg.spec_grid = rsreg::default_sweep_grid(rsreg::SweepAxis::arfima_d);
  EXPECT_EQ(rsreg::experiment_csv(rsreg::run_experiment(cfg, 1)),
            rsreg::experiment_csv(swept));
}

TEST(Sweep, CsvSchemaHeader) {
  rsreg::ExperimentConfig cfg;
  cfg.n_set = {120};
  cfg.reps = 1;
  cfg.methods = {rsreg::Method::proposed};
  cfg.spec_grid = {rsreg::fgn_spec(0.8)};
  cfg.seed = 2;
  const std::string csv = rsreg::experiment_csv(rsreg::run_experiment(cfg, 1));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,param1,param2,margin,n,method,cov_b0,cov_b1,cov_b2,cov_b3,"
            "wink_b0,wink_b1,wink_b2,wink_b3,cov_joint,log_vol,"
            "branch_longmem_frac,trunc_frac,n_errors");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_NE(csv.find("fgn,0.8,0,gaussian,120,proposed,"), std::string::npos);
}

TEST(Harness, IidShortRunCoverageIsSane) {
  rsreg::ExperimentConfig cfg;
  cfg.n_set = {400};
  cfg.reps = 80;
  cfg.methods = {rsreg::Method::proposed};
  cfg.spec_grid = {rsreg::arma_spec(0.0, 0.0)};
  cfg.seed = 4242;
  const auto rows = rsreg::run_experiment(cfg, 1);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_GE(rows[0].cov_joint, 85.0);
  EXPECT_LE(rows[0].cov_joint, 100.0);
  EXPECT_LT(rows[0].branch_longmem_frac, 0.2);
  EXPECT_LT(rows[0].trunc_frac, 0.2);
  EXPECT_LT(rows[0].log_volume, 0.0);
  for (int j = 0; j < 4; ++j) {
    EXPECT_GT(rows[0].winkler[j], 0.0);
    EXPECT_LT(rows[0].winkler[j], 10.0);
  }
}

TEST(CalibrateGrid, ValidatesInputs) {
  const std::vector<double> d{0.35}, c{5.0, 7.0};
  const std::vector<int> n{120};
  EXPECT_THROW(rsreg::calibrate_grid({}, c, n, 3, 0.05, 1), rsreg::invalid_input);
  EXPECT_THROW(rsreg::calibrate_grid(d, {}, n, 3, 0.05, 1), rsreg::invalid_input);
  EXPECT_THROW(rsreg::calibrate_grid(d, c, {}, 3, 0.05, 1), rsreg::invalid_input);
  EXPECT_THROW(rsreg::calibrate_grid(d, c, n, 0, 0.05, 1), rsreg::invalid_input);
  EXPECT_THROW(rsreg::calibrate_grid(d, c, n, 3, 0.0, 1), rsreg::invalid_input);
  EXPECT_THROW(rsreg::calibrate_grid({0.55}, c, n, 3, 0.05, 1), rsreg::invalid_input);
  EXPECT_THROW(rsreg::calibrate_grid({0.35, 0.2}, c, n, 3, 0.05, 1), rsreg::invalid_input);
  EXPECT_THROW(rsreg::calibrate_grid(d, {0.0, 7.0}, n, 3, 0.05, 1), rsreg::invalid_input);
  EXPECT_THROW(rsreg::calibrate_grid(d, c, {10}, 3, 0.05, 1), rsreg::invalid_input);
}

TEST(CalibrateGrid, SingleCandidateMapsEveryD) {
  const rsreg::CalibrationGrid grid =
      rsreg::calibrate_grid({0.2, 0.4}, {7.0}, {120}, 3, 0.05, 21);
  ASSERT_EQ(grid.d.size(), 2u);
  EXPECT_EQ(grid.c[0], 7.0);
  EXPECT_EQ(grid.c[1], 7.0);
  EXPECT_NO_THROW(rsreg::validate(grid));
}

TEST(CalibrateGrid, DeterministicAcrossThreadCounts) {
  const std::vector<double> d{0.3}, c{5.0, 9.0};
  const std::vector<int> n{150};
  const auto a = rsreg::calibrate_grid_detailed(d, c, n, 12, 0.05, 33,
                                                rsreg::Margin::gaussian,
                                                rsreg::default_true_beta(), 1);
  const auto b = rsreg::calibrate_grid_detailed(d, c, n, 12, 0.05, 33,
                                                rsreg::Margin::gaussian,
                                                rsreg::default_true_beta(), 3);
  EXPECT_EQ(a.grid.c, b.grid.c);
  EXPECT_EQ(a.max_dev, b.max_dev);
  EXPECT_EQ(a.mean_log_volume, b.mean_log_volume);
}

TEST(CalibrateGrid, PicksCandidateWithSmallerCoverageDeviation) {
  const auto t = rsreg::calibrate_grid_detailed({0.25}, {1.0, 8.0}, {150}, 30, 0.05, 34);
  ASSERT_LT(t.max_dev(0, 1), t.max_dev(0, 0));
  EXPECT_EQ(t.grid.c[0], 8.0);
}

TEST(CalibrateGrid, TieBreaksTowardSmallerVolume) {
  const auto t = rsreg::calibrate_grid_detailed({0.3}, {6.0, 9.0}, {150}, 5, 0.05, 52);
  ASSERT_EQ(t.max_dev(0, 0), t.max_dev(0, 1));  // genuine coverage tie
  ASSERT_LT(t.mean_log_volume(0, 1), t.mean_log_volume(0, 0));
  EXPECT_EQ(t.grid.c[0], 9.0);
}

TEST(CalibrateGrid, GridRoundTripsThroughCsv) {
  const rsreg::CalibrationGrid grid =
      rsreg::calibrate_grid({0.15, 0.35}, {5.0, 7.0}, {120}, 4, 0.05, 3);
  const std::string path = "/tmp/rsreg_calibrated_grid.csv";
  rsreg::save_grid_csv(grid, path);
  const rsreg::CalibrationGrid loaded = rsreg::load_grid_csv(path);
  EXPECT_EQ(grid.d, loaded.d);
  EXPECT_EQ(grid.c, loaded.c);
  std::remove(path.c_str());
}

}  // namespace
