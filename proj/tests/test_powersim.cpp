#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pcombine/nulldist.hpp"
#include "pcombine/powersim.hpp"

using namespace pcombine;
using doctest::Approx;

TEST_CASE("powersim: p-value triples from z-scores") {
  std::vector<double> p2, pl, pr;
  pvalues_from_z({0.0, 1.5, -2.0}, &p2, &pl, &pr);
  CHECK(p2[0] == 1.0);
  CHECK(pl[0] == 0.5);
  CHECK(pr[0] == 0.5);
  // left + right partition the line
  for (size_t i = 0; i < 3; ++i) CHECK(pl[i] + pr[i] == Approx(1.0).epsilon(1e-12));
  // positive z: small left tail, two-sided doubles the smaller side
  CHECK(pl[1] < 0.1);
  CHECK(p2[1] == Approx(2.0 * pl[1]).epsilon(1e-12));
  CHECK(p2[2] == Approx(2.0 * pr[2]).epsilon(1e-12));
  // null output pointers are allowed
  pvalues_from_z({1.0}, nullptr, &pl, nullptr);
  CHECK(pl.size() == 1);
}

TEST_CASE("powersim: null draws are uniform") {
  SimScenario sc;
  sc.K = 1;
  sc.ell = 0;
  sc.mu0 = 0.0;
  const int R = 10000;
  std::vector<double> p2, pl;
  std::vector<double> u2, ul;
  u2.reserve(R);
  for (int r = 0; r < R; ++r) {
    gen_gaussian_pvalues(sc, r, &p2, &pl, nullptr);
    u2.push_back(p2[0]);
    ul.push_back(pl[0]);
  }
  auto ks = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
      d = std::max(d, std::fabs((i + 1) / n - v[i]));
      d = std::max(d, std::fabs(v[i] - i / n));
    }
    return d;
  };
  // 1% critical value of the KS statistic is ~1.63/sqrt(n)
  CHECK(ks(u2) < 1.63 / std::sqrt(static_cast<double>(R)));
  CHECK(ks(ul) < 1.63 / std::sqrt(static_cast<double>(R)));

  // deterministic in (seed, replicate)
  std::vector<double> a, b;
  gen_gaussian_pvalues(sc, 17, &a, nullptr, nullptr);
  gen_gaussian_pvalues(sc, 17, &b, nullptr, nullptr);
  CHECK(a == b);
}

TEST_CASE("powersim: power at mu0 = 0 equals the nominal level") {
  CalibrationOptions opt;
  TableProvider prov(opt);
  const Combiner fisher(make_spec(Method::Fisher), 5, prov);

  SimScenario sc;
  sc.K = 5;
  sc.ell = 0;
  sc.mu0 = 0.0;
  sc.alpha = 0.05;
  sc.reps = 20000;
  const auto est = estimate_power(fisher, sc);
  CHECK(std::fabs(est.power - 0.05) <= 4.0 * est.mc_se);
  CHECK(est.mc_se ==
        Approx(std::sqrt(est.power * (1.0 - est.power) / sc.reps))
            .epsilon(1e-12));
}

TEST_CASE("powersim: strong signal saturates power") {
  CalibrationOptions opt;
  TableProvider prov(opt);
  const Combiner fisher(make_spec(Method::Fisher), 10, prov);
  SimScenario sc;
  sc.K = 10;
  sc.ell = 10;
  sc.mu0 = 3.0;
  sc.alpha = 0.05;
  sc.reps = 2000;
  CHECK(estimate_power(fisher, sc).power >= 0.999);
}

TEST_CASE("powersim: paired multi-method estimates share draws") {
  CalibrationOptions opt;
  opt.B = 20000;
  TableProvider prov(opt);
  const Combiner fisher(make_spec(Method::Fisher), 10, prov);
  const Combiner afp(make_spec(Method::AFp), 10, prov);

  SimScenario sc;
  sc.K = 10;
  sc.ell = 1;
  sc.mu0 = 3.5;
  sc.alpha = 0.05;
  sc.reps = 4000;
  const auto ests = estimate_power_multi({&fisher, &afp}, sc);
  REQUIRE(ests.size() == 2);
  // one sparse strong signal: the adaptive scan beats plain Fisher
  CHECK(ests[1].power >= ests[0].power - 0.02);
  CHECK(ests[0].power > 0.1);
  CHECK(ests[1].power < 1.0);

  // multi deterministic: rerun reproduces exactly
  const auto again = estimate_power_multi({&fisher, &afp}, sc);
  CHECK(again[0].power == ests[0].power);
  CHECK(again[1].power == ests[1].power);
}

TEST_CASE("powersim: scenario guards") {
  CalibrationOptions opt;
  TableProvider prov(opt);
  const Combiner fisher(make_spec(Method::Fisher), 5, prov);
  SimScenario sc;
  sc.K = 5;
  sc.reps = 100;  // too few
  CHECK_THROWS_AS(estimate_power(fisher, sc), GuardError);
  sc.reps = 2000;
  sc.ell = 6;  // more signals than studies
  CHECK_THROWS_AS(estimate_power(fisher, sc), UsageError);
  sc.ell = 1;
  sc.K = 4;  // combiner is bound to K=5
  CHECK_THROWS_AS(estimate_power(fisher, sc), UsageError);

  CHECK_THROWS_AS(
      estimate_type1_multialpha(fisher, {0.001}, 2000, 1),  // reps*alpha = 2
      GuardError);
}

TEST_CASE("powersim: type-i rates through the p-value path") {
  CalibrationOptions opt;
  opt.B = 20000;
  TableProvider prov(opt);
  const Combiner fisher(make_spec(Method::Fisher), 5, prov);
  const auto rates = estimate_type1_multialpha(fisher, {0.01, 0.05}, 20000, 9);
  REQUIRE(rates.size() == 2);
  CHECK(std::fabs(rates[0] - 0.01) <= 4.0 * std::sqrt(0.01 * 0.99 / 20000.0));
  CHECK(std::fabs(rates[1] - 0.05) <= 4.0 * std::sqrt(0.05 * 0.95 / 20000.0));
}

TEST_CASE("powersim: grid sweep picks the smallest mu0 reaching the target") {
  CalibrationOptions opt;
  opt.B = 20000;
  TableProvider prov(opt);
  std::vector<MethodSpec> methods{make_spec(Method::Fisher),
                                  make_spec(Method::Stouffer)};
  const auto grid =
      run_power_grid(methods, {4, 8}, {0.25, 0.5}, 0.5, 0.05,
                     Sidedness::TwoSided, 2000, 31, prov);
  REQUIRE(grid.cells.size() == 4);
  for (const auto& cell : grid.cells) {
    CHECK(cell.ell == std::max(1, static_cast<int>(std::lround(
                                      cell.ell_frac * cell.K))));
    REQUIRE(cell.estimates.size() == 2);
    double best = 0.0;
    for (const auto& e : cell.estimates) best = std::max(best, e.power);
    // the selected mu0 reaches the target unless the grid topped out
    if (cell.mu0 < 4.99) CHECK(best >= 0.5 - 2.0 * 0.012);
  }
  // fixed mu0 bypasses the search
  const auto fixed =
      run_power_grid(methods, {4}, {0.25}, 0.5, 0.05, Sidedness::TwoSided,
                     2000, 31, prov, {}, 1.75);
  CHECK(fixed.cells[0].mu0 == 1.75);

  // csv writer emits one row per method per cell
  const auto dir = std::filesystem::temp_directory_path() / "pcombine_pwr";
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "power.csv").string();
  write_power_csv(grid, csv);
  std::ifstream f(csv);
  std::string line;
  std::getline(f, line);
  CHECK(line == "method,K,ell,mu0,alpha,sidedness,reps,power,mc_se,seed");
  int rows = 0;
  while (std::getline(f, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 8);
  std::filesystem::remove_all(dir);
}

TEST_CASE("powersim: bahadur slope of the one-sample z-test") {
  SlopeConfig cfg;
  cfg.test = SlopeTest::ZTest;
  cfg.theta = 1.5;
  cfg.n_grid = {100, 1000, 10000};
  cfg.reps = 200;
  const auto tr = estimate_exact_slope(cfg);
  CHECK(tr.c_theory == 2.25);
  REQUIRE(tr.slope_estimates.size() == 3);
  REQUIRE(tr.slope_se.size() == 3);
  // converges onto theta^2
  CHECK(std::fabs(tr.slope_estimates[2] - 2.25) < 0.1);
  // estimates tighten with n
  CHECK(std::fabs(tr.slope_estimates[2] - 2.25) <
        std::fabs(tr.slope_estimates[0] - 2.25) + 0.05);

  // null case: slope collapses to zero
  SlopeConfig null_cfg;
  null_cfg.theta = 0.0;
  null_cfg.reps = 200;
  const auto tn = estimate_exact_slope(null_cfg);
  CHECK(std::fabs(tn.slope_estimates[2]) < 0.05);
}

TEST_CASE("powersim: combined-test slope theory constants") {
  SlopeConfig cfg;
  cfg.test = SlopeTest::FisherCombined;
  cfg.theta = 1.0;
  cfg.lambdas = {1.0, 1.0, 1.0, 1.0, 1.0};
  cfg.ell = 2;
  cfg.reps = 100;
  cfg.n_grid = {100, 1000, 10000};
  const auto fisher = estimate_exact_slope(cfg);
  CHECK(fisher.c_theory == Approx(2.0).epsilon(1e-12));

  cfg.test = SlopeTest::StoufferCombined;
  const auto stouffer = estimate_exact_slope(cfg);
  CHECK(stouffer.c_theory == Approx(0.8).epsilon(1e-12));

  // unequal allocation changes the constants accordingly
  cfg.test = SlopeTest::FisherCombined;
  cfg.lambdas = {2.0, 0.5, 1.0};
  cfg.ell = 2;
  const auto uneven = estimate_exact_slope(cfg);
  CHECK(uneven.c_theory == Approx(2.5).epsilon(1e-12));

  // estimated ordering matches theory at the largest n
  CHECK(fisher.slope_estimates[2] > stouffer.slope_estimates[2]);

  // config validation
  SlopeConfig bad;
  bad.test = SlopeTest::ZTest;
  bad.lambdas = {1.0, 1.0};
  CHECK_THROWS_AS(estimate_exact_slope(bad), UsageError);
  bad = SlopeConfig{};
  bad.n_grid = {100, 100};
  CHECK_THROWS_AS(estimate_exact_slope(bad), UsageError);
  bad = SlopeConfig{};
  bad.lambdas = {0.0};
  CHECK_THROWS_AS(estimate_exact_slope(bad), UsageError);

  // name round trips
  for (auto t : {SlopeTest::ZTest, SlopeTest::FisherCombined,
                 SlopeTest::StoufferCombined})
    CHECK(slope_test_from_name(slope_test_name(t)) == t);
  CHECK_THROWS_AS(slope_test_from_name("what"), UsageError);
}

TEST_CASE("powersim: slope csv layout") {
  SlopeConfig cfg;
  cfg.theta = 1.0;
  cfg.reps = 50;
  cfg.n_grid = {100, 1000};
  const auto tr = estimate_exact_slope(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "pcombine_slope";
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "slope.csv").string();
  write_slope_csv({tr}, csv);
  std::ifstream f(csv);
  std::string line;
  std::getline(f, line);
  CHECK(line == "test,theta,n,slope_estimate,c_theory");
  int rows = 0;
  while (std::getline(f, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("powersim: afp selection consistency rises with n") {
  // ell == K with a strong signal: selecting everything is easy
  ConsistencyConfig cfg;
  cfg.K = 5;
  cfg.ell = 5;
  cfg.mu = 2.0;
  cfg.n_grid = {10000};
  cfg.reps = 1000;
  const auto rates = afp_consistency_check(cfg);
  REQUIRE(rates.size() == 1);
  CHECK(rates[0] >= 0.95);
  CHECK(rates[0] <= 1.0);
}
