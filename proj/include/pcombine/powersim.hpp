#pragma once

// Power / type-I simulation harness (Gaussian mean model) and the empirical
// Bahadur-slope estimator.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcombine/nulldist.hpp"

namespace pcombine {

enum class Sidedness { TwoSided, OneSided };

std::string sidedness_name(Sidedness s);

struct SimScenario {
  int K = 10;
  int ell = 1;            // number of signal studies (means mu0, the rest 0)
  double mu0 = 1.0;
  double alpha = 0.05;
  Sidedness sidedness = Sidedness::TwoSided;
  std::int64_t reps = 10000;
  std::uint64_t seed = 20240817ull;
};

struct PowerEstimate {
  SimScenario scenario;
  MethodSpec method;
  double power = 0.0;
  double mc_se = 0.0;  // sqrt(power (1-power) / reps)
};

// p-value triple from a z vector: two-sided 2(1-Phi(|z|)), left 1-Phi(z),
// right Phi(z). Any output pointer may be null.
void pvalues_from_z(const std::vector<double>& z, std::vector<double>* p_two,
                    std::vector<double>* p_left, std::vector<double>* p_right);

// X ~ N(mu, I_K) with mu_i = mu0 for i < ell; deterministic in
// (seed, replicate).
void gen_gaussian_pvalues(const SimScenario& sc, std::int64_t replicate,
                          std::vector<double>* p_two,
                          std::vector<double>* p_left,
                          std::vector<double>* p_right);

PowerEstimate estimate_power(const Combiner& comb, const SimScenario& sc);

// Every method evaluated on the same draws (paired comparisons).
std::vector<PowerEstimate> estimate_power_multi(
    const std::vector<const Combiner*>& combs, const SimScenario& sc);

// Null rejection rate through the method's own p-value path.
double estimate_type1(const MethodSpec& spec, int K, double alpha,
                      std::int64_t reps, std::uint64_t seed,
                      TableProvider& provider);
// Shared null draws, one rate per alpha.
std::vector<double> estimate_type1_multialpha(const Combiner& comb,
                                              const std::vector<double>& alphas,
                                              std::int64_t reps,
                                              std::uint64_t seed);

struct GridCell {
  int K = 0;
  double ell_frac = 0.0;
  int ell = 0;
  double mu0 = 0.0;  // value selected by the power-target rule
  std::vector<PowerEstimate> estimates;
};

struct GridResult {
  std::vector<GridCell> cells;
};

// mu0 candidates 0.5, 0.65, ..., 5.0.
std::vector<double> default_mu0_grid();

// Full factorial sweep over K_list x ell_fracs. For each cell the smallest
// grid mu0 whose best-method power reaches power_target is selected (the
// last grid point if none does); fixed_mu0 skips the search.
GridResult run_power_grid(const std::vector<MethodSpec>& methods,
                          const std::vector<int>& K_list,
                          const std::vector<double>& ell_fracs,
                          double power_target, double alpha,
                          Sidedness sidedness, std::int64_t reps,
                          std::uint64_t seed, TableProvider& provider,
                          const std::vector<double>& mu0_grid = {},
                          std::optional<double> fixed_mu0 = std::nullopt);

void write_power_csv(const GridResult& grid, const std::string& path);

// --- Bahadur slopes ---------------------------------------------------------

enum class SlopeTest { ZTest, FisherCombined, StoufferCombined };

SlopeTest slope_test_from_name(const std::string& name);
std::string slope_test_name(SlopeTest t);

struct SlopeConfig {
  SlopeTest test = SlopeTest::ZTest;
  double theta = 1.0;
  // Per-study sample-size ratios: study i gets n_i = lambdas[i] * n.
  std::vector<double> lambdas = {1.0};
  int ell = 1;  // studies 0..ell-1 carry mean theta, the rest 0
  std::vector<std::int64_t> n_grid = {100, 1000, 10000};
  std::int64_t reps = 200;
  std::uint64_t seed = 20240817ull;
};

struct SlopeTrace {
  SlopeConfig config;
  std::vector<double> slope_estimates;  // mean of -(2/n) ln p, one per n
  std::vector<double> slope_se;         // standard error of that mean
  double c_theory = 0.0;
};

// Everything runs on log-scale survival functions: p underflows double
// precision from n ~ 10^3 on.
SlopeTrace estimate_exact_slope(const SlopeConfig& cfg);

void write_slope_csv(const std::vector<SlopeTrace>& traces,
                     const std::string& path);

// --- AFp signal-selection consistency ----------------------------------------

struct ConsistencyConfig {
  int K = 10;
  int ell = 3;
  double mu = 1.0;
  std::vector<std::int64_t> n_grid = {100, 1000, 10000};
  std::int64_t reps = 1000;
  std::uint64_t seed = 20240817ull;
};

// Fraction of replicates whose AFp-selected weight vector equals the true
// signal indicator, one rate per n.
std::vector<double> afp_consistency_check(const ConsistencyConfig& cfg);

}  // namespace pcombine
