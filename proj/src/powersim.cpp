#include "pcombine/powersim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pcombine/special.hpp"

namespace pcombine {

namespace {
constexpr std::uint32_t kStreamConsistency = 5;
}

std::string sidedness_name(Sidedness s) {
  return s == Sidedness::TwoSided ? "two-sided" : "one-sided";
}

void pvalues_from_z(const std::vector<double>& z, std::vector<double>* p_two,
                    std::vector<double>* p_left, std::vector<double>* p_right) {
  const size_t K = z.size();
  if (p_two) p_two->resize(K);
  if (p_left) p_left->resize(K);
  if (p_right) p_right->resize(K);
  for (size_t i = 0; i < K; ++i) {
    if (p_two) (*p_two)[i] = 2.0 * special::normal_sf(std::fabs(z[i]));
    if (p_left) (*p_left)[i] = special::normal_sf(z[i]);
    if (p_right) (*p_right)[i] = special::normal_cdf(z[i]);
  }
}

void gen_gaussian_pvalues(const SimScenario& sc, std::int64_t replicate,
                          std::vector<double>* p_two,
                          std::vector<double>* p_left,
                          std::vector<double>* p_right) {
  CounterRng rng(sc.seed, static_cast<std::uint64_t>(replicate), kStreamSim);
  std::vector<double> z(sc.K);
  for (int i = 0; i < sc.K; ++i)
    z[i] = (i < sc.ell ? sc.mu0 : 0.0) + rng.normal();
  pvalues_from_z(z, p_two, p_left, p_right);
}

PowerEstimate estimate_power(const Combiner& comb, const SimScenario& sc) {
  std::vector<const Combiner*> one = {&comb};
  return estimate_power_multi(one, sc)[0];
}

std::vector<PowerEstimate> estimate_power_multi(
    const std::vector<const Combiner*>& combs, const SimScenario& sc) {
  if (sc.ell < 0 || sc.ell > sc.K) throw UsageError("need 0 <= ell <= K");
  if (sc.reps < 1000) throw GuardError("power estimation needs reps >= 1000");
  std::vector<double> crit(combs.size());
  for (size_t c = 0; c < combs.size(); ++c) {
    if (combs[c]->K() != sc.K)
      throw UsageError("combiner K does not match the scenario");
    if (combs[c]->pair_input() && sc.sidedness != Sidedness::OneSided)
      throw UsageError(method_name(combs[c]->spec().method) +
                       " needs a one-sided scenario");
    crit[c] = combs[c]->critical_stat(sc.alpha);
  }
  const bool need_pairs = sc.sidedness == Sidedness::OneSided;
  std::vector<std::int64_t> hits(combs.size(), 0);
  std::vector<double> p2, pl, pr;
  for (std::int64_t r = 0; r < sc.reps; ++r) {
    gen_gaussian_pvalues(sc, r, &p2, need_pairs ? &pl : nullptr,
                         need_pairs ? &pr : nullptr);
    for (size_t c = 0; c < combs.size(); ++c) {
      const double stat = combs[c]->pair_input()
                              ? combs[c]->statistic_pair(pl, pr)
                              : combs[c]->statistic(p2);
      if (combs[c]->rejects_stat(stat, crit[c])) ++hits[c];
    }
  }
  std::vector<PowerEstimate> out(combs.size());
  for (size_t c = 0; c < combs.size(); ++c) {
    out[c].scenario = sc;
    out[c].method = combs[c]->spec();
    out[c].power = static_cast<double>(hits[c]) / static_cast<double>(sc.reps);
    out[c].mc_se = std::sqrt(out[c].power * (1.0 - out[c].power) /
                             static_cast<double>(sc.reps));
  }
  return out;
}

double estimate_type1(const MethodSpec& spec, int K, double alpha,
                      std::int64_t reps, std::uint64_t seed,
                      TableProvider& provider) {
  Combiner comb(spec, K, provider);
  return estimate_type1_multialpha(comb, {alpha}, reps, seed)[0];
}

std::vector<double> estimate_type1_multialpha(const Combiner& comb,
                                              const std::vector<double>& alphas,
                                              std::int64_t reps,
                                              std::uint64_t seed) {
  for (double a : alphas)
    if (static_cast<double>(reps) * a < 100.0)
      throw GuardError("type-I estimation needs reps*alpha >= 100");
  SimScenario sc;
  sc.K = comb.K();
  sc.ell = 0;
  sc.mu0 = 0.0;
  sc.reps = reps;
  sc.seed = seed;
  sc.sidedness = comb.pair_input() ? Sidedness::OneSided : Sidedness::TwoSided;
  const bool pairs = comb.pair_input();
  std::vector<std::int64_t> hits(alphas.size(), 0);
  std::vector<double> p2, pl, pr;
  for (std::int64_t r = 0; r < reps; ++r) {
    gen_gaussian_pvalues(sc, r, &p2, pairs ? &pl : nullptr,
                         pairs ? &pr : nullptr);
    const double stat =
        pairs ? comb.statistic_pair(pl, pr) : comb.statistic(p2);
    const double p = comb.pvalue_of_stat(stat);
    for (size_t a = 0; a < alphas.size(); ++a)
      if (p <= alphas[a]) ++hits[a];
  }
  std::vector<double> out(alphas.size());
  for (size_t a = 0; a < alphas.size(); ++a)
    out[a] = static_cast<double>(hits[a]) / static_cast<double>(reps);
  return out;
}

std::vector<double> default_mu0_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 30; ++k) g.push_back(0.5 + 0.15 * k);
  return g;
}

GridResult run_power_grid(const std::vector<MethodSpec>& methods,
                          const std::vector<int>& K_list,
                          const std::vector<double>& ell_fracs,
                          double power_target, double alpha,
                          Sidedness sidedness, std::int64_t reps,
                          std::uint64_t seed, TableProvider& provider,
                          const std::vector<double>& mu0_grid,
                          std::optional<double> fixed_mu0) {
  const std::vector<double> grid =
      mu0_grid.empty() ? default_mu0_grid() : mu0_grid;
  GridResult out;
  for (int K : K_list) {
    std::vector<Combiner> combs;
    combs.reserve(methods.size());
    for (const auto& m : methods) combs.emplace_back(m, K, provider);
    std::vector<const Combiner*> cptr;
    for (const auto& c : combs) cptr.push_back(&c);
    for (double frac : ell_fracs) {
      GridCell cell;
      cell.K = K;
      cell.ell_frac = frac;
      cell.ell = std::max(1, static_cast<int>(std::llround(frac * K)));
      if (cell.ell > K) cell.ell = K;
      SimScenario sc;
      sc.K = K;
      sc.ell = cell.ell;
      sc.alpha = alpha;
      sc.sidedness = sidedness;
      sc.reps = reps;
      sc.seed = seed;
      if (fixed_mu0) {
        sc.mu0 = *fixed_mu0;
        cell.mu0 = sc.mu0;
        cell.estimates = estimate_power_multi(cptr, sc);
      } else {
        for (size_t g = 0; g < grid.size(); ++g) {
          sc.mu0 = grid[g];
          cell.mu0 = sc.mu0;
          cell.estimates = estimate_power_multi(cptr, sc);
          double best = 0.0;
          for (const auto& e : cell.estimates) best = std::max(best, e.power);
          if (best >= power_target) break;
        }
      }
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

void write_power_csv(const GridResult& grid, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f << "method,K,ell,mu0,alpha,sidedness,reps,power,mc_se,seed\n";
  char buf[256];
  for (const auto& cell : grid.cells) {
    for (const auto& e : cell.estimates) {
      std::snprintf(buf, sizeof buf, "%s,%d,%d,%g,%g,%s,%lld,%.6f,%.6f,%llu\n",
                    method_id(e.method).c_str(), cell.K, cell.ell, cell.mu0,
                    e.scenario.alpha,
                    sidedness_name(e.scenario.sidedness).c_str(),
                    static_cast<long long>(e.scenario.reps), e.power, e.mc_se,
                    static_cast<unsigned long long>(e.scenario.seed));
      f << buf;
    }
  }
}

// --- slopes -------------------------------------------------------------------

SlopeTest slope_test_from_name(const std::string& name) {
  if (name == "ztest") return SlopeTest::ZTest;
  if (name == "fisher") return SlopeTest::FisherCombined;
  if (name == "stouffer") return SlopeTest::StoufferCombined;
  throw UsageError("unknown slope test: " + name);
}

std::string slope_test_name(SlopeTest t) {
  switch (t) {
    case SlopeTest::ZTest: return "ztest";
    case SlopeTest::FisherCombined: return "fisher";
    case SlopeTest::StoufferCombined: return "stouffer";
  }
  return "?";
}

SlopeTrace estimate_exact_slope(const SlopeConfig& cfg) {
  const int K = static_cast<int>(cfg.lambdas.size());
  if (K < 1) throw UsageError("slope estimation needs at least one study");
  if (cfg.ell < 0 || cfg.ell > K) throw UsageError("need 0 <= ell <= K");
  if (cfg.test == SlopeTest::ZTest && K != 1)
    throw UsageError("ztest slope uses a single study (one lambda)");
  for (double l : cfg.lambdas)
    if (!(l > 0.0)) throw UsageError("lambdas must be positive");
  for (size_t i = 1; i < cfg.n_grid.size(); ++i)
    if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
      throw UsageError("n_grid must be strictly increasing");

  SlopeTrace tr;
  tr.config = cfg;
  switch (cfg.test) {
    case SlopeTest::ZTest:
      tr.c_theory = cfg.theta * cfg.theta;
      break;
    case SlopeTest::FisherCombined: {
      double c = 0.0;
      for (int i = 0; i < cfg.ell; ++i)
        c += cfg.lambdas[i] * cfg.theta * cfg.theta;
      tr.c_theory = c;
      break;
    }
    case SlopeTest::StoufferCombined: {
      double s = 0.0;
      for (int i = 0; i < cfg.ell; ++i)
        s += std::sqrt(cfg.lambdas[i] * cfg.theta * cfg.theta);
      tr.c_theory = s * s / K;
      break;
    }
  }

  tr.slope_estimates.assign(cfg.n_grid.size(), 0.0);
  std::vector<double> sumsq(cfg.n_grid.size(), 0.0);
  std::vector<double> eps(K);
  for (std::int64_t r = 0; r < cfg.reps; ++r) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(r), kStreamSlope);
    for (int i = 0; i < K; ++i) eps[i] = rng.normal();  // shared across n
    for (size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
      const double n = static_cast<double>(cfg.n_grid[gi]);
      double log_p;
      if (cfg.test == SlopeTest::ZTest) {
        const double z = std::sqrt(n) * cfg.theta + eps[0];
        log_p = special::log_normal_sf(z);
      } else {
        double fisher = 0.0;  // -2 sum log p_i
        double zsum = 0.0;
        for (int i = 0; i < K; ++i) {
          const double mean = i < cfg.ell ? cfg.theta : 0.0;
          const double z = std::sqrt(cfg.lambdas[i] * n) * mean + eps[i];
          const double lp = special::log_normal_sf(z);
          if (cfg.test == SlopeTest::FisherCombined)
            fisher -= 2.0 * lp;
          else
            zsum += special::normal_quantile_from_log_sf(lp);
        }
        if (cfg.test == SlopeTest::FisherCombined)
          log_p = special::chi2_logsf(fisher, 2.0 * K);
        else
          log_p = special::log_normal_sf(zsum / std::sqrt(static_cast<double>(K)));
      }
      const double v = -2.0 * log_p / n;
      tr.slope_estimates[gi] += v;
      sumsq[gi] += v * v;
    }
  }
  const double R = static_cast<double>(cfg.reps);
  tr.slope_se.assign(cfg.n_grid.size(), 0.0);
  for (size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
    tr.slope_estimates[gi] /= R;
    if (cfg.reps > 1) {
      const double var =
          (sumsq[gi] - R * tr.slope_estimates[gi] * tr.slope_estimates[gi]) /
          (R - 1.0);
      tr.slope_se[gi] = std::sqrt(std::max(0.0, var) / R);
    }
  }
  return tr;
}

void write_slope_csv(const std::vector<SlopeTrace>& traces,
                     const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f << "test,theta,n,slope_estimate,c_theory\n";
  char buf[160];
  for (const auto& tr : traces) {
    for (size_t i = 0; i < tr.config.n_grid.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s,%g,%lld,%.8f,%.8f\n",
                    slope_test_name(tr.config.test).c_str(), tr.config.theta,
                    static_cast<long long>(tr.config.n_grid[i]),
                    tr.slope_estimates[i], tr.c_theory);
      f << buf;
    }
  }
}

std::vector<double> afp_consistency_check(const ConsistencyConfig& cfg) {
  if (cfg.ell < 1 || cfg.ell > cfg.K)
    throw UsageError("consistency check needs 1 <= ell <= K");
  std::vector<std::uint8_t> truth(cfg.K, 0);
  for (int i = 0; i < cfg.ell; ++i) truth[i] = 1;
  std::vector<std::int64_t> agree(cfg.n_grid.size(), 0);
  std::vector<double> eps(cfg.K), nlogp(cfg.K);
  for (std::int64_t r = 0; r < cfg.reps; ++r) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(r), kStreamConsistency);
    for (int i = 0; i < cfg.K; ++i) eps[i] = rng.normal();
    for (size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
      const double n = static_cast<double>(cfg.n_grid[gi]);
      for (int i = 0; i < cfg.K; ++i) {
        const double mean = i < cfg.ell ? cfg.mu : 0.0;
        const double z = std::sqrt(n) * mean + eps[i];
        nlogp[i] = -special::log_normal_sf(z);
      }
      const AFpResult a = afp_stat_nlog(nlogp);
      if (afp_selected_weights(a.trace, a.j_star) == truth) ++agree[gi];
    }
  }
  std::vector<double> rates(cfg.n_grid.size());
  for (size_t gi = 0; gi < rates.size(); ++gi)
    rates[gi] = static_cast<double>(agree[gi]) / static_cast<double>(cfg.reps);
  return rates;
}

}  // namespace pcombine
