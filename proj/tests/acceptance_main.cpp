// Release acceptance checks. Each criterion prints exactly one line,
//
//   criterion N: PASS — <summary>
//   criterion N: FAIL — <summary>
//
// and the process exits nonzero if any executed criterion fails.
// `--criterion N` runs a single one (used by the ctest registrations).
//
// Every tolerance is pinned here, next to the check that uses it, with the
// reasoning in a comment. All randomized checks run fixed seeds, so a given
// build either passes or fails reproducibly.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <initializer_list>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pcombine/combiners.hpp"
#include "pcombine/metapipe.hpp"
#include "pcombine/nulldist.hpp"
#include "pcombine/powersim.hpp"
#include "pcombine/special.hpp"
#include "pcombine/types.hpp"

namespace {

using namespace pcombine;

std::string strf(const char* fmt, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return std::string(buf);
}

struct Outcome {
  bool pass = false;
  std::string note;
};

// All violations joined, so a failing run documents every bad cell at once.
std::string join_all(const std::vector<std::string>& parts) {
  std::string s;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) s += "; ";
    s += parts[i];
  }
  return s;
}

// Inverse survival function of chi^2(df) by bisection on the monotone tail.
double chi2_sf_quantile(double q, double df) {
  double lo = 0.0, hi = 1.0;
  while (special::chi2_sf(hi, df) > q) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (special::chi2_sf(mid, df) > q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double sq(double x) { return x * x; }

// ---------------------------------------------------------------------------
// Criterion 1: simulated null tables match the known analytic distributions
// of the classical statistics at several tail probabilities.
// ---------------------------------------------------------------------------
Outcome criterion1() {
  const std::int64_t B = 100000;
  const std::uint64_t seed = 1234;
  // Empirical tail fraction at a fixed threshold is Binomial(B, q)/B; its
  // standard error is at most sqrt(0.25/B). A 4-sigma band across 40 probe
  // cells keeps the false-alarm chance of the whole check well under 1%.
  const double tol = 4.0 * std::sqrt(0.25 / static_cast<double>(B));
  const double probes[] = {0.05, 0.10, 0.25, 0.50, 0.75};

  double worst = 0.0;
  std::string worst_cell = "-";
  int cells = 0;
  for (Method m :
       {Method::Fisher, Method::Stouffer, Method::MinP, Method::Cauchy}) {
    for (int K : {2, 10}) {
      const NullTable tbl = build_null_table(make_spec(m), K, B, seed);
      for (double q : probes) {
        double emp = 0.0;
        if (m == Method::MinP) {
          // min of K uniforms, small significant: probe the CDF at its
          // analytic q-quantile 1-(1-q)^{1/K}.
          const double t = -std::expm1(std::log1p(-q) / K);
          const auto it =
              std::upper_bound(tbl.stats.begin(), tbl.stats.end(), t);
          emp = static_cast<double>(it - tbl.stats.begin()) /
                static_cast<double>(B);
        } else {
          double x = 0.0;
          if (m == Method::Fisher) {
            x = chi2_sf_quantile(q, 2.0 * K);  // -2 sum log p ~ chi^2(2K)
          } else if (m == Method::Stouffer) {
            // sum of K standard normals ~ N(0, K)
            x = special::normal_quantile(1.0 - q) * std::sqrt(double(K));
          } else {
            // mean of Cauchy transforms is standard Cauchy for every K
            x = special::cauchy_transform(q);
          }
          const auto it =
              std::lower_bound(tbl.stats.begin(), tbl.stats.end(), x);
          emp = static_cast<double>(tbl.stats.end() - it) /
                static_cast<double>(B);
        }
        ++cells;
        const double dev = std::fabs(emp - q);
        if (dev > worst) {
          worst = dev;
          worst_cell = strf("%s K=%d q=%.2f", method_name(m).c_str(), K, q);
        }
      }
    }
  }
  Outcome o;
  o.pass = worst <= tol;
  o.note = strf("max tail error %.5f over %d probes (bound %.5f, worst %s)",
                worst, cells, tol, worst_cell.c_str());
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 2: every method holds its nominal size at alpha in {0.01, 0.05}
// across K in {5, 10, 20, 50, 100}, within Monte Carlo error. The two
// ensembles carry their analytic size-inflation caps instead of a two-sided
// band.
// ---------------------------------------------------------------------------
Outcome criterion2() {
  const std::int64_t B = 100000;
  const std::int64_t reps = 100000;
  CalibrationOptions copt;
  copt.B = B;
  copt.seed = 20240817ull;
  TableProvider provider(copt);
  const std::vector<double> alphas = {0.01, 0.05};

  std::vector<MethodSpec> specs;
  for (Method m :
       {Method::Fisher, Method::Stouffer, Method::MinP, Method::Cauchy,
        Method::AFp, Method::AFz, Method::OTFhard, Method::OTFsoft,
        Method::TruncCauchy, Method::HarmonicMean, Method::ParetoRV,
        Method::BJ, Method::HC, Method::Pearson, Method::FE, Method::FECS})
    specs.push_back(make_spec(m));
  specs.push_back(make_spec(Method::TFhard));  // default tau = 0.05
  specs.push_back(make_spec(Method::TFsoft));

  int cells = 0, violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string worst_cell = "-";
  for (int K : {5, 10, 20, 50, 100}) {
    for (const MethodSpec& spec : specs) {
      Combiner comb(spec, K, provider);
      const std::vector<double> rates =
          estimate_type1_multialpha(comb, alphas, reps, 31337ull);
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        const double alpha = alphas[a];
        // Replicate noise is alpha(1-alpha)/reps everywhere. When the
        // p-value is read off a size-B simulated table, the table's own
        // sampling noise perturbs the effective cutoff by roughly the same
        // relative amount, so both terms enter the error budget.
        const double se =
            comb.calibration() == Calibration::Analytic
                ? std::sqrt(alpha * (1.0 - alpha) / double(reps))
                : std::sqrt(alpha * (1.0 - alpha) *
                            (1.0 / double(reps) + 1.0 / double(B)));
        double lo = alpha - 3.0 * se;
        double hi = alpha + 3.0 * se;
        if (spec.method == Method::FE) {
          // Averaging two truncated Cauchy transforms inflates the Cauchy
          // tail by at most 2% at these levels.
          lo = 0.0;
          hi = 1.02 * alpha + 3.0 * se;
        } else if (spec.method == Method::FECS) {
          // Four-term average: cap 1.0406 * alpha.
          lo = 0.0;
          hi = 1.0406 * alpha + 3.0 * se;
        }
        ++cells;
        const double rate = rates[a];
        const bool ok = rate >= lo && rate <= hi;
        if (!ok) ++violations;
        // Distance to the nearest band edge, in se units (negative = outside).
        const double margin = std::min(rate - lo, hi - rate) / se;
        if (margin < worst_margin) {
          worst_margin = margin;
          worst_cell = strf("%s K=%d alpha=%.2f rate=%.5f band=[%.5f,%.5f]",
                            method_id(spec).c_str(), K, alpha, rate, lo, hi);
        }
      }
    }
  }
  Outcome o;
  o.pass = violations == 0;
  o.note = strf("%d size cells, %d outside their band; tightest: %s", cells,
                violations, worst_cell.c_str());
  return o;
}

// --- shared helpers for the power-grid criteria ------------------------------

const PowerEstimate* find_est(const GridCell& cell, const std::string& id) {
  for (const auto& e : cell.estimates)
    if (method_id(e.method) == id) return &e;
  return nullptr;
}

double se_pair(const PowerEstimate& a, const PowerEstimate& b) {
  return std::sqrt(sq(a.mc_se) + sq(b.mc_se));
}

bool frac_in(double frac, std::initializer_list<double> set) {
  for (double f : set)
    if (std::fabs(frac - f) < 1e-9) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Criterion 3: on the calibrated power grid (K=10, alpha=0.01, two-sided,
// signal strength tuned per cell to put the best method near power 0.5) the
// adaptive methods win under sparse signals and Fisher is not beaten under
// dense ones.
// ---------------------------------------------------------------------------
Outcome criterion3() {
  CalibrationOptions copt;
  copt.B = 100000;
  copt.seed = 20240817ull;
  TableProvider provider(copt);
  const std::vector<MethodSpec> methods = {
      make_spec(Method::Fisher),  make_spec(Method::AFp),
      make_spec(Method::AFz),     make_spec(Method::TFhard),
      make_spec(Method::TFsoft),  make_spec(Method::OTFhard),
      make_spec(Method::OTFsoft)};
  const std::vector<double> fracs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const GridResult grid =
      run_power_grid(methods, {10}, fracs, 0.5, 0.01, Sidedness::TwoSided,
                     10000, 20240817ull, provider);

  const std::string id_fisher = method_id(methods[0]);
  const std::string id_afp = method_id(methods[1]);
  const std::string id_afz = method_id(methods[2]);

  std::vector<std::string> fails;
  double sparse_gap = 1e300;  // smallest AFp-Fisher edge in the sparse cells
  for (const GridCell& cell : grid.cells) {
    const PowerEstimate* f = find_est(cell, id_fisher);
    const PowerEstimate* ap = find_est(cell, id_afp);
    const PowerEstimate* az = find_est(cell, id_afz);
    if (!f || !ap || !az) {
      fails.push_back(strf("frac %.1f missing estimates", cell.ell_frac));
      continue;
    }
    // Sparse signal: the adaptive statistic must beat Fisher by a clear
    // paired margin (2x the paired-difference standard error).
    if (frac_in(cell.ell_frac, {0.1, 0.2})) {
      const double gap = ap->power - f->power;
      sparse_gap = std::min(sparse_gap, gap);
      if (!(gap > 2.0 * se_pair(*ap, *f)))
        fails.push_back(strf("frac %.1f: afp %.3f vs fisher %.3f",
                             cell.ell_frac, ap->power, f->power));
    }
    // Dense signal: Fisher within noise of every truncated/adaptive variant.
    if (frac_in(cell.ell_frac, {0.5, 0.6, 0.7})) {
      for (const auto& e : cell.estimates) {
        if (method_id(e.method) == id_fisher) continue;
        if (f->power < e.power - 2.0 * se_pair(*f, e))
          fails.push_back(strf("frac %.1f: fisher %.3f below %s %.3f",
                               cell.ell_frac, f->power,
                               method_id(e.method).c_str(), e.power));
      }
    }
    // The p-value-based adaptive statistic never trails its z-based twin.
    if (ap->power < az->power - 2.0 * se_pair(*ap, *az))
      fails.push_back(strf("frac %.1f: afp %.3f below afz %.3f", cell.ell_frac,
                           ap->power, az->power));
  }
  Outcome o;
  o.pass = fails.empty();
  o.note = fails.empty()
               ? strf("sparse afp-fisher edge >= %.3f; dense cells within "
                      "noise of fisher",
                      sparse_gap)
               : join_all(fails);
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 4: the two-term ensemble tracks the better of its constituents
// across the whole sparsity range (within 5 power points).
// ---------------------------------------------------------------------------
Outcome criterion4() {
  CalibrationOptions copt;
  copt.B = 100000;
  copt.seed = 20240817ull;
  TableProvider provider(copt);
  const std::vector<MethodSpec> methods = {
      make_spec(Method::Fisher), make_spec(Method::AFp), make_spec(Method::FE)};
  const std::vector<double> fracs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const GridResult grid =
      run_power_grid(methods, {10}, fracs, 0.5, 0.01, Sidedness::TwoSided,
                     10000, 20240817ull, provider);

  const std::string id_fisher = method_id(methods[0]);
  const std::string id_afp = method_id(methods[1]);
  const std::string id_fe = method_id(methods[2]);
  // The ensemble trades a bounded amount of power for robustness; 0.05 is
  // the regression budget on a 10^4-replicate grid (its own MC noise is
  // ~0.005 per cell, so this is a real 5-point allowance).
  const double budget = 0.05;

  std::vector<std::string> fails;
  double worst = 1e300;  // most negative fe - max(constituents)
  for (const GridCell& cell : grid.cells) {
    const PowerEstimate* f = find_est(cell, id_fisher);
    const PowerEstimate* ap = find_est(cell, id_afp);
    const PowerEstimate* fe = find_est(cell, id_fe);
    if (!f || !ap || !fe) {
      fails.push_back(strf("frac %.1f missing estimates", cell.ell_frac));
      continue;
    }
    const double best = std::max(f->power, ap->power);
    worst = std::min(worst, fe->power - best);
    if (fe->power < best - budget)
      fails.push_back(strf("frac %.1f: fe %.3f vs best constituent %.3f",
                           cell.ell_frac, fe->power, best));
  }
  Outcome o;
  o.pass = fails.empty();
  o.note = fails.empty()
               ? strf("fe within %.3f of the better constituent everywhere "
                      "(budget %.2f)",
                      -worst, budget)
               : join_all(fails);
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 5: one-sided concordant signals at a stringent level
// (alpha = 0.001): the concordance-seeking ensemble and the pairwise
// statistic dominate the two-sided ensemble, and the ensemble leads the
// pairwise statistic under sparse signals.
// ---------------------------------------------------------------------------
Outcome criterion5() {
  CalibrationOptions copt;
  copt.B = 100000;  // B * alpha = 100 rank points at alpha = 0.001
  copt.seed = 20240817ull;
  TableProvider provider(copt);
  const std::vector<MethodSpec> methods = {make_spec(Method::FE),
                                           make_spec(Method::FECS),
                                           make_spec(Method::Pearson)};
  const std::vector<double> fracs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const GridResult grid =
      run_power_grid(methods, {10}, fracs, 0.6, 0.001, Sidedness::OneSided,
                     10000, 20240817ull, provider);

  const std::string id_fe = method_id(methods[0]);
  const std::string id_cs = method_id(methods[1]);
  const std::string id_pr = method_id(methods[2]);

  std::vector<std::string> fails;
  for (const GridCell& cell : grid.cells) {
    const PowerEstimate* fe = find_est(cell, id_fe);
    const PowerEstimate* cs = find_est(cell, id_cs);
    const PowerEstimate* pr = find_est(cell, id_pr);
    if (!fe || !cs || !pr) {
      fails.push_back(strf("frac %.1f missing estimates", cell.ell_frac));
      continue;
    }
    if (cs->power < fe->power - 2.0 * se_pair(*cs, *fe))
      fails.push_back(strf("frac %.1f: fecs %.3f below fe %.3f", cell.ell_frac,
                           cs->power, fe->power));
    if (pr->power < fe->power - 2.0 * se_pair(*pr, *fe))
      fails.push_back(strf("frac %.1f: pearson %.3f below fe %.3f",
                           cell.ell_frac, pr->power, fe->power));
    if (frac_in(cell.ell_frac, {0.1, 0.2, 0.3}) &&
        cs->power < pr->power - 2.0 * se_pair(*cs, *pr))
      fails.push_back(strf("frac %.1f: fecs %.3f below pearson %.3f",
                           cell.ell_frac, cs->power, pr->power));
  }
  Outcome o;
  o.pass = fails.empty();
  o.note = fails.empty() ? "one-sided orderings hold on all 7 cells"
                         : join_all(fails);
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 6: the empirical exact-slope estimator reproduces the known
// slopes, and separates Fisher from Stouffer on an unbalanced alternative.
// ---------------------------------------------------------------------------
Outcome criterion6() {
  std::vector<std::string> fails;

  // One-sample z-test: slope(theta) = theta^2. At n = 10^4 with 200
  // replicates the estimator's bias+noise is well under 0.1 for theta up
  // to 1.5 (per-replicate sd of -(2/n) log p is ~2 theta / sqrt(n)).
  struct ZCase {
    double theta, tol;
  };
  for (const ZCase zc : {ZCase{1.0, 0.1}, ZCase{1.5, 0.1}, ZCase{0.0, 0.05}}) {
    SlopeConfig cfg;
    cfg.test = SlopeTest::ZTest;
    cfg.theta = zc.theta;
    const SlopeTrace tr = estimate_exact_slope(cfg);
    const double want = sq(zc.theta);
    if (std::fabs(tr.c_theory - want) > 1e-12)
      fails.push_back(strf("ztest theta=%.1f: c_theory %.6f != %.6f",
                           zc.theta, tr.c_theory, want));
    if (std::fabs(tr.slope_estimates.back() - want) > zc.tol)
      fails.push_back(strf("ztest theta=%.1f: slope %.4f vs %.4f (tol %.2f)",
                           zc.theta, tr.slope_estimates.back(), want, zc.tol));
  }

  // Five equal-size studies, two carrying mean theta = 1: Fisher's slope is
  // sum of the per-study slopes (2.0); Stouffer's is (sum of means)^2 / K
  // (0.8). The estimates must separate by a clear paired margin.
  SlopeConfig f;
  f.test = SlopeTest::FisherCombined;
  f.theta = 1.0;
  f.ell = 2;
  f.lambdas = {1.0, 1.0, 1.0, 1.0, 1.0};
  SlopeConfig s = f;
  s.test = SlopeTest::StoufferCombined;
  const SlopeTrace tf = estimate_exact_slope(f);
  const SlopeTrace ts = estimate_exact_slope(s);
  if (tf.c_theory != 2.0)
    fails.push_back(strf("fisher c_theory %.6f != 2", tf.c_theory));
  if (ts.c_theory != 0.8)
    fails.push_back(strf("stouffer c_theory %.6f != 0.8", ts.c_theory));
  const double gap = tf.slope_estimates.back() - ts.slope_estimates.back();
  const double se =
      std::sqrt(sq(tf.slope_se.back()) + sq(ts.slope_se.back()));
  if (!(gap > 2.0 * se))
    fails.push_back(
        strf("fisher-stouffer slope gap %.4f <= 2 se (%.4f)", gap, 2.0 * se));
  const double tol_conv = 0.15;  // both estimates near theory at n = 10^4
  if (std::fabs(tf.slope_estimates.back() - 2.0) > tol_conv)
    fails.push_back(
        strf("fisher slope %.4f vs 2.0", tf.slope_estimates.back()));
  if (std::fabs(ts.slope_estimates.back() - 0.8) > tol_conv)
    fails.push_back(
        strf("stouffer slope %.4f vs 0.8", ts.slope_estimates.back()));

  Outcome o;
  o.pass = fails.empty();
  o.note = fails.empty()
               ? strf("z-test slopes match theta^2; fisher %.3f vs stouffer "
                      "%.3f (theory 2.0 / 0.8)",
                      tf.slope_estimates.back(), ts.slope_estimates.back())
               : join_all(fails);
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 7: the adaptive statistic's selected study set converges to the
// true signal set as per-study information grows.
// ---------------------------------------------------------------------------
Outcome criterion7() {
  ConsistencyConfig cfg;  // K=10, ell=3, mu=1, n in {1e2, 1e3, 1e4}, 1000 reps
  const std::vector<double> rates = afp_consistency_check(cfg);
  Outcome o;
  if (rates.size() != cfg.n_grid.size()) {
    o.note = "unexpected rate vector length";
    return o;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < rates.size(); ++i)
    monotone = monotone && rates[i] + 1e-12 >= rates[i - 1];
  // At n = 10^4 the chance a pure-noise study sneaks into the selection is
  // negligible against the sqrt(n)-scaled signal; 0.95 leaves room for the
  // 1000-replicate binomial noise.
  const bool high = rates.back() >= 0.95;
  o.pass = monotone && high;
  std::string tail;
  for (std::size_t i = 0; i < rates.size(); ++i)
    tail += strf("%s%.3f", i ? " -> " : "", rates[i]);
  o.note = strf("selection agreement %s (need nondecreasing, final >= 0.95)",
                tail.c_str());
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 8: brute-force oracles. (a) the adaptive optimum over all
// nonempty study subsets equals the library's prefix scan; (b) the omnibus
// p-value matches an independently coded double Monte Carlo loop; (c) BH
// q-values match the quadratic-time definition bit for bit.
// ---------------------------------------------------------------------------
Outcome criterion8() {
  std::vector<std::string> fails;

  // (a) subset enumeration, K up to 12 (4095 subsets), 1000 random inputs.
  {
    std::mt19937_64 gen(88011);
    std::uniform_real_distribution<double> U(1e-12, 1.0);
    auto objective = [](int j, double cum) {
      return j == 1 ? cum : -special::log_gamma_q(double(j), cum);
    };
    for (int t = 0; t < 1000 && fails.empty(); ++t) {
      const int K = 1 + static_cast<int>(gen() % 12);
      std::vector<double> p(K);
      for (double& v : p) v = U(gen);
      if (t % 5 == 0 && K >= 2) p[1] = p[0];  // exact ties
      if (t % 7 == 0) p[0] = 1e-12;           // extreme input
      const AFpResult lib = afp_stat(p);
      std::vector<double> nlog(K);
      for (int i = 0; i < K; ++i) nlog[i] = -std::log(p[i]);
      double best = -std::numeric_limits<double>::infinity();
      for (std::uint32_t mask = 1; mask < (1u << K); ++mask) {
        double cum = 0.0;
        int j = 0;
        for (int i = 0; i < K; ++i)
          if (mask & (1u << i)) {
            cum += nlog[i];
            ++j;
          }
        best = std::max(best, objective(j, cum));
      }
      const double tol = 1e-9 * std::max(1.0, std::fabs(best));
      if (std::fabs(lib.stat - best) > tol) {
        fails.push_back(strf("subset oracle: input %d stat %.12g vs %.12g", t,
                             lib.stat, best));
        break;
      }
      // The reported selection must itself attain the optimum.
      const std::vector<std::uint8_t> sel =
          afp_selected_weights(lib.trace, lib.j_star);
      double cum = 0.0;
      int j = 0;
      for (int i = 0; i < K; ++i)
        if (sel[i]) {
          cum += nlog[i];
          ++j;
        }
      if (j != lib.j_star ||
          std::fabs(objective(j, cum) - best) > tol)
        fails.push_back(strf("subset oracle: input %d selection suboptimal", t));
    }
  }

  // (b) omnibus p-value against an independent double Monte Carlo loop:
  // same draw count, same tie-inclusive rank convention, different code and
  // different random streams.
  if (fails.empty()) {
    const int K = 5;
    const std::int64_t B2 = 20000;
    const std::vector<double> pobs = {0.001, 0.6, 0.7, 0.8, 0.9};
    MethodSpec spec = make_spec(Method::OTFhard);
    CalibrationOptions copt;
    copt.B = B2;
    copt.seed = 606;
    TableProvider provider(copt);
    const Combiner comb(spec, K, provider);
    const double p_lib = comb.combine(pobs).pvalue;

    const std::vector<double>& taus = spec.tau_set;
    std::vector<std::vector<double>> tab(taus.size());
    for (auto& v : tab) v.reserve(B2);
    {
      std::mt19937_64 g(112233);
      std::uniform_real_distribution<double> U(
          std::numeric_limits<double>::min(), 1.0);
      std::vector<double> d(K);
      for (std::int64_t b = 0; b < B2; ++b) {
        for (double& v : d) v = U(g);
        for (std::size_t t = 0; t < taus.size(); ++t)
          tab[t].push_back(tfhard_stat(d, taus[t]));
      }
    }
    std::vector<std::vector<double>> sorted = tab;
    for (auto& v : sorted) std::sort(v.begin(), v.end());
    auto ptau = [&](std::size_t t, double s) {
      const auto& v = sorted[t];
      const std::int64_t ge =
          v.end() - std::lower_bound(v.begin(), v.end(), s);
      return static_cast<double>(1 + ge) / static_cast<double>(B2 + 1);
    };
    double mobs = 1e300;
    for (std::size_t t = 0; t < taus.size(); ++t)
      mobs = std::min(mobs, ptau(t, tfhard_stat(pobs, taus[t])));
    std::int64_t le = 0;
    for (std::int64_t b = 0; b < B2; ++b) {
      double mb = 1e300;
      for (std::size_t t = 0; t < taus.size(); ++t)
        mb = std::min(mb, ptau(t, tab[t][b]));
      if (mb <= mobs) ++le;
    }
    const double p_ind =
        static_cast<double>(1 + le) / static_cast<double>(B2 + 1);
    // Two independent B2-draw estimates of the same quantity: 3 sigma on
    // the difference plus two rank grid steps for tie handling.
    const double pbar = 0.5 * (p_lib + p_ind);
    const double band =
        3.0 * std::sqrt(std::max(pbar * (1.0 - pbar), 1e-12) * 2.0 /
                        static_cast<double>(B2)) +
        2.0 / static_cast<double>(B2 + 1);
    if (std::fabs(p_lib - p_ind) > band)
      fails.push_back(strf("omnibus oracle: %.5f vs %.5f (band %.5f)", p_lib,
                           p_ind, band));
  }

  // (c) BH q-values against the quadratic-time definition, bit for bit.
  if (fails.empty()) {
    std::mt19937_64 g(990233);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int v = 0; v < 1000 && fails.empty(); ++v) {
      const int m = 1 + static_cast<int>(g() % 100);
      std::vector<double> p(m);
      for (double& x : p) x = U(g);
      if (v % 3 == 0 && m >= 2) p[1] = p[0];
      if (v % 11 == 0) p[0] = 0.0;
      if (v % 13 == 0) p[m - 1] = 1.0;
      const std::vector<double> q = bh_qvalues(p);
      std::vector<std::int64_t> cnt(m, 0);
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) cnt[j] += (p[k] <= p[j]);
      for (int i = 0; i < m; ++i) {
        double best = 1.0;
        for (int j = 0; j < m; ++j)
          if (p[j] >= p[i])
            best = std::min(best, p[j] * double(m) / double(cnt[j]));
        if (q[i] != best) {
          fails.push_back(strf("bh oracle: vector %d index %d %.17g vs %.17g",
                               v, i, q[i], best));
          break;
        }
      }
    }
  }

  Outcome o;
  o.pass = fails.empty();
  o.note = fails.empty()
               ? "subset, omnibus, and bh oracles all agree"
               : fails.front();
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 9: end-to-end meta-analysis on synthetic expression panels:
// calibrated p-values on pure noise, near-complete recovery of concordant
// signals by the concordance-seeking ensemble, and a decisive advantage of
// the two-sided ensemble under discordant signals.
// ---------------------------------------------------------------------------
Outcome criterion9() {
  CalibrationOptions copt;
  copt.B = 100000;
  copt.seed = 20240817ull;
  TableProvider provider(copt);
  MetaOptions mo;
  mo.methods = {make_spec(Method::Fisher), make_spec(Method::AFp),
                make_spec(Method::FE), make_spec(Method::FECS)};
  const std::string id_f = method_id(mo.methods[0]);
  const std::string id_a = method_id(mo.methods[1]);
  const std::string id_e = method_id(mo.methods[2]);
  const std::string id_c = method_id(mo.methods[3]);

  auto ks_uniform = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      d = std::max(d, std::max((double(i) + 1.0) / n - v[i],
                               v[i] - double(i) / n));
    return d;
  };

  std::vector<std::string> fails;
  double ks_f = 0.0, ks_a = 0.0;

  // (a) 300 pure-noise features, 8 studies x 30 subjects.
  {
    SynthConfig cfg;
    cfg.n_studies = 8;
    cfg.subjects_per_study = 30;
    cfg.blocks = {{300, SignalMode::Null, 0.0, 1.0}};
    cfg.seed = 41;
    const SynthResult syn = synth_studies(cfg);
    const MetaRun run = run_meta(syn.studies, mo, provider);
    if (run.results.size() != 300) {
      fails.push_back(strf("null panel: %zu results", run.results.size()));
    } else {
      auto column = [&](const std::string& id) {
        std::vector<double> v;
        v.reserve(run.results.size());
        for (const auto& r : run.results) v.push_back(r.combined_p.at(id));
        return v;
      };
      // 1% asymptotic Kolmogorov-Smirnov critical value, n = 300. Applied
      // to the two exactly calibrated columns; the ensembles are only
      // near-calibrated by construction, so they are held to the discovery
      // bound below instead.
      const double ks_crit = 1.63 / std::sqrt(300.0);
      ks_f = ks_uniform(column(id_f));
      ks_a = ks_uniform(column(id_a));
      if (ks_f > ks_crit)
        fails.push_back(strf("null panel: KS(fisher) %.4f > %.4f", ks_f, ks_crit));
      if (ks_a > ks_crit)
        fails.push_back(strf("null panel: KS(afp) %.4f > %.4f", ks_a, ks_crit));
      for (const std::string& id : {id_f, id_a, id_e, id_c}) {
        int disc = 0;
        for (const auto& r : run.results) disc += (r.q_value.at(id) <= 0.05);
        // On 300 independent nulls BH makes any discovery with chance ~0.05;
        // more than 2 would indicate miscalibration, not bad luck.
        if (disc > 2)
          fails.push_back(
              strf("null panel: %d discoveries under %s", disc, id.c_str()));
      }
    }
  }

  // (b) 100 concordant signal features (+100 nulls), 8 studies x 40 subjects.
  double rate_concordant = 0.0;
  {
    SynthConfig cfg;
    cfg.n_studies = 8;
    cfg.subjects_per_study = 40;
    cfg.blocks = {{100, SignalMode::ConcordantPos, 0.04, 1.0},
                  {100, SignalMode::Null, 0.0, 1.0}};
    cfg.seed = 42;
    const SynthResult syn = synth_studies(cfg);
    std::set<std::string> sig;
    for (const auto& t : syn.truth)
      if (t.mode != SignalMode::Null) sig.insert(t.feature_id);
    const MetaRun run = run_meta(syn.studies, mo, provider);
    int hit = 0;
    for (const auto& r : run.results)
      hit += (sig.count(r.feature_id) && r.q_value.at(id_c) <= 0.05);
    rate_concordant = double(hit) / double(sig.size());
    // An eight-study concordant slope of 0.04 gives per-study t ~ 2, which
    // the combined tests detect almost surely; 0.9 leaves binomial slack.
    if (rate_concordant < 0.9)
      fails.push_back(
          strf("concordant panel: fecs recovery %.3f < 0.9", rate_concordant));
  }

  // (c) 50 discordant signal features (+150 nulls): the two-sided ensemble
  // must beat the concordance-seeking one by > 2 binomial sigmas.
  double rate_fe = 0.0, rate_cs = 0.0;
  {
    SynthConfig cfg;
    cfg.n_studies = 8;
    cfg.subjects_per_study = 40;
    cfg.blocks = {{50, SignalMode::Discordant, 0.03, 1.0},
                  {150, SignalMode::Null, 0.0, 1.0}};
    cfg.seed = 43;
    const SynthResult syn = synth_studies(cfg);
    std::set<std::string> sig;
    for (const auto& t : syn.truth)
      if (t.mode != SignalMode::Null) sig.insert(t.feature_id);
    const MetaRun run = run_meta(syn.studies, mo, provider);
    int hit_fe = 0, hit_cs = 0;
    for (const auto& r : run.results) {
      if (!sig.count(r.feature_id)) continue;
      hit_fe += (r.q_value.at(id_e) <= 0.05);
      hit_cs += (r.q_value.at(id_c) <= 0.05);
    }
    rate_fe = double(hit_fe) / double(sig.size());
    rate_cs = double(hit_cs) / double(sig.size());
    const double se = std::sqrt((rate_fe * (1.0 - rate_fe) +
                                 rate_cs * (1.0 - rate_cs)) /
                                double(sig.size()));
    if (!(rate_fe - rate_cs > 2.0 * se))
      fails.push_back(strf("discordant panel: fe %.3f vs fecs %.3f (2 se %.3f)",
                           rate_fe, rate_cs, 2.0 * se));
  }

  Outcome o;
  o.pass = fails.empty();
  o.note = fails.empty()
               ? strf("null KS %.3f/%.3f; concordant fecs recovery %.2f; "
                      "discordant fe %.2f vs fecs %.2f",
                      ks_f, ks_a, rate_concordant, rate_fe, rate_cs)
               : join_all(fails);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
      if (only < 1 || only > 9) {
        std::fprintf(stderr, "criterion number must be 1..9\n");
        return 2;
      }
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }

  using Check = Outcome (*)();
  const Check checks[9] = {criterion1, criterion2, criterion3,
                           criterion4, criterion5, criterion6,
                           criterion7, criterion8, criterion9};
  bool all_pass = true;
  for (int n = 1; n <= 9; ++n) {
    if (only != 0 && n != only) continue;
    Outcome o;
    try {
      o = checks[n - 1]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note = strf("exception: %s", e.what());
    }
    std::printf("criterion %d: %s — %s\n", n, o.pass ? "PASS" : "FAIL",
                o.note.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
