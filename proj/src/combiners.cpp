#include "pcombine/combiners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pcombine/special.hpp"

namespace pcombine {

double fisher_stat(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p) s -= 2.0 * std::log(v);
  return s;
}

double stouffer_stat(const std::vector<double>& p) {
  // Phi^{-1}(1-p) == -Phi^{-1}(p); the right-hand form keeps precision for
  // small p where 1-p rounds.
  double s = 0.0;
  for (double v : p) s -= special::normal_quantile(v);
  return s;
}

double minp_stat(const std::vector<double>& p) {
  return *std::min_element(p.begin(), p.end());
}

namespace {

// Ascending stable sort permutation.
std::vector<std::uint32_t> sort_order(const std::vector<double>& v) {
  std::vector<std::uint32_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(),
                   [&v](std::uint32_t a, std::uint32_t b) { return v[a] < v[b]; });
  return idx;
}

// Shared AFp maximization over cumulative -ln p order statistics (descending
// nlog order == ascending p order).
AFpResult afp_from_sorted_nlog(const std::vector<double>& nlog_sorted,
                               PartialSumTrace trace) {
  const int K = static_cast<int>(nlog_sorted.size());
  trace.partial_stats.resize(K);
  AFpResult r;
  r.stat = -std::numeric_limits<double>::infinity();
  double cum = 0.0;
  for (int j = 1; j <= K; ++j) {
    cum += nlog_sorted[j - 1];
    // chi2_logsf(2*cum, 2j) == log_gamma_q(j, cum); j=1 reduces to -cum.
    const double obj = -special::log_gamma_q(static_cast<double>(j), cum);
    trace.partial_stats[j - 1] = obj;
    if (obj > r.stat) {
      r.stat = obj;
      r.j_star = j;
    }
  }
  r.trace = std::move(trace);
  return r;
}

}  // namespace

AFpResult afp_stat(const std::vector<double>& p) {
  PartialSumTrace trace;
  trace.order = sort_order(p);
  trace.ordered_p.reserve(p.size());
  std::vector<double> nlog;
  nlog.reserve(p.size());
  for (auto i : trace.order) {
    trace.ordered_p.push_back(p[i]);
    nlog.push_back(-std::log(p[i]));
  }
  return afp_from_sorted_nlog(nlog, std::move(trace));
}

AFpResult afp_stat_nlog(std::vector<double> nlogp) {
  PartialSumTrace trace;
  // Largest -ln p first == smallest p first.
  std::vector<std::uint32_t> idx(nlogp.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&nlogp](std::uint32_t a, std::uint32_t b) {
    return nlogp[a] > nlogp[b];
  });
  trace.order = idx;
  std::vector<double> sorted;
  sorted.reserve(nlogp.size());
  for (auto i : idx) {
    sorted.push_back(nlogp[i]);
    trace.ordered_p.push_back(std::exp(-nlogp[i]));  // may underflow to 0; informational
  }
  return afp_from_sorted_nlog(sorted, std::move(trace));
}

std::vector<std::uint8_t> afp_selected_weights(const PartialSumTrace& trace,
                                               int j_star) {
  std::vector<std::uint8_t> w(trace.order.size(), 0);
  for (int i = 0; i < j_star && i < static_cast<int>(trace.order.size()); ++i)
    w[trace.order[i]] = 1;
  return w;
}

namespace {

AFzResult afz_from_sorted_nlog(const std::vector<double>& nlog_sorted) {
  const int K = static_cast<int>(nlog_sorted.size());
  // A_j = j + j * sum_{i>j} 1/i,  B_j^2 = j + j^2 * sum_{i>j} 1/i^2
  // (w(i,j) = min{1, j/i} summed over all i = 1..K).
  std::vector<double> inv_suffix(K + 1, 0.0), inv2_suffix(K + 1, 0.0);
  for (int i = K; i >= 1; --i) {
    inv_suffix[i - 1] = inv_suffix[i] + 1.0 / i;
    inv2_suffix[i - 1] = inv2_suffix[i] + 1.0 / (static_cast<double>(i) * i);
  }
  AFzResult r;
  r.stat = -std::numeric_limits<double>::infinity();
  double cum = 0.0;
  for (int j = 1; j <= K; ++j) {
    cum += nlog_sorted[j - 1];
    const double A = j * (1.0 + inv_suffix[j]);
    const double B = std::sqrt(j + static_cast<double>(j) * j * inv2_suffix[j]);
    const double obj = (cum - A) / B;
    if (obj > r.stat) {
      r.stat = obj;
      r.j_star = j;
    }
  }
  return r;
}

}  // namespace

AFzResult afz_stat(const std::vector<double>& p) {
  std::vector<double> nlog(p.size());
  for (size_t i = 0; i < p.size(); ++i) nlog[i] = -std::log(p[i]);
  std::sort(nlog.begin(), nlog.end(), std::greater<>());
  return afz_from_sorted_nlog(nlog);
}

AFzResult afz_stat_nlog(std::vector<double> nlogp) {
  std::sort(nlogp.begin(), nlogp.end(), std::greater<>());
  return afz_from_sorted_nlog(nlogp);
}

double tfhard_stat(const std::vector<double>& p, double tau) {
  double s = 0.0;
  for (double v : p)
    if (v <= tau) s -= 2.0 * std::log(v);
  return s;
}

double tfsoft_stat(const std::vector<double>& p, double tau) {
  const double l2tau = 2.0 * std::log(tau);
  double s = 0.0;
  for (double v : p) {
    const double term = -2.0 * std::log(v) + l2tau;
    if (term > 0.0) s += term;
  }
  return s;
}

double cauchy_stat(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p) s += special::cauchy_transform(v);
  return s / static_cast<double>(p.size());
}

double trunc_cauchy_transform(double p, double delta) {
  const double cap = 1.0 - delta;
  return special::cauchy_transform(p < cap ? p : cap);
}

double trunc_cauchy_stat(const std::vector<double>& p, double delta) {
  double s = 0.0;
  for (double v : p) s += trunc_cauchy_transform(v, delta);
  return s / static_cast<double>(p.size());
}

double harmonic_mean_stat(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p) s += 1.0 / v;
  return static_cast<double>(p.size()) / s;
}

double pareto_rv_transform(double p, double gamma) {
  return std::pow(p, -1.0 / gamma);
}

double pareto_rv_stat(const std::vector<double>& p, double gamma, double delta) {
  const double cap = 1.0 - delta;
  double s = 0.0;
  for (double v : p) s += pareto_rv_transform(v < cap ? v : cap, gamma);
  return s;
}

double hc_stat(const std::vector<double>& p) {
  std::vector<double> sp(p);
  std::sort(sp.begin(), sp.end());
  const double K = static_cast<double>(sp.size());
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < sp.size(); ++i) {
    const double v = sp[i];
    if (v <= 0.0 || v >= 1.0) continue;  // degenerate denominators excluded
    const double term =
        std::sqrt(K) * ((i + 1) / K - v) / std::sqrt(v * (1.0 - v));
    best = std::max(best, term);
  }
  return best;
}

double bj_stat(const std::vector<double>& p) {
  std::vector<double> sp(p);
  std::sort(sp.begin(), sp.end());
  const double K = static_cast<double>(sp.size());
  double best = 0.0;
  for (size_t i = 0; i < sp.size(); ++i) {
    const double a = (i + 1) / K;
    const double v = sp[i];
    if (!(v < a)) continue;
    double kl = a * std::log(a / v);
    if (a < 1.0) kl += (1.0 - a) * std::log((1.0 - a) / (1.0 - v));
    best = std::max(best, K * kl);
  }
  return best;
}

bool has_simple_stat(Method m) {
  switch (m) {
    case Method::OTFhard:
    case Method::OTFsoft:
    case Method::Pearson:
    case Method::FE:
    case Method::FECS:
      return false;
    default:
      return true;
  }
}

double simple_stat(const MethodSpec& spec, const std::vector<double>& p) {
  switch (spec.method) {
    case Method::Fisher: return fisher_stat(p);
    case Method::Stouffer: return stouffer_stat(p);
    case Method::MinP: return minp_stat(p);
    case Method::AFp: return afp_stat(p).stat;
    case Method::AFz: return afz_stat(p).stat;
    case Method::TFhard: return tfhard_stat(p, spec.tau);
    case Method::TFsoft: return tfsoft_stat(p, spec.tau);
    case Method::Cauchy: return cauchy_stat(p);
    case Method::TruncCauchy: return trunc_cauchy_stat(p, spec.delta);
    case Method::HarmonicMean: return harmonic_mean_stat(p);
    case Method::ParetoRV: return pareto_rv_stat(p, spec.gamma, spec.delta);
    case Method::BJ: return bj_stat(p);
    case Method::HC: return hc_stat(p);
    default:
      throw UsageError("method has no single-vector statistic: " +
                       method_name(spec.method));
  }
}

}  // namespace pcombine
