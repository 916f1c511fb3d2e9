#pragma once

// Combination statistics. All functions assume validated input (see
// types.hpp); they are pure and thread-safe.

#include <cstdint>
#include <vector>

#include "pcombine/types.hpp"

namespace pcombine {

struct PartialSumTrace {
  std::vector<double> ordered_p;      // ascending p-values
  std::vector<double> partial_stats;  // objective value at j = 1..K
  std::vector<std::uint32_t> order;   // ordered_p[i] == p[order[i]]
};

struct AFpResult {
  double stat = 0.0;
  int j_star = 1;  // 1-based; ties broken to the smallest j
  PartialSumTrace trace;
};

struct AFzResult {
  double stat = 0.0;
  int j_star = 1;
};

double fisher_stat(const std::vector<double>& p);
double stouffer_stat(const std::vector<double>& p);
double minp_stat(const std::vector<double>& p);

// max_j -ln SF_chi2(2j)( -2 sum_{i<=j} ln p_(i) ). At j=1 the objective is
// exactly -ln p_(1).
AFpResult afp_stat(const std::vector<double>& p);
// Same maximization from -ln p inputs; needed when p underflows double
// precision (large-n slope and consistency runs).
AFpResult afp_stat_nlog(std::vector<double> nlogp);

// Indicator (original input order) of the j_star smallest p-values.
std::vector<std::uint8_t> afp_selected_weights(const PartialSumTrace& trace,
                                               int j_star);

// max_j [ -sum_{i<=j} ln p_(i) - A_j ] / B_j with weights w(i,j) = min{1, j/i}
// summed over i = 1..K: A_j = sum w, B_j = sqrt(sum w^2).
AFzResult afz_stat(const std::vector<double>& p);
AFzResult afz_stat_nlog(std::vector<double> nlogp);

double tfhard_stat(const std::vector<double>& p, double tau);
double tfsoft_stat(const std::vector<double>& p, double tau);

double cauchy_stat(const std::vector<double>& p);

// tan(pi(1/2-p)) capped below at its value at 1-delta.
double trunc_cauchy_transform(double p, double delta);
double trunc_cauchy_stat(const std::vector<double>& p, double delta);

double harmonic_mean_stat(const std::vector<double>& p);

// p^{-1/gamma}: the (1-p)-quantile of a Pareto(gamma) variable on [1, inf).
double pareto_rv_transform(double p, double gamma);
// Sum of truncated Pareto transforms of the study p-values.
double pareto_rv_stat(const std::vector<double>& p, double gamma, double delta);

double hc_stat(const std::vector<double>& p);
double bj_stat(const std::vector<double>& p);

// Dispatch for methods whose statistic is a pure function of one validated
// p-value vector (everything except the omnibus and pair-input methods).
bool has_simple_stat(Method m);
double simple_stat(const MethodSpec& spec, const std::vector<double>& p);

}  // namespace pcombine
