#include "pcombine/ensemble.hpp"

#include <cmath>

#include "pcombine/combiners.hpp"
#include "pcombine/special.hpp"

namespace pcombine {

double fe_stat(double p_fisher, double p_afp, double delta) {
  return 0.5 * (trunc_cauchy_transform(p_fisher, delta) +
                trunc_cauchy_transform(p_afp, delta));
}

double fe_pvalue(double stat) { return special::cauchy_sf(stat); }

double fecs_stat(double p_fisher_left, double p_fisher_right,
                 double p_afp_left, double p_afp_right, double delta) {
  return 0.25 * (trunc_cauchy_transform(p_fisher_left, delta) +
                 trunc_cauchy_transform(p_fisher_right, delta) +
                 trunc_cauchy_transform(p_afp_left, delta) +
                 trunc_cauchy_transform(p_afp_right, delta));
}

double fecs_pvalue(double stat) { return special::cauchy_sf(stat); }

double pearson_stat(const std::vector<double>& p_left,
                    const std::vector<double>& p_right) {
  if (p_left.size() != p_right.size() || p_left.empty())
    throw DataError("pearson_stat: left/right vectors of unequal length");
  for (size_t i = 0; i < p_left.size(); ++i)
    if (std::fabs(p_left[i] + p_right[i] - 1.0) > 1e-6)
      throw DataError("pearson_stat: inconsistent one-sided pair at index " +
                      std::to_string(i));
  const int df = 2 * static_cast<int>(p_left.size());
  const double pl = special::gamma_q(df / 2.0, fisher_stat(p_left) / 2.0);
  const double pr = special::gamma_q(df / 2.0, fisher_stat(p_right) / 2.0);
  return pl < pr ? pl : pr;
}

double rv_ensemble_stat(const std::vector<double>& component_pvalues,
                        double gamma, std::optional<double> truncate_delta) {
  double s = 0.0;
  for (double p : component_pvalues) {
    double v = p;
    if (truncate_delta) {
      const double cap = 1.0 - *truncate_delta;
      if (v > cap) v = cap;
    }
    s += pareto_rv_transform(v, gamma);
  }
  return s;
}

}  // namespace pcombine
