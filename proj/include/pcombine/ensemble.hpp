#pragma once

// Ensemble statistics: truncated-Cauchy averages of constituent test
// p-values (FE, FE_CS), the Pearson min-of-one-sided-Fisher statistic, and
// the generic regularly-varying ensemble.

#include <optional>
#include <vector>

#include "pcombine/types.hpp"

namespace pcombine {

// [h_delta(p_fisher) + h_delta(p_afp)] / 2
double fe_stat(double p_fisher, double p_afp, double delta);

// Standard-Cauchy survival function of the statistic. True size is at most
// (1+delta)^2 times nominal for the two-term average.
double fe_pvalue(double stat);

// (1/4)[h_d(p_fisher_L) + h_d(p_fisher_R) + h_d(p_afp_L) + h_d(p_afp_R)]
double fecs_stat(double p_fisher_left, double p_fisher_right,
                 double p_afp_left, double p_afp_right, double delta);

// Cauchy survival again; size bound (1+delta)^4.
double fecs_pvalue(double stat);

// min of the analytic Fisher p-values of the left and right one-sided
// vectors; small is significant, calibrated by Monte Carlo (the two halves
// are dependent). Rejects pairs with p_left + p_right != 1.
double pearson_stat(const std::vector<double>& p_left,
                    const std::vector<double>& p_right);

// Sum of Pareto transforms of constituent p-values; truncate_delta caps the
// transform at its value in 1 - delta (pass nullopt to disable).
double rv_ensemble_stat(const std::vector<double>& component_pvalues,
                        double gamma,
                        std::optional<double> truncate_delta = 0.01);

}  // namespace pcombine
