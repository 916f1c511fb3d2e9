#pragma once

// Tail areas, quantiles and transforms used by the combiners. Everything is
// double precision; the *_log variants stay finite far past the point where
// the plain tail area underflows (needed for Bahadur-slope runs where
// -ln p can reach ~1e4).

namespace pcombine::special {

// Standard normal.
double normal_cdf(double x);
double normal_sf(double x);
// ln(1 - Phi(x)); asymptotic expansion for x > 35.
double log_normal_sf(double x);
// Inverse CDF, Wichura's AS241 (PPND16).
double normal_quantile(double p);
// Solves ln(1 - Phi(t)) = log_sf for t; any log_sf < 0 (the lower half is
// reflected through the median).
double normal_quantile_from_log_sf(double log_sf);

// Regularized incomplete gamma, P + Q = 1.
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double log_gamma_q(double a, double x);

// Chi-square with df degrees of freedom.
double chi2_cdf(double x, double df);
double chi2_sf(double x, double df);
double chi2_logsf(double x, double df);

// Regularized incomplete beta I_x(a,b).
double inc_beta(double a, double b, double x);

// Student t with nu degrees of freedom.
double student_t_cdf(double t, double nu);
double student_t_sf(double t, double nu);

// Standard Cauchy upper tail; accurate for large |t| where 0.5 - atan(t)/pi
// would cancel.
double cauchy_sf(double t);

// tan(pi*(0.5 - p)) evaluated so that transform(p) == -transform(1-p)
// holds exactly for representable pairs.
double cauchy_transform(double p);

}  // namespace pcombine::special
