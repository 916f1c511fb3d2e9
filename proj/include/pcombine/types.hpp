#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcombine {

// Error families map 1:1 onto CLI exit codes (1/2/3).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Method {
  Fisher,
  Stouffer,
  MinP,
  AFp,
  AFz,
  TFhard,
  TFsoft,
  OTFhard,
  OTFsoft,
  Cauchy,
  TruncCauchy,
  HarmonicMean,
  ParetoRV,
  BJ,
  HC,
  Pearson,
  FE,
  FECS,
};

enum class Direction { LargeIsSignificant, SmallIsSignificant };

enum class Calibration { Analytic, MonteCarlo, CauchyApprox };

struct MethodSpec {
  Method method = Method::Fisher;
  // TFhard/TFsoft truncation level.
  double tau = 0.05;
  // Adaptive grid for the omnibus TF variants.
  std::vector<double> tau_set = {0.01, 0.05, 0.5, 1.0};
  // Truncation level of the Cauchy transform (TruncCauchy, FE, FECS).
  double delta = 0.01;
  // Pareto tail index.
  double gamma = 1.0;
};

MethodSpec make_spec(Method m);

// Throws UsageError on parameters outside their domain.
void validate_spec(const MethodSpec& spec);

Method method_from_name(const std::string& name);
std::string method_name(Method m);

// Canonical identifier including parameters, e.g. "tfhard_tau0.05".
// Used for table cache keys and output rows.
std::string method_id(const MethodSpec& spec);

// Whether large or small values of the statistic indicate significance.
Direction method_direction(Method m);

// Methods that consume one-sided (left, right) p-value pairs.
bool takes_onesided_pairs(Method m);

// Exact zeros are clamped to this floor before any log/tan transform.
inline constexpr double kPFloor = 1e-15;

struct ValidationInfo {
  int clamped = 0;  // number of exact-zero inputs raised to the floor
};

// Checks p in [0,1] and finite, K >= 1; clamps exact zeros to `floor`.
std::vector<double> validate_pvalues(std::vector<double> p,
                                     ValidationInfo* info = nullptr,
                                     double floor = kPFloor);

struct CombineResult {
  double statistic = 0.0;
  double pvalue = 1.0;
  Calibration calibration = Calibration::MonteCarlo;
  // AFp extras: 1-based count of selected studies and the selection
  // indicator in the original input order.
  std::optional<int> j_star;
  std::optional<std::vector<std::uint8_t>> selected;
};

std::string calibration_name(Calibration c);

}  // namespace pcombine
