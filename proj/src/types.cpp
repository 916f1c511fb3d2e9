#include "pcombine/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace pcombine {

MethodSpec make_spec(Method m) {
  MethodSpec s;
  s.method = m;
  return s;
}

namespace {

const std::map<std::string, Method>& name_table() {
  static const std::map<std::string, Method> t = {
      {"fisher", Method::Fisher},
      {"stouffer", Method::Stouffer},
      {"minp", Method::MinP},
      {"afp", Method::AFp},
      {"afz", Method::AFz},
      {"tfhard", Method::TFhard},
      {"tfsoft", Method::TFsoft},
      {"otfhard", Method::OTFhard},
      {"otfsoft", Method::OTFsoft},
      {"cauchy", Method::Cauchy},
      {"trunccauchy", Method::TruncCauchy},
      {"harmonicmean", Method::HarmonicMean},
      {"paretorv", Method::ParetoRV},
      {"bj", Method::BJ},
      {"hc", Method::HC},
      {"pearson", Method::Pearson},
      {"fe", Method::FE},
      {"fecs", Method::FECS},
  };
  return t;
}

// Shortest %g-style rendering that round-trips the values we accept.
std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace

Method method_from_name(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  // A couple of aliases that show up in hand-written configs.
  if (lower == "hm") lower = "harmonicmean";
  if (lower == "rv") lower = "paretorv";
  auto it = name_table().find(lower);
  if (it == name_table().end())
    throw UsageError("unknown method: " + name);
  return it->second;
}

std::string method_name(Method m) {
  for (const auto& [k, v] : name_table())
    if (v == m) return k;
  return "?";
}

std::string method_id(const MethodSpec& spec) {
  std::string base = method_name(spec.method);
  switch (spec.method) {
    case Method::TFhard:
    case Method::TFsoft:
      return base + "_tau" + num(spec.tau);
    case Method::OTFhard:
    case Method::OTFsoft: {
      std::string s = base + "_T";
      for (size_t i = 0; i < spec.tau_set.size(); ++i)
        s += (i ? ":" : "") + num(spec.tau_set[i]);
      return s;
    }
    case Method::TruncCauchy:
      return base + "_d" + num(spec.delta);
    case Method::FE:
    case Method::FECS:
      return base + "_d" + num(spec.delta);
    case Method::ParetoRV:
      return base + "_g" + num(spec.gamma);
    default:
      return base;
  }
}

void validate_spec(const MethodSpec& spec) {
  auto in01closed_right = [](double t) {
    return std::isfinite(t) && t > 0.0 && t <= 1.0;
  };
  switch (spec.method) {
    case Method::TFhard:
    case Method::TFsoft:
      if (!in01closed_right(spec.tau))
        throw UsageError("tau must lie in (0,1]");
      break;
    case Method::OTFhard:
    case Method::OTFsoft: {
      if (spec.tau_set.empty()) throw UsageError("tau_set must be non-empty");
      double prev = 0.0;
      for (double t : spec.tau_set) {
        if (!in01closed_right(t) || t <= prev)
          throw UsageError("tau_set must be strictly increasing within (0,1]");
        prev = t;
      }
      break;
    }
    case Method::TruncCauchy:
    case Method::FE:
    case Method::FECS:
      if (!std::isfinite(spec.delta) || spec.delta <= 0.0 || spec.delta >= 1.0)
        throw UsageError("delta must lie in (0,1)");
      break;
    case Method::ParetoRV:
      if (!std::isfinite(spec.gamma) || spec.gamma <= 0.0)
        throw UsageError("gamma must be positive");
      break;
    default:
      break;
  }
}

Direction method_direction(Method m) {
  switch (m) {
    case Method::MinP:
    case Method::HarmonicMean:  // statistic is the HM of p-values itself
    case Method::OTFhard:
    case Method::OTFsoft:
    case Method::Pearson:
      return Direction::SmallIsSignificant;
    default:
      return Direction::LargeIsSignificant;
  }
}

bool takes_onesided_pairs(Method m) {
  return m == Method::Pearson || m == Method::FECS;
}

std::vector<double> validate_pvalues(std::vector<double> p, ValidationInfo* info,
                                     double floor) {
  if (p.empty()) throw DataError("empty p-value vector");
  int clamped = 0;
  for (double& v : p) {
    if (!(v >= 0.0 && v <= 1.0))  // catches NaN as well
      throw DataError("p-value outside [0,1]: " + std::to_string(v));
    if (v == 0.0) {
      v = floor;
      ++clamped;
    }
  }
  if (info) info->clamped += clamped;
  return p;
}

std::string calibration_name(Calibration c) {
  switch (c) {
    case Calibration::Analytic: return "analytic";
    case Calibration::MonteCarlo: return "mc";
    case Calibration::CauchyApprox: return "cauchy-approx";
  }
  return "?";
}

}  // namespace pcombine
