#include "pcombine/nulldist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcombine/ensemble.hpp"
#include "pcombine/parallel.hpp"
#include "pcombine/special.hpp"

namespace pcombine {

double chi2_sf(double x, int df) {
  if (x < 0.0) throw DataError("chi2_sf: x must be non-negative");
  if (df < 1) throw DataError("chi2_sf: df must be positive");
  return special::chi2_sf(x, df);
}

bool has_analytic_pvalue(Method m) {
  switch (m) {
    case Method::Fisher:
    case Method::Stouffer:
    case Method::MinP:
    case Method::Cauchy:
      return true;
    default:
      return false;
  }
}

double analytic_pvalue(const MethodSpec& spec, double stat, int K) {
  switch (spec.method) {
    case Method::Fisher:
      return chi2_sf(stat, 2 * K);
    case Method::Stouffer:
      // Sum of K standard normal quantiles is N(0, K) under the null.
      return special::normal_sf(stat / std::sqrt(static_cast<double>(K)));
    case Method::MinP:
      // 1 - (1 - t)^K without cancellation for small t.
      return -std::expm1(K * std::log1p(-stat));
    case Method::Cauchy:
      return special::cauchy_sf(stat);
    default:
      throw UsageError("no analytic null for method " +
                       method_name(spec.method));
  }
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void check_table_guards(int K, std::int64_t B, std::int64_t max_cells) {
  if (B < 1000) throw GuardError("null table needs B >= 1000");
  if (K < 1) throw DataError("K must be >= 1");
  if (static_cast<std::int64_t>(K) * B > max_cells)
    throw GuardError("table budget exceeded: B*K = " +
                     std::to_string(static_cast<std::int64_t>(K) * B) +
                     " > " + std::to_string(max_cells));
}

}  // namespace

NullTable build_null_table_fn(const MethodSpec& spec, int K, std::int64_t B,
                              std::uint64_t seed, Direction direction,
                              const NullStatFn& fn, unsigned threads,
                              std::int64_t max_cells) {
  check_table_guards(K, B, max_cells);
  const std::uint64_t stream_seed = mix_seed(seed, fnv1a64(method_id(spec)));
  NullTable t;
  t.method = spec;
  t.K = K;
  t.B = B;
  t.seed = seed;
  t.direction = direction;
  t.stats.resize(static_cast<size_t>(B));
  parallel_for(
      static_cast<size_t>(B),
      [&](size_t lo, size_t hi) {
        for (size_t b = lo; b < hi; ++b) {
          CounterRng rng(stream_seed, b, kStreamTable);
          t.stats[b] = fn(rng);
        }
      },
      threads);
  std::sort(t.stats.begin(), t.stats.end());
  return t;
}

NullTable build_null_table(const MethodSpec& spec, int K, std::int64_t B,
                           std::uint64_t seed, unsigned threads,
                           std::int64_t max_cells) {
  validate_spec(spec);
  NullStatFn fn;
  if (spec.method == Method::Pearson) {
    fn = [K](CounterRng& rng) {
      std::vector<double> pl(K), pr(K);
      for (int i = 0; i < K; ++i) {
        const double u = rng.uniform();
        pl[i] = u;
        pr[i] = 1.0 - u;
      }
      return pearson_stat(pl, pr);
    };
  } else if (has_simple_stat(spec.method)) {
    fn = [spec, K](CounterRng& rng) {
      std::vector<double> u(K);
      for (int i = 0; i < K; ++i) u[i] = rng.uniform();
      return simple_stat(spec, u);
    };
  } else {
    throw UsageError("method " + method_name(spec.method) +
                     " requires provider-managed tables");
  }
  return build_null_table_fn(spec, K, B, seed, method_direction(spec.method),
                             fn, threads, max_cells);
}

double mc_pvalue(double stat, const NullTable& table) {
  const auto& s = table.stats;
  const double B = static_cast<double>(s.size());
  std::int64_t extreme;
  if (table.direction == Direction::LargeIsSignificant)
    extreme = s.end() - std::lower_bound(s.begin(), s.end(), stat);
  else
    extreme = std::upper_bound(s.begin(), s.end(), stat) - s.begin();
  return (1.0 + extreme) / (B + 1.0);
}

double critical_value(const NullTable& table, double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5))
    throw UsageError("alpha must lie in (0, 0.5]");
  const std::int64_t B = static_cast<std::int64_t>(table.stats.size());
  if (alpha * static_cast<double>(B) < 100.0)
    throw GuardError("B*alpha < 100: tail too thin for a stable quantile");
  const double q = table.direction == Direction::LargeIsSignificant
                       ? 1.0 - alpha
                       : alpha;
  auto rank = static_cast<std::int64_t>(std::ceil(q * static_cast<double>(B) - 1e-6));
  rank = std::max<std::int64_t>(1, std::min(B, rank));
  return table.stats[static_cast<size_t>(rank - 1)];
}

namespace {

double tf_stat_from_nlog2(const std::vector<double>& u,
                          const std::vector<double>& nlog2, double tau,
                          bool hard) {
  double s = 0.0;
  if (hard) {
    for (size_t i = 0; i < u.size(); ++i)
      if (u[i] <= tau) s += nlog2[i];
  } else {
    const double l2tau = 2.0 * std::log(tau);
    for (size_t i = 0; i < u.size(); ++i) {
      const double term = nlog2[i] + l2tau;
      if (term > 0.0) s += term;
    }
  }
  return s;
}

}  // namespace

OmnibusTables build_omnibus_tables(const MethodSpec& spec, int K,
                                   std::int64_t B, std::uint64_t seed,
                                   unsigned threads, std::int64_t max_cells) {
  validate_spec(spec);
  if (spec.method != Method::OTFhard && spec.method != Method::OTFsoft)
    throw UsageError("omnibus tables only exist for the oTF variants");
  check_table_guards(K, B, max_cells);
  const bool hard = spec.method == Method::OTFhard;
  const size_t T = spec.tau_set.size();
  const std::uint64_t stream_seed = mix_seed(seed, fnv1a64(method_id(spec)));

  // One pass of shared null draws fills the raw per-tau statistics.
  std::vector<std::vector<double>> raw(T, std::vector<double>(B));
  parallel_for(
      static_cast<size_t>(B),
      [&](size_t lo, size_t hi) {
        std::vector<double> u(K), nlog2(K);
        for (size_t b = lo; b < hi; ++b) {
          CounterRng rng(stream_seed, b, kStreamTable);
          for (int i = 0; i < K; ++i) {
            u[i] = rng.uniform();
            nlog2[i] = -2.0 * std::log(u[i]);
          }
          for (size_t t = 0; t < T; ++t)
            raw[t][b] = tf_stat_from_nlog2(u, nlog2, spec.tau_set[t], hard);
        }
      },
      threads);

  OmnibusTables out;
  out.spec = spec;
  out.K = K;
  out.B = B;
  out.seed = seed;
  out.per_tau.resize(T);
  for (size_t t = 0; t < T; ++t) {
    NullTable& nt = out.per_tau[t];
    nt.method = make_spec(hard ? Method::TFhard : Method::TFsoft);
    nt.method.tau = spec.tau_set[t];
    nt.K = K;
    nt.B = B;
    nt.seed = seed;
    nt.direction = Direction::LargeIsSignificant;
    nt.stats = raw[t];
    std::sort(nt.stats.begin(), nt.stats.end());
  }

  // Min-over-tau p-value of each shared draw, self-ranked against the same
  // tables (the draw's own statistic counts, keeping T_b in [2/(B+1), 1]).
  NullTable& ms = out.minstat;
  ms.method = spec;
  ms.K = K;
  ms.B = B;
  ms.seed = seed;
  ms.direction = Direction::SmallIsSignificant;
  ms.stats.resize(static_cast<size_t>(B));
  parallel_for(
      static_cast<size_t>(B),
      [&](size_t lo, size_t hi) {
        for (size_t b = lo; b < hi; ++b) {
          double tmin = 2.0;
          for (size_t t = 0; t < T; ++t)
            tmin = std::min(tmin, mc_pvalue(raw[t][b], out.per_tau[t]));
          ms.stats[b] = tmin;
        }
      },
      threads);
  std::sort(ms.stats.begin(), ms.stats.end());
  return out;
}

CombineResult omnibus_tf_pvalue(Method variant, const std::vector<double>& p,
                                const std::vector<double>& tau_set,
                                const std::vector<NullTable>& tables,
                                const NullTable& minstat_table) {
  if (variant != Method::OTFhard && variant != Method::OTFsoft)
    throw UsageError("omnibus_tf_pvalue: variant must be oTFhard or oTFsoft");
  if (tables.size() != tau_set.size() || tables.empty())
    throw UsageError("omnibus_tf_pvalue: one table per tau required");
  const bool hard = variant == Method::OTFhard;
  const Method base = hard ? Method::TFhard : Method::TFsoft;
  for (size_t t = 0; t < tables.size(); ++t) {
    if (tables[t].method.method != base || tables[t].method.tau != tau_set[t] ||
        tables[t].B != tables[0].B)
      throw UsageError("omnibus_tf_pvalue: tables do not match tau_set");
  }
  double tmin = 2.0;
  for (size_t t = 0; t < tables.size(); ++t) {
    const double s = hard ? tfhard_stat(p, tau_set[t]) : tfsoft_stat(p, tau_set[t]);
    tmin = std::min(tmin, mc_pvalue(s, tables[t]));
  }
  CombineResult r;
  r.statistic = tmin;
  r.pvalue = mc_pvalue(tmin, minstat_table);
  r.calibration = Calibration::MonteCarlo;
  return r;
}

// --- cache ------------------------------------------------------------------

std::string table_cache_key(const MethodSpec& spec, int K, std::int64_t B,
                            std::uint64_t seed) {
  std::ostringstream os;
  os << method_id(spec) << "_K" << K << "_B" << B << "_s" << seed;
  return os.str();
}

void save_table(const NullTable& table, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write table cache: " + path);
  f << "pcombine-table v1\n";
  f << "method=" << method_id(table.method) << "\n";
  f << "K=" << table.K << "\n";
  f << "B=" << table.B << "\n";
  f << "seed=" << table.seed << "\n";
  f << "direction="
    << (table.direction == Direction::LargeIsSignificant ? "large" : "small")
    << "\n";
  f << "stats:\n";
  char buf[40];
  for (double s : table.stats) {
    std::snprintf(buf, sizeof buf, "%.17g\n", s);
    f << buf;
  }
  if (!f.good()) throw DataError("short write on table cache: " + path);
}

NullTable load_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot read table cache: " + path);
  std::string line;
  std::getline(f, line);
  if (line != "pcombine-table v1")
    throw DataError("unrecognized table cache format: " + path);
  NullTable t;
  std::string method_str;
  auto field = [&](const std::string& key) {
    std::getline(f, line);
    if (line.rfind(key + "=", 0) != 0)
      throw DataError("malformed table cache header: " + path);
    return line.substr(key.size() + 1);
  };
  method_str = field("method");
  t.K = std::stoi(field("K"));
  t.B = std::stoll(field("B"));
  t.seed = std::stoull(field("seed"));
  const std::string dir = field("direction");
  t.direction = dir == "large" ? Direction::LargeIsSignificant
                               : Direction::SmallIsSignificant;
  std::getline(f, line);
  if (line != "stats:") throw DataError("malformed table cache header: " + path);
  t.stats.reserve(static_cast<size_t>(t.B));
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    t.stats.push_back(std::strtod(line.c_str(), nullptr));
  }
  if (static_cast<std::int64_t>(t.stats.size()) != t.B)
    throw DataError("table cache truncated: " + path);
  // method spec is restored by the caller, which knows the requested spec;
  // stash the id where the provider can verify it.
  t.method = MethodSpec{};
  t.method_id_hint = method_str;
  return t;
}

// --- provider ----------------------------------------------------------------

namespace {

std::string cache_path(const std::string& dir, const std::string& key) {
  return dir + "/" + key + ".tbl";
}

// Try the file cache; returns true when a matching table was loaded.
bool try_load(const std::string& dir, const std::string& key,
              const MethodSpec& spec, int K, std::int64_t B,
              std::uint64_t seed, Direction direction, NullTable* out) {
  if (dir.empty()) return false;
  const std::string path = cache_path(dir, key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return false;
  NullTable t = load_table(path);
  if (t.method_id_hint != method_id(spec) || t.K != K || t.B != B ||
      t.seed != seed || t.direction != direction)
    throw DataError("table cache mismatch for key " + key + " at " + path);
  t.method = spec;
  *out = std::move(t);
  return true;
}

void maybe_save(const std::string& dir, const std::string& key,
                const NullTable& t) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  save_table(t, cache_path(dir, key));
}

}  // namespace

const NullTable& TableProvider::get(const MethodSpec& spec, int K) {
  const std::string key = table_cache_key(spec, K, opt_.B, opt_.seed);
  auto it = tables_.find(key);
  if (it != tables_.end()) return it->second;
  used_.push_back(key);
  NullTable t;
  if (!try_load(opt_.table_dir, key, spec, K, opt_.B, opt_.seed,
                method_direction(spec.method), &t)) {
    t = build_null_table(spec, K, opt_.B, opt_.seed, opt_.threads,
                         opt_.max_cells);
    maybe_save(opt_.table_dir, key, t);
  }
  return tables_.emplace(key, std::move(t)).first->second;
}

const NullTable& TableProvider::get_custom(const MethodSpec& spec, int K,
                                           Direction direction,
                                           const NullStatFn& fn) {
  const std::string key = table_cache_key(spec, K, opt_.B, opt_.seed);
  auto it = tables_.find(key);
  if (it != tables_.end()) return it->second;
  used_.push_back(key);
  NullTable t;
  if (!try_load(opt_.table_dir, key, spec, K, opt_.B, opt_.seed, direction,
                &t)) {
    t = build_null_table_fn(spec, K, opt_.B, opt_.seed, direction, fn,
                            opt_.threads, opt_.max_cells);
    maybe_save(opt_.table_dir, key, t);
  }
  return tables_.emplace(key, std::move(t)).first->second;
}

const OmnibusTables& TableProvider::get_omnibus(const MethodSpec& spec, int K) {
  const std::string key = table_cache_key(spec, K, opt_.B, opt_.seed);
  auto it = omnibus_.find(key);
  if (it != omnibus_.end()) return it->second;
  used_.push_back(key);
  OmnibusTables ot;
  bool loaded = false;
  if (!opt_.table_dir.empty()) {
    // Per-tau tables plus the minstat table live in sibling files.
    loaded = true;
    ot.spec = spec;
    ot.K = K;
    ot.B = opt_.B;
    ot.seed = opt_.seed;
    const bool hard = spec.method == Method::OTFhard;
    ot.per_tau.resize(spec.tau_set.size());
    for (size_t t = 0; loaded && t < spec.tau_set.size(); ++t) {
      MethodSpec ts = make_spec(hard ? Method::TFhard : Method::TFsoft);
      ts.tau = spec.tau_set[t];
      char sub[64];
      std::snprintf(sub, sizeof sub, "_tau%zu", t);
      const std::string k2 = key + sub;
      loaded = try_load(opt_.table_dir, k2, ts, K, opt_.B, opt_.seed,
                        Direction::LargeIsSignificant, &ot.per_tau[t]);
    }
    if (loaded) {
      MethodSpec ms = spec;
      loaded = try_load(opt_.table_dir, key + "_minstat", ms, K, opt_.B,
                        opt_.seed, Direction::SmallIsSignificant, &ot.minstat);
    }
  } else {
    loaded = false;
  }
  if (!loaded) {
    ot = build_omnibus_tables(spec, K, opt_.B, opt_.seed, opt_.threads,
                              opt_.max_cells);
    if (!opt_.table_dir.empty()) {
      for (size_t t = 0; t < ot.per_tau.size(); ++t) {
        char sub[64];
        std::snprintf(sub, sizeof sub, "_tau%zu", t);
        maybe_save(opt_.table_dir, key + sub, ot.per_tau[t]);
      }
      maybe_save(opt_.table_dir, key + "_minstat", ot.minstat);
    }
  }
  return omnibus_.emplace(key, std::move(ot)).first->second;
}

std::vector<std::string> TableProvider::used_keys() const { return used_; }

// --- combiner ----------------------------------------------------------------

Combiner::Combiner(MethodSpec spec, int K, TableProvider& provider)
    : spec_(std::move(spec)), K_(K) {
  validate_spec(spec_);
  if (K < 1) throw DataError("K must be >= 1");
  direction_ = method_direction(spec_.method);
  const CalibrationMode mode = provider.options().mode;
  const Method m = spec_.method;

  const bool force_mc = mode == CalibrationMode::ForceMC;

  if (m == Method::OTFhard || m == Method::OTFsoft) {
    omni_ = &provider.get_omnibus(spec_, K);
    calibration_ = Calibration::MonteCarlo;
    return;
  }

  if (m == Method::FE || m == Method::FECS) {
    MethodSpec afp = make_spec(Method::AFp);
    afp_inner_ = &provider.get(afp, K);
    if (!force_mc) {
      calibration_ = Calibration::CauchyApprox;
      return;
    }
    calibration_ = Calibration::MonteCarlo;
    const NullTable* inner = afp_inner_;
    const MethodSpec s = spec_;
    NullStatFn fn;
    if (m == Method::FE) {
      fn = [K, inner, s](CounterRng& rng) {
        std::vector<double> u(K);
        for (int i = 0; i < K; ++i) u[i] = rng.uniform();
        const double pf = special::chi2_sf(fisher_stat(u), 2.0 * K);
        const double pa = mc_pvalue(afp_stat(u).stat, *inner);
        return fe_stat(pf, pa, s.delta);
      };
    } else {
      fn = [K, inner, s](CounterRng& rng) {
        std::vector<double> pl(K), pr(K);
        for (int i = 0; i < K; ++i) {
          const double v = rng.uniform();
          pl[i] = v;
          pr[i] = 1.0 - v;
        }
        const double pfl = special::chi2_sf(fisher_stat(pl), 2.0 * K);
        const double pfr = special::chi2_sf(fisher_stat(pr), 2.0 * K);
        const double pal = mc_pvalue(afp_stat(pl).stat, *inner);
        const double par = mc_pvalue(afp_stat(pr).stat, *inner);
        return fecs_stat(pfl, pfr, pal, par, s.delta);
      };
    }
    table_ = &provider.get_custom(spec_, K, direction_, fn);
    return;
  }

  if (has_analytic_pvalue(m) && !force_mc) {
    calibration_ = Calibration::Analytic;
    return;
  }
  if (m == Method::TruncCauchy && mode == CalibrationMode::Cauchy) {
    calibration_ = Calibration::CauchyApprox;
    return;
  }
  calibration_ = Calibration::MonteCarlo;
  table_ = &provider.get(spec_, K);
}

double Combiner::statistic(const std::vector<double>& p_two) const {
  if (pair_input())
    throw UsageError(method_name(spec_.method) +
                     " consumes one-sided pairs; two-sided input given");
  if (static_cast<int>(p_two.size()) != K_)
    throw DataError("p-value vector length != K of this combiner");
  if (omni_) {
    double tmin = 2.0;
    const bool hard = spec_.method == Method::OTFhard;
    for (size_t t = 0; t < spec_.tau_set.size(); ++t) {
      const double s = hard ? tfhard_stat(p_two, spec_.tau_set[t])
                            : tfsoft_stat(p_two, spec_.tau_set[t]);
      tmin = std::min(tmin, mc_pvalue(s, omni_->per_tau[t]));
    }
    return tmin;
  }
  if (spec_.method == Method::FE) {
    const double pf = special::chi2_sf(fisher_stat(p_two), 2.0 * K_);
    const double pa = mc_pvalue(afp_stat(p_two).stat, *afp_inner_);
    return fe_stat(pf, pa, spec_.delta);
  }
  return simple_stat(spec_, p_two);
}

double Combiner::statistic_pair(const std::vector<double>& p_left,
                                const std::vector<double>& p_right) const {
  if (!pair_input())
    throw UsageError(method_name(spec_.method) +
                     " does not consume one-sided pairs");
  if (static_cast<int>(p_left.size()) != K_ ||
      static_cast<int>(p_right.size()) != K_)
    throw DataError("p-value vector length != K of this combiner");
  if (spec_.method == Method::Pearson) return pearson_stat(p_left, p_right);
  // FECS
  for (size_t i = 0; i < p_left.size(); ++i)
    if (std::fabs(p_left[i] + p_right[i] - 1.0) > 1e-6)
      throw DataError("inconsistent one-sided pair at index " +
                      std::to_string(i));
  const double pfl = special::chi2_sf(fisher_stat(p_left), 2.0 * K_);
  const double pfr = special::chi2_sf(fisher_stat(p_right), 2.0 * K_);
  const double pal = mc_pvalue(afp_stat(p_left).stat, *afp_inner_);
  const double par = mc_pvalue(afp_stat(p_right).stat, *afp_inner_);
  return fecs_stat(pfl, pfr, pal, par, spec_.delta);
}

double Combiner::pvalue_of_stat(double stat) const {
  switch (calibration_) {
    case Calibration::Analytic:
      return analytic_pvalue(spec_, stat, K_);
    case Calibration::CauchyApprox:
      return special::cauchy_sf(stat);
    case Calibration::MonteCarlo:
      return mc_pvalue(stat, omni_ ? omni_->minstat : *table_);
  }
  return 1.0;
}

CombineResult Combiner::combine(const std::vector<double>& p_two) const {
  const std::vector<double> p = validate_pvalues(p_two);
  CombineResult r;
  if (spec_.method == Method::AFp) {
    const AFpResult a = afp_stat(p);
    r.statistic = a.stat;
    r.j_star = a.j_star;
    r.selected = afp_selected_weights(a.trace, a.j_star);
  } else if (spec_.method == Method::AFz) {
    const AFzResult a = afz_stat(p);
    const AFpResult helper = afp_stat(p);  // reuse its order for the weights
    r.statistic = a.stat;
    r.j_star = a.j_star;
    r.selected = afp_selected_weights(helper.trace, a.j_star);
  } else {
    r.statistic = statistic(p);
  }
  r.pvalue = pvalue_of_stat(r.statistic);
  r.calibration = calibration_;
  return r;
}

CombineResult Combiner::combine_pair(const std::vector<double>& p_left,
                                     const std::vector<double>& p_right) const {
  const std::vector<double> pl = validate_pvalues(p_left);
  const std::vector<double> pr = validate_pvalues(p_right);
  CombineResult r;
  r.statistic = statistic_pair(pl, pr);
  r.pvalue = pvalue_of_stat(r.statistic);
  r.calibration = calibration_;
  return r;
}

namespace {

// Smallest x with sf(x) <= alpha, via bisection on a monotone survival
// function (used for the analytic Fisher critical value).
double invert_sf(const std::function<double(double)>& sf, double alpha,
                 double lo, double hi) {
  while (sf(hi) > alpha) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (sf(mid) > alpha)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double Combiner::critical_stat(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha outside (0,1)");
  switch (calibration_) {
    case Calibration::Analytic:
      switch (spec_.method) {
        case Method::Fisher: {
          const int df = 2 * K_;
          return invert_sf([df](double x) { return special::chi2_sf(x, df); },
                           alpha, 0.0, 1.0 + 2.0 * df);
        }
        case Method::Stouffer:
          return -std::sqrt(static_cast<double>(K_)) *
                 special::normal_quantile(alpha);
        case Method::MinP:
          // 1 - (1-alpha)^{1/K}
          return -std::expm1(std::log1p(-alpha) / K_);
        case Method::Cauchy:
          return special::cauchy_transform(alpha);
        default:
          break;
      }
      throw UsageError("no analytic critical value for this method");
    case Calibration::CauchyApprox:
      return special::cauchy_transform(alpha);
    case Calibration::MonteCarlo:
      return critical_value(omni_ ? omni_->minstat : *table_, alpha);
  }
  throw UsageError("unreachable calibration state");
}

bool Combiner::rejects_stat(double stat, double crit) const {
  return direction_ == Direction::LargeIsSignificant ? stat >= crit
                                                     : stat <= crit;
}

}  // namespace pcombine
