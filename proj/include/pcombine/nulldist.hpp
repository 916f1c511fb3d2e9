#pragma once

// Null-distribution calibration: analytic survival functions where they
// exist, Monte Carlo reference tables otherwise, omnibus (min-p over a tau
// grid) calibration, and the Combiner facade that ties a MethodSpec to its
// statistic + p-value + critical-value paths.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pcombine/combiners.hpp"
#include "pcombine/rng.hpp"
#include "pcombine/types.hpp"

namespace pcombine {

// Stream tags keeping table construction, power simulation, synthetic data
// and slope runs on disjoint counter streams for one user-level seed.
inline constexpr std::uint32_t kStreamTable = 1;
inline constexpr std::uint32_t kStreamSim = 2;
inline constexpr std::uint32_t kStreamSynthDesign = 3;
inline constexpr std::uint32_t kStreamSlope = 4;
inline constexpr std::uint32_t kStreamSynthNoise = 16;  // + study index

struct NullTable {
  MethodSpec method;
  int K = 0;
  std::int64_t B = 0;
  std::uint64_t seed = 0;  // user-level seed recorded as provenance
  Direction direction = Direction::LargeIsSignificant;
  std::vector<double> stats;  // ascending
  // Set by load_table so callers can verify the file against the spec they
  // asked for (method specs don't round-trip through the id string).
  std::string method_id_hint;
};

double chi2_sf(double x, int df);

bool has_analytic_pvalue(Method m);
double analytic_pvalue(const MethodSpec& spec, double stat, int K);

inline constexpr std::int64_t kDefaultMaxTableCells = 1'000'000'000;

// Statistic of one null replicate; draws whatever it needs from the rng.
using NullStatFn = std::function<double(CounterRng&)>;

// Generic builder: B replicates, replicate b drawn from
// CounterRng(mix_seed(seed, id-hash), b, kStreamTable).
NullTable build_null_table_fn(const MethodSpec& spec, int K, std::int64_t B,
                              std::uint64_t seed, Direction direction,
                              const NullStatFn& fn, unsigned threads = 0,
                              std::int64_t max_cells = kDefaultMaxTableCells);

// Builder for every method whose statistic is a pure function of the
// replicate's uniforms (simple stats plus the pair-input Pearson).
NullTable build_null_table(const MethodSpec& spec, int K, std::int64_t B,
                           std::uint64_t seed, unsigned threads = 0,
                           std::int64_t max_cells = kDefaultMaxTableCells);

// (1 + #{at least as extreme}) / (B + 1); ties inclusive.
double mc_pvalue(double stat, const NullTable& table);

// Empirical (1-alpha) (large-is-significant) or alpha (small) quantile at
// ceiling rank; requires alpha in (0, 0.5] and B*alpha >= 100.
double critical_value(const NullTable& table, double alpha);

// --- omnibus truncated-Fisher -------------------------------------------

struct OmnibusTables {
  MethodSpec spec;  // OTFhard/OTFsoft with its tau_set
  int K = 0;
  std::int64_t B = 0;
  std::uint64_t seed = 0;
  std::vector<NullTable> per_tau;  // LargeIsSignificant, common draws
  NullTable minstat;               // SmallIsSignificant
};

// Single pass over B shared null draws fills every per-tau table; the
// min-over-tau statistic of each draw, self-ranked against those same
// tables, forms the minstat table (the usual reuse of one permutation set
// for both layers of a min-p procedure).
OmnibusTables build_omnibus_tables(const MethodSpec& spec, int K,
                                   std::int64_t B, std::uint64_t seed,
                                   unsigned threads = 0,
                                   std::int64_t max_cells = kDefaultMaxTableCells);

CombineResult omnibus_tf_pvalue(Method variant, const std::vector<double>& p,
                                const std::vector<double>& tau_set,
                                const std::vector<NullTable>& tables,
                                const NullTable& minstat_table);

// --- table cache ----------------------------------------------------------

std::string table_cache_key(const MethodSpec& spec, int K, std::int64_t B,
                            std::uint64_t seed);
void save_table(const NullTable& table, const std::string& path);
NullTable load_table(const std::string& path);

// --- provider & combiner ---------------------------------------------------

enum class CalibrationMode {
  Auto,    // analytic > cauchy-approx (FE/FECS) > Monte Carlo
  ForceMC, // Monte Carlo for every method
  Cauchy,  // cauchy-approx additionally for TruncCauchy; others as Auto
};

struct CalibrationOptions {
  std::int64_t B = 100000;
  std::uint64_t seed = 20240817ull;
  unsigned threads = 0;
  std::string table_dir;  // empty: in-memory only
  std::int64_t max_cells = kDefaultMaxTableCells;
  CalibrationMode mode = CalibrationMode::Auto;
};

class TableProvider {
 public:
  explicit TableProvider(CalibrationOptions opt) : opt_(std::move(opt)) {}

  const NullTable& get(const MethodSpec& spec, int K);
  // Table for a statistic the generic builder can't draw by itself
  // (FE/FECS, whose statistic embeds an inner AFp table).
  const NullTable& get_custom(const MethodSpec& spec, int K,
                              Direction direction, const NullStatFn& fn);
  const OmnibusTables& get_omnibus(const MethodSpec& spec, int K);
  const CalibrationOptions& options() const { return opt_; }
  // Cache keys touched so far (for run manifests).
  std::vector<std::string> used_keys() const;

 private:
  CalibrationOptions opt_;
  std::map<std::string, NullTable> tables_;
  std::map<std::string, OmnibusTables> omnibus_;
  std::vector<std::string> used_;
};

// One method bound to a K, its tables, and a p-value path.
class Combiner {
 public:
  Combiner(MethodSpec spec, int K, TableProvider& provider);

  const MethodSpec& spec() const { return spec_; }
  int K() const { return K_; }
  Direction direction() const { return direction_; }
  Calibration calibration() const { return calibration_; }

  bool pair_input() const { return takes_onesided_pairs(spec_.method); }

  double statistic(const std::vector<double>& p_two) const;
  double statistic_pair(const std::vector<double>& p_left,
                        const std::vector<double>& p_right) const;

  double pvalue_of_stat(double stat) const;

  CombineResult combine(const std::vector<double>& p_two) const;
  CombineResult combine_pair(const std::vector<double>& p_left,
                             const std::vector<double>& p_right) const;

  // Rejection threshold on the statistic scale at level alpha.
  double critical_stat(double alpha) const;
  bool rejects_stat(double stat, double crit) const;

 private:
  MethodSpec spec_;
  int K_;
  Direction direction_;
  Calibration calibration_;
  const NullTable* table_ = nullptr;       // own-method MC table
  const OmnibusTables* omni_ = nullptr;    // omnibus variants
  const NullTable* afp_inner_ = nullptr;   // FE / FECS constituent
};

}  // namespace pcombine
