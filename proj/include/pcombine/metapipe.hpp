#pragma once

// Feature-by-study meta-analysis: per-feature OLS against age (adjusting for
// sex), one/two-sided p-value extraction, combination across studies, BH
// q-values, signed association scores, and a synthetic-study generator.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pcombine/nulldist.hpp"

namespace pcombine {

struct ExpressionStudy {
  std::string study_id;
  std::vector<std::string> feature_ids;            // row labels
  std::vector<std::vector<double>> response;       // features x subjects
  std::vector<std::string> subject_ids;
  std::vector<double> age;                         // per subject
  std::vector<int> sex;                            // 0/1 per subject
};

struct RegressionFit {
  double beta_age = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p_two = 1.0;
  double p_left = 0.5;   // SF_t(t): small when beta_age is large positive
  double p_right = 0.5;  // CDF_t(t)
};

// OLS of y on [1, age, sex]; t = beta_age / se with df = m - 3. A constant
// y is an exact zero fit (t = 0); a rank-deficient design throws DataError.
RegressionFit fit_feature_regression(const std::vector<double>& y,
                                     const std::vector<double>& age,
                                     const std::vector<double>& sex);

// q_(i) = min_{j >= i} m p_(j) / j, capped at 1, mapped back to input order.
std::vector<double> bh_qvalues(const std::vector<double>& pvalues);

// E = -sign(beta) * log10(min{p_left, p_right}); the min is floored at 1e-15.
double association_measure(double beta, double p_left, double p_right);

// sum_k sign(beta_k) * 1{min(pL_k, pR_k) <= threshold}
int sign_score(const std::vector<double>& betas,
               const std::vector<double>& p_min, double threshold = 0.05);

// Per-method combined p for one feature: pair-input methods consume the
// one-sided pair, everything else the two-sided vector. Keyed by method_id.
std::map<std::string, double> combine_feature(
    const std::vector<const Combiner*>& methods,
    const std::vector<double>& p_two, const std::vector<double>& p_left,
    const std::vector<double>& p_right);

struct StudyFit {
  std::string study_id;
  RegressionFit fit;
  double e_measure = 0.0;
};

struct FeatureMetaResult {
  std::string feature_id;
  std::vector<StudyFit> fits;                // study order of the input
  std::map<std::string, double> combined_p;  // method_id -> p
  std::map<std::string, double> q_value;     // method_id -> BH q
  int s_sign = 0;
};

enum class OverlapCategory { OnlyA, Both, OnlyB };

// Partition of the features significant under at least one of the two
// methods at q <= cutoff; everything else is left out of the map.
std::map<std::string, OverlapCategory> categorize_genes(
    const std::vector<FeatureMetaResult>& results, const std::string& method_a,
    const std::string& method_b, double q_cutoff);

struct MetaOptions {
  std::vector<MethodSpec> methods;
  double sign_threshold = 0.05;
  unsigned threads = 0;
};

struct MetaRun {
  std::vector<FeatureMetaResult> results;  // sorted by feature_id
  std::vector<std::string> skipped;        // "feature_id: reason" log records
};

// Complete-case pipeline: features present in every study whose fits all
// succeed; everything else lands in `skipped`.
MetaRun run_meta(const std::vector<ExpressionStudy>& studies,
                 const MetaOptions& opts, TableProvider& provider);

// --- synthetic studies --------------------------------------------------------

enum class SignalMode { Null, ConcordantPos, ConcordantNeg, Discordant };

SignalMode signal_mode_from_name(const std::string& name);
std::string signal_mode_name(SignalMode m);

struct SignalBlock {
  int n_features = 0;
  SignalMode mode = SignalMode::Null;
  double magnitude = 0.04;  // |beta_age| in the signal studies
  double study_frac = 1.0;  // fraction of studies carrying signal
};

struct SynthConfig {
  int n_studies = 8;
  int subjects_per_study = 40;
  std::vector<SignalBlock> blocks;
  std::uint64_t seed = 20240817ull;
};

struct SynthTruth {
  std::string feature_id;
  SignalMode mode = SignalMode::Null;
  std::vector<double> beta_age;  // per-study ground truth
};

struct SynthResult {
  std::vector<ExpressionStudy> studies;
  std::vector<SynthTruth> truth;
};

// Gaussian-noise linear responses: y = beta_age * age + 0.5 * sex + N(0,1),
// age ~ U(1,30), sex ~ Bernoulli(1/2). Discordant features split their
// signal studies half positive, half negative. Deterministic in seed.
SynthResult synth_studies(const SynthConfig& cfg);

// --- CSV interfaces -----------------------------------------------------------

struct DesignRow {
  std::string study_id;
  std::string subject_id;
  double age = 0.0;
  int sex = 0;
};

std::vector<DesignRow> read_design_csv(const std::string& path);

// Study CSV: feature_id column + one column per subject; covariates come
// from the design rows matching (study_id, subject column name).
ExpressionStudy read_study_csv(const std::string& path,
                               const std::string& study_id,
                               const std::vector<DesignRow>& design);

// feature_id,method,combined_p,q_value,s_sign (long format)
void write_meta_results_csv(const MetaRun& run, const std::string& path);
// feature_id,study_id,beta_sign,e_measure
void write_emeasure_csv(const MetaRun& run, const std::string& path);

// <dir>/<study_id>.csv per study + <dir>/design.csv + <dir>/truth.csv
void write_synth_csvs(const SynthResult& synth, const std::string& dir);

}  // namespace pcombine
