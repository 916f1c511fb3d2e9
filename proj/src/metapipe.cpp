#include "pcombine/metapipe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "pcombine/csv.hpp"
#include "pcombine/parallel.hpp"
#include "pcombine/special.hpp"

namespace pcombine {

namespace {

// Gaussian elimination with partial pivoting on the 3x3 normal equations;
// a collapsed pivot means the design columns are linearly dependent.
std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> A,
                             std::array<double, 3> b) {
  double scale = 0.0;
  for (const auto& row : A)
    for (double v : row) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) throw DataError("design matrix is rank deficient");
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    if (std::fabs(A[piv][c]) <= 1e-12 * scale)
      throw DataError("design matrix is rank deficient");
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = A[r][c] / A[c][c];
      for (int k = c; k < 3; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::array<double, 3> x{};
  for (int c = 2; c >= 0; --c) {
    double s = b[c];
    for (int k = c + 1; k < 3; ++k) s -= A[c][k] * x[k];
    x[c] = s / A[c][c];
  }
  return x;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

RegressionFit fit_feature_regression(const std::vector<double>& y,
                                     const std::vector<double>& age,
                                     const std::vector<double>& sex) {
  const std::size_t m = y.size();
  if (age.size() != m || sex.size() != m)
    throw DataError("covariate length does not match response length");
  if (m < 4) throw DataError("need at least 4 subjects (df = m - 3)");
  for (double v : y)
    if (!std::isfinite(v)) throw DataError("non-finite response value");

  RegressionFit out;  // defaults encode the constant-response answer
  bool constant = true;
  for (std::size_t i = 1; i < m && constant; ++i) constant = y[i] == y[0];
  if (constant) return out;

  std::array<std::array<double, 3>, 3> A{};
  std::array<double, 3> b{};
  for (std::size_t i = 0; i < m; ++i) {
    const double row[3] = {1.0, age[i], sex[i]};
    for (int r = 0; r < 3; ++r) {
      for (int c = r; c < 3; ++c) A[r][c] += row[r] * row[c];
      b[r] += row[r] * y[i];
    }
  }
  for (int r = 1; r < 3; ++r)
    for (int c = 0; c < r; ++c) A[r][c] = A[c][r];

  const auto beta = solve3(A, b);
  const auto inv_age = solve3(A, {0.0, 1.0, 0.0});  // column of A^-1

  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - beta[0] - beta[1] * age[i] - beta[2] * sex[i];
    rss += r * r;
  }
  const double df = static_cast<double>(m) - 3.0;
  const double var = (rss / df) * inv_age[1];

  out.beta_age = beta[1];
  out.se = var > 0.0 ? std::sqrt(var) : 0.0;
  if (out.se == 0.0) {
    // Perfect fit: an exact zero slope is a null result, anything else is
    // infinitely significant.
    if (out.beta_age == 0.0) return out;
    out.t = std::copysign(std::numeric_limits<double>::infinity(),
                          out.beta_age);
    out.p_two = 0.0;
    out.p_left = out.beta_age > 0.0 ? 0.0 : 1.0;
    out.p_right = 1.0 - out.p_left;
    return out;
  }
  out.t = out.beta_age / out.se;
  out.p_two = 2.0 * special::student_t_sf(std::fabs(out.t), df);
  out.p_left = special::student_t_sf(out.t, df);
  out.p_right = special::student_t_cdf(out.t, df);
  return out;
}

std::vector<double> bh_qvalues(const std::vector<double>& pvalues) {
  const std::size_t m = pvalues.size();
  for (double v : pvalues)
    if (!(v >= 0.0 && v <= 1.0))
      throw DataError("q-value input outside [0,1]");
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return pvalues[a] < pvalues[b];
  });
  std::vector<double> q(m);
  double running = 1.0;
  for (std::size_t i = m; i-- > 0;) {
    running = std::min(
        running, pvalues[idx[i]] * static_cast<double>(m) /
                     static_cast<double>(i + 1));
    q[idx[i]] = running;
  }
  return q;
}

double association_measure(double beta, double p_left, double p_right) {
  const double pmin = std::max(std::min(p_left, p_right), kPFloor);
  return -sign_of(beta) * std::log10(pmin);
}

int sign_score(const std::vector<double>& betas,
               const std::vector<double>& p_min, double threshold) {
  if (betas.size() != p_min.size())
    throw DataError("sign_score: beta and p-value lengths differ");
  int s = 0;
  for (std::size_t i = 0; i < betas.size(); ++i)
    if (p_min[i] <= threshold) s += static_cast<int>(sign_of(betas[i]));
  return s;
}

std::map<std::string, double> combine_feature(
    const std::vector<const Combiner*>& methods,
    const std::vector<double>& p_two, const std::vector<double>& p_left,
    const std::vector<double>& p_right) {
  std::map<std::string, double> out;
  for (const Combiner* c : methods) {
    const std::size_t K = static_cast<std::size_t>(c->K());
    if (p_two.size() != K || p_left.size() != K || p_right.size() != K)
      throw DataError("study count does not match the combiner's K");
    const CombineResult res = c->pair_input()
                                  ? c->combine_pair(p_left, p_right)
                                  : c->combine(p_two);
    out[method_id(c->spec())] = res.pvalue;
  }
  return out;
}

std::map<std::string, OverlapCategory> categorize_genes(
    const std::vector<FeatureMetaResult>& results, const std::string& method_a,
    const std::string& method_b, double q_cutoff) {
  std::map<std::string, OverlapCategory> out;
  for (const auto& r : results) {
    const auto ia = r.q_value.find(method_a);
    const auto ib = r.q_value.find(method_b);
    if (ia == r.q_value.end())
      throw UsageError("no q-values for method " + method_a);
    if (ib == r.q_value.end())
      throw UsageError("no q-values for method " + method_b);
    const bool sa = ia->second <= q_cutoff;
    const bool sb = ib->second <= q_cutoff;
    if (sa && sb)
      out[r.feature_id] = OverlapCategory::Both;
    else if (sa)
      out[r.feature_id] = OverlapCategory::OnlyA;
    else if (sb)
      out[r.feature_id] = OverlapCategory::OnlyB;
  }
  return out;
}

MetaRun run_meta(const std::vector<ExpressionStudy>& studies,
                 const MetaOptions& opts, TableProvider& provider) {
  if (studies.empty()) throw DataError("no studies to analyze");
  if (opts.methods.empty()) throw UsageError("no combination methods given");
  const int K = static_cast<int>(studies.size());

  std::vector<std::map<std::string, std::size_t>> index(K);
  std::set<std::string> all_ids;
  for (int k = 0; k < K; ++k) {
    const auto& st = studies[k];
    if (st.response.size() != st.feature_ids.size())
      throw DataError(st.study_id + ": response rows != feature ids");
    for (std::size_t i = 0; i < st.feature_ids.size(); ++i) {
      if (!index[k].emplace(st.feature_ids[i], i).second)
        throw DataError(st.study_id + ": duplicate feature " +
                        st.feature_ids[i]);
      all_ids.insert(st.feature_ids[i]);
    }
  }

  MetaRun run;
  std::vector<std::string> common;
  for (const auto& fid : all_ids) {
    int missing = -1;
    for (int k = 0; k < K && missing < 0; ++k)
      if (index[k].find(fid) == index[k].end()) missing = k;
    if (missing >= 0)
      run.skipped.push_back(fid + ": absent from study " +
                            studies[missing].study_id);
    else
      common.push_back(fid);
  }

  std::vector<Combiner> combs;
  combs.reserve(opts.methods.size());
  for (const auto& m : opts.methods) combs.emplace_back(m, K, provider);
  std::vector<const Combiner*> cptr;
  cptr.reserve(combs.size());
  for (const auto& c : combs) cptr.push_back(&c);

  std::vector<std::vector<double>> sexd(K);
  for (int k = 0; k < K; ++k)
    sexd[k].assign(studies[k].sex.begin(), studies[k].sex.end());

  struct Slot {
    bool ok = false;
    std::string err;
    FeatureMetaResult res;
  };
  std::vector<Slot> slots(common.size());

  parallel_for(
      common.size(),
      [&](std::size_t lo, std::size_t hi) {
        std::vector<double> p2(K), pl(K), pr(K), betas(K), pmin(K);
        for (std::size_t i = lo; i < hi; ++i) {
          Slot& s = slots[i];
          s.res.feature_id = common[i];
          s.res.fits.resize(K);
          try {
            for (int k = 0; k < K; ++k) {
              const auto& st = studies[k];
              const auto& y = st.response[index[k].at(common[i])];
              const RegressionFit f =
                  fit_feature_regression(y, st.age, sexd[k]);
              s.res.fits[k].study_id = st.study_id;
              s.res.fits[k].fit = f;
              s.res.fits[k].e_measure =
                  association_measure(f.beta_age, f.p_left, f.p_right);
              p2[k] = f.p_two;
              pl[k] = f.p_left;
              pr[k] = f.p_right;
              betas[k] = f.beta_age;
              pmin[k] = std::min(f.p_left, f.p_right);
            }
            s.res.combined_p = combine_feature(cptr, p2, pl, pr);
            s.res.s_sign = sign_score(betas, pmin, opts.sign_threshold);
            s.ok = true;
          } catch (const std::exception& e) {
            s.err = e.what();
          }
        }
      },
      opts.threads);

  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].ok)
      run.results.push_back(std::move(slots[i].res));
    else
      run.skipped.push_back(common[i] + ": " + slots[i].err);
  }

  for (const auto& m : opts.methods) {
    const std::string id = method_id(m);
    std::vector<double> ps;
    ps.reserve(run.results.size());
    for (const auto& r : run.results) ps.push_back(r.combined_p.at(id));
    const auto qs = bh_qvalues(ps);
    for (std::size_t i = 0; i < qs.size(); ++i)
      run.results[i].q_value[id] = qs[i];
  }
  return run;
}

// --- synthetic studies --------------------------------------------------------

SignalMode signal_mode_from_name(const std::string& name) {
  if (name == "null") return SignalMode::Null;
  if (name == "concordant+" || name == "concordant")
    return SignalMode::ConcordantPos;
  if (name == "concordant-") return SignalMode::ConcordantNeg;
  if (name == "discordant") return SignalMode::Discordant;
  throw UsageError("unknown signal mode: " + name);
}

std::string signal_mode_name(SignalMode m) {
  switch (m) {
    case SignalMode::Null: return "null";
    case SignalMode::ConcordantPos: return "concordant+";
    case SignalMode::ConcordantNeg: return "concordant-";
    case SignalMode::Discordant: return "discordant";
  }
  return "?";
}

SynthResult synth_studies(const SynthConfig& cfg) {
  if (cfg.n_studies < 1) throw UsageError("need at least one study");
  if (cfg.subjects_per_study < 4)
    throw UsageError("need at least 4 subjects per study");
  int total = 0;
  for (const auto& b : cfg.blocks) {
    if (b.n_features < 0) throw UsageError("negative feature count");
    if (!(b.study_frac > 0.0 && b.study_frac <= 1.0))
      throw UsageError("study_frac must lie in (0,1]");
    if (!(b.magnitude >= 0.0)) throw UsageError("magnitude must be >= 0");
    total += b.n_features;
  }
  if (total < 1) throw UsageError("no features configured");

  SynthResult out;
  out.studies.resize(cfg.n_studies);
  char buf[32];
  for (int k = 0; k < cfg.n_studies; ++k) {
    auto& st = out.studies[k];
    std::snprintf(buf, sizeof buf, "s%02d", k + 1);
    st.study_id = buf;
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(k), kStreamSynthDesign);
    st.age.resize(cfg.subjects_per_study);
    st.sex.resize(cfg.subjects_per_study);
    st.subject_ids.resize(cfg.subjects_per_study);
    for (int j = 0; j < cfg.subjects_per_study; ++j) {
      st.age[j] = 1.0 + 29.0 * rng.uniform();
      st.sex[j] = rng.uniform() < 0.5 ? 1 : 0;
      std::snprintf(buf, sizeof buf, "p%03d", j + 1);
      st.subject_ids[j] = buf;
    }
    st.feature_ids.reserve(total);
    st.response.reserve(total);
  }

  out.truth.reserve(total);
  int f = 0;
  for (const auto& blk : cfg.blocks) {
    for (int bf = 0; bf < blk.n_features; ++bf, ++f) {
      std::snprintf(buf, sizeof buf, "f%05d", f + 1);
      SynthTruth tr;
      tr.feature_id = buf;
      tr.mode = blk.mode;
      tr.beta_age.assign(cfg.n_studies, 0.0);
      if (blk.mode != SignalMode::Null && blk.magnitude > 0.0) {
        int ns = std::max(
            1, static_cast<int>(std::llround(blk.study_frac * cfg.n_studies)));
        ns = std::min(ns, cfg.n_studies);
        for (int k = 0; k < ns; ++k) {
          double sgn = 1.0;
          if (blk.mode == SignalMode::ConcordantNeg)
            sgn = -1.0;
          else if (blk.mode == SignalMode::Discordant)
            sgn = k < (ns + 1) / 2 ? 1.0 : -1.0;
          tr.beta_age[k] = sgn * blk.magnitude;
        }
      }
      for (int k = 0; k < cfg.n_studies; ++k) {
        auto& st = out.studies[k];
        CounterRng rng(cfg.seed, static_cast<std::uint64_t>(f),
                       kStreamSynthNoise + static_cast<std::uint32_t>(k));
        std::vector<double> y(cfg.subjects_per_study);
        for (int j = 0; j < cfg.subjects_per_study; ++j)
          y[j] = tr.beta_age[k] * st.age[j] + 0.5 * st.sex[j] + rng.normal();
        st.feature_ids.push_back(tr.feature_id);
        st.response.push_back(std::move(y));
      }
      out.truth.push_back(std::move(tr));
    }
  }
  return out;
}

// --- CSV interfaces -----------------------------------------------------------

std::vector<DesignRow> read_design_csv(const std::string& path) {
  const auto rows = csv::read_table(path);
  const auto& h = rows[0];
  if (h.size() != 4 || h[0] != "study_id" || h[1] != "subject_id" ||
      h[2] != "age" || h[3] != "sex")
    throw DataError(path + ": expected header study_id,subject_id,age,sex");
  std::vector<DesignRow> out;
  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 4)
      throw DataError(path + ": row " + std::to_string(r + 1) +
                      " does not have 4 fields");
    DesignRow d;
    d.study_id = rows[r][0];
    d.subject_id = rows[r][1];
    d.age = csv::parse_double(rows[r][2], path + " age");
    const long long sex = csv::parse_int(rows[r][3], path + " sex");
    if (sex != 0 && sex != 1)
      throw DataError(path + ": sex must be 0 or 1, got " + rows[r][3]);
    d.sex = static_cast<int>(sex);
    out.push_back(std::move(d));
  }
  return out;
}

ExpressionStudy read_study_csv(const std::string& path,
                               const std::string& study_id,
                               const std::vector<DesignRow>& design) {
  const auto rows = csv::read_table(path);
  const auto& h = rows[0];
  if (h.empty() || h[0] != "feature_id")
    throw DataError(path + ": expected header feature_id,<subject>,...");
  const std::size_t m = h.size() - 1;
  if (m < 4)
    throw DataError(path + ": need at least 4 subject columns, got " +
                    std::to_string(m));

  std::map<std::string, const DesignRow*> lookup;
  for (const auto& d : design)
    if (d.study_id == study_id) lookup[d.subject_id] = &d;

  ExpressionStudy st;
  st.study_id = study_id;
  st.subject_ids.assign(h.begin() + 1, h.end());
  st.age.resize(m);
  st.sex.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto it = lookup.find(st.subject_ids[j]);
    if (it == lookup.end())
      throw DataError(path + ": subject " + st.subject_ids[j] +
                      " has no design row for study " + study_id);
    st.age[j] = it->second->age;
    st.sex[j] = it->second->sex;
  }

  st.feature_ids.reserve(rows.size() - 1);
  st.response.reserve(rows.size() - 1);
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != h.size())
      throw DataError(path + ": row " + std::to_string(r + 1) +
                      " has the wrong field count");
    if (!seen.insert(rows[r][0]).second)
      throw DataError(path + ": duplicate feature " + rows[r][0]);
    std::vector<double> y(m);
    for (std::size_t j = 0; j < m; ++j)
      y[j] = csv::parse_double(rows[r][j + 1],
                               path + " row " + std::to_string(r + 1));
    st.feature_ids.push_back(rows[r][0]);
    st.response.push_back(std::move(y));
  }
  return st;
}

void write_meta_results_csv(const MetaRun& run, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f << "feature_id,method,combined_p,q_value,s_sign\n";
  char buf[256];
  for (const auto& r : run.results) {
    for (const auto& [id, p] : r.combined_p) {
      std::snprintf(buf, sizeof buf, "%s,%s,%.10g,%.10g,%d\n",
                    r.feature_id.c_str(), id.c_str(), p, r.q_value.at(id),
                    r.s_sign);
      f << buf;
    }
  }
}

void write_emeasure_csv(const MetaRun& run, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f << "feature_id,study_id,beta_sign,e_measure\n";
  char buf[256];
  for (const auto& r : run.results) {
    for (const auto& sf : r.fits) {
      std::snprintf(buf, sizeof buf, "%s,%s,%d,%.6g\n", r.feature_id.c_str(),
                    sf.study_id.c_str(),
                    static_cast<int>(sign_of(sf.fit.beta_age)), sf.e_measure);
      f << buf;
    }
  }
}

void write_synth_csvs(const SynthResult& synth, const std::string& dir) {
  std::filesystem::create_directories(dir);
  char buf[64];

  {
    std::ofstream f(dir + "/design.csv", std::ios::trunc);
    if (!f) throw DataError("cannot write " + dir + "/design.csv");
    f << "study_id,subject_id,age,sex\n";
    for (const auto& st : synth.studies)
      for (std::size_t j = 0; j < st.subject_ids.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%s,%s,%.9g,%d\n", st.study_id.c_str(),
                      st.subject_ids[j].c_str(), st.age[j], st.sex[j]);
        f << buf;
      }
  }

  for (const auto& st : synth.studies) {
    std::ofstream f(dir + "/" + st.study_id + ".csv", std::ios::trunc);
    if (!f) throw DataError("cannot write " + dir + "/" + st.study_id + ".csv");
    f << "feature_id";
    for (const auto& s : st.subject_ids) f << ',' << s;
    f << '\n';
    for (std::size_t i = 0; i < st.feature_ids.size(); ++i) {
      f << st.feature_ids[i];
      for (double v : st.response[i]) {
        std::snprintf(buf, sizeof buf, ",%.9g", v);
        f << buf;
      }
      f << '\n';
    }
  }

  {
    std::ofstream f(dir + "/truth.csv", std::ios::trunc);
    if (!f) throw DataError("cannot write " + dir + "/truth.csv");
    f << "feature_id,mode,study_id,beta_age\n";
    for (const auto& tr : synth.truth)
      for (std::size_t k = 0; k < tr.beta_age.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%.9g\n",
                      tr.feature_id.c_str(), signal_mode_name(tr.mode).c_str(),
                      synth.studies[k].study_id.c_str(), tr.beta_age[k]);
        f << buf;
      }
  }
}

}  // namespace pcombine
