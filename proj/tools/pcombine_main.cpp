// pcombine: combine p-values across studies, calibrate null tables, run
// power/type-I simulations, meta-analyze feature-by-study expression data,
// generate synthetic studies, and estimate Bahadur slopes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcombine/csv.hpp"
#include "pcombine/metapipe.hpp"
#include "pcombine/nulldist.hpp"
#include "pcombine/powersim.hpp"

#ifndef PCOMBINE_VERSION
#define PCOMBINE_VERSION "0.0.0"
#endif

namespace {

using nlohmann::json;
using namespace pcombine;

struct GlobalOpts {
  std::uint64_t seed = 20240817ull;
  unsigned threads = 0;
  std::string table_dir;  // PCOMBINE_TABLE_DIR fallback applied in main
  std::int64_t B = 100000;
  std::string calibrate = "auto";
};

CalibrationOptions make_calibration(const GlobalOpts& g) {
  CalibrationOptions c;
  c.B = g.B;
  c.seed = g.seed;
  c.threads = g.threads;
  c.table_dir = g.table_dir;
  if (g.calibrate == "mc")
    c.mode = CalibrationMode::ForceMC;
  else if (g.calibrate == "cauchy")
    c.mode = CalibrationMode::Cauchy;
  else
    c.mode = CalibrationMode::Auto;
  return c;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> parse_double_list(const std::string& s,
                                      const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split_list(s))
    out.push_back(csv::parse_double(tok, what));
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

struct MethodFlagSet {
  std::string methods;
  double tau = 0.0;
  bool tau_given = false;
  std::string tau_set;
  double delta = 0.0;
  bool delta_given = false;
  double gamma = 0.0;
  bool gamma_given = false;
};

std::vector<MethodSpec> resolve_methods(const MethodFlagSet& mf) {
  std::vector<MethodSpec> specs;
  for (const auto& name : split_list(mf.methods)) {
    MethodSpec spec = make_spec(method_from_name(name));
    if ((spec.method == Method::TFhard || spec.method == Method::TFsoft) &&
        !mf.tau_given)
      throw UsageError(name + " needs an explicit --tau");
    if (mf.tau_given) spec.tau = mf.tau;
    if (!mf.tau_set.empty())
      spec.tau_set = parse_double_list(mf.tau_set, "--tau-set");
    if (mf.delta_given) spec.delta = mf.delta;
    if (mf.gamma_given) spec.gamma = mf.gamma;
    validate_spec(spec);
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw UsageError("no methods given");
  return specs;
}

// One manifest per output directory: enough to replay the run.
void write_manifest(const std::string& dir,
                    const std::vector<std::string>& argv,
                    const GlobalOpts& g, const TableProvider* provider,
                    const std::vector<std::string>& outputs,
                    double wall_seconds) {
  json m;
  m["tool"] = "pcombine";
  m["version"] = PCOMBINE_VERSION;
  m["command"] = argv;
  m["seed"] = g.seed;
  m["threads"] = g.threads;
  m["B"] = g.B;
  m["calibrate"] = g.calibrate;
  m["table_dir"] = g.table_dir;
  m["table_keys"] =
      provider ? provider->used_keys() : std::vector<std::string>{};
  m["outputs"] = outputs;
  m["wall_clock_sec"] = wall_seconds;
  std::ofstream f(dir + "/manifest.json", std::ios::trunc);
  if (!f) throw DataError("cannot write " + dir + "/manifest.json");
  f << m.dump(2) << "\n";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir);
}

// --- combine ------------------------------------------------------------------

struct CombineArgs {
  MethodFlagSet mf;
  std::string input, left, right, out;
};

void run_combine(const CombineArgs& a, const GlobalOpts& g,
                 const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto specs = resolve_methods(a.mf);

  const bool have_two = !a.input.empty();
  const bool have_pair = !a.left.empty() || !a.right.empty();
  if (have_pair && (a.left.empty() || a.right.empty()))
    throw UsageError("--left and --right must be given together");
  if (!have_two && !have_pair)
    throw UsageError("need --input (two-sided) or --left/--right (one-sided)");

  csv::PMatrix two, left, right;
  int K = 0;
  if (have_two) {
    two = csv::read_pmatrix(a.input);
    K = static_cast<int>(two.rows[0].size());
  }
  if (have_pair) {
    left = csv::read_pmatrix(a.left);
    right = csv::read_pmatrix(a.right);
    if (left.ids != right.ids ||
        left.rows[0].size() != right.rows[0].size())
      throw DataError("--left and --right files do not line up");
    if (have_two && (two.ids != left.ids ||
                     two.rows[0].size() != left.rows[0].size()))
      throw DataError("--input and --left/--right files do not line up");
    K = static_cast<int>(left.rows[0].size());
  }
  for (const auto& spec : specs) {
    if (takes_onesided_pairs(spec.method) && !have_pair)
      throw UsageError(method_name(spec.method) +
                       " needs --left/--right one-sided inputs");
    if (!takes_onesided_pairs(spec.method) && !have_two)
      throw UsageError(method_name(spec.method) + " needs --input");
  }

  TableProvider provider(make_calibration(g));

  std::ostringstream csv_out;
  csv_out << "id,method,statistic,pvalue,calibration,j_star\n";
  char buf[256];
  const auto& ids = have_two ? two.ids : left.ids;
  for (const auto& spec : specs) {
    const Combiner comb(spec, K, provider);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const CombineResult r =
          comb.pair_input() ? comb.combine_pair(left.rows[i], right.rows[i])
                            : comb.combine(two.rows[i]);
      std::string jstar;
      if (r.j_star) jstar = std::to_string(*r.j_star);
      std::snprintf(buf, sizeof buf, "%s,%s,%.10g,%.10g,%s,%s\n",
                    ids[i].c_str(), method_id(spec).c_str(), r.statistic,
                    r.pvalue, calibration_name(r.calibration).c_str(),
                    jstar.c_str());
      csv_out << buf;
    }
  }

  if (a.out.empty()) {
    std::cout << csv_out.str();
  } else {
    ensure_dir(a.out);
    std::ofstream f(a.out + "/combined.csv", std::ios::trunc);
    if (!f) throw DataError("cannot write " + a.out + "/combined.csv");
    f << csv_out.str();
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(a.out, argv, g, &provider, {"combined.csv"}, wall);
    std::cout << "wrote " << a.out << "/combined.csv (" << ids.size()
              << " rows x " << specs.size() << " methods)\n";
  }
}

// --- table --------------------------------------------------------------------

struct TableArgs {
  MethodFlagSet mf;
  std::string K_list = "10";
  std::string alphas = "0.05";
};

void run_table(const TableArgs& a, const GlobalOpts& g,
               const std::vector<std::string>&) {
  if (g.table_dir.empty())
    throw UsageError(
        "table caching needs --table-dir (or PCOMBINE_TABLE_DIR)");
  ensure_dir(g.table_dir);
  const auto specs = resolve_methods(a.mf);
  std::vector<int> Ks;
  for (const auto& tok : split_list(a.K_list))
    Ks.push_back(static_cast<int>(csv::parse_int(tok, "--K")));
  const auto alphas = parse_double_list(a.alphas, "--alpha");

  CalibrationOptions cal = make_calibration(g);
  cal.mode = CalibrationMode::ForceMC;  // a table is the point of the command
  TableProvider provider(cal);

  std::cout << "method,K,B,seed,alpha,critical\n";
  char buf[192];
  for (const auto& spec : specs) {
    for (int K : Ks) {
      const Combiner comb(spec, K, provider);
      for (double alpha : alphas) {
        std::snprintf(buf, sizeof buf, "%s,%d,%lld,%llu,%g,%.6g\n",
                      method_id(spec).c_str(), K,
                      static_cast<long long>(g.B),
                      static_cast<unsigned long long>(g.seed), alpha,
                      comb.critical_stat(alpha));
        std::cout << buf;
      }
    }
  }
  std::cerr << "tables cached under " << g.table_dir << "\n";
}

// --- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string preset;
  MethodFlagSet mf;
  std::string K_list, ell_fracs, sidedness;
  double alpha = -1.0;
  double power_target = -1.0;
  std::int64_t reps = 10000;
  double mu0 = -1.0;
  bool mu0_given = false;
  std::string out;
};

void apply_preset(SimulateArgs& a) {
  if (a.preset.empty()) return;
  std::string methods, fracs = "0.1,0.2,0.3,0.4,0.5,0.6,0.7";
  double alpha = 0.01, target = 0.5;
  std::string sided = "two";
  if (a.preset == "fig1") {
    methods =
        "fisher,stouffer,minp,cauchy,harmonicmean,bj,hc,afp,afz,otfhard,"
        "otfsoft";
  } else if (a.preset == "fig2") {
    methods = "fisher,afp,fe";
  } else if (a.preset == "fig3") {
    methods = "fe,fecs,pearson";
    alpha = 0.001;
    target = 0.6;
    sided = "one";
  } else {
    throw UsageError("unknown preset: " + a.preset);
  }
  if (a.mf.methods.empty()) a.mf.methods = methods;
  if (a.K_list.empty()) a.K_list = "10";
  if (a.ell_fracs.empty()) a.ell_fracs = fracs;
  if (a.alpha < 0) a.alpha = alpha;
  if (a.power_target < 0) a.power_target = target;
  if (a.sidedness.empty()) a.sidedness = sided;
}

void run_simulate(SimulateArgs a, const GlobalOpts& g,
                  const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  apply_preset(a);
  if (a.mf.methods.empty()) throw UsageError("need --methods or --preset");
  if (a.K_list.empty()) a.K_list = "10";
  if (a.ell_fracs.empty()) a.ell_fracs = "0.1,0.2,0.3,0.4,0.5,0.6,0.7";
  if (a.alpha < 0) a.alpha = 0.05;
  if (a.power_target < 0) a.power_target = 0.5;
  if (a.sidedness.empty()) a.sidedness = "two";

  const auto specs = resolve_methods(a.mf);
  std::vector<int> Ks;
  for (const auto& tok : split_list(a.K_list))
    Ks.push_back(static_cast<int>(csv::parse_int(tok, "--K-list")));
  const auto fracs = parse_double_list(a.ell_fracs, "--ell-fracs");
  Sidedness sided;
  if (a.sidedness == "two")
    sided = Sidedness::TwoSided;
  else if (a.sidedness == "one")
    sided = Sidedness::OneSided;
  else
    throw UsageError("--sidedness must be one or two");

  TableProvider provider(make_calibration(g));
  const std::optional<double> fixed =
      a.mu0_given ? std::optional<double>(a.mu0) : std::nullopt;
  const GridResult grid =
      run_power_grid(specs, Ks, fracs, a.power_target, a.alpha, sided, a.reps,
                     g.seed, provider, {}, fixed);

  if (a.out.empty()) {
    char buf[256];
    std::cout << "method,K,ell,mu0,alpha,sidedness,reps,power,mc_se,seed\n";
    for (const auto& cell : grid.cells)
      for (const auto& e : cell.estimates) {
        std::snprintf(buf, sizeof buf,
                      "%s,%d,%d,%g,%g,%s,%lld,%.6f,%.6f,%llu\n",
                      method_id(e.method).c_str(), cell.K, cell.ell, cell.mu0,
                      e.scenario.alpha,
                      sidedness_name(e.scenario.sidedness).c_str(),
                      static_cast<long long>(e.scenario.reps), e.power,
                      e.mc_se,
                      static_cast<unsigned long long>(e.scenario.seed));
        std::cout << buf;
      }
    return;
  }

  ensure_dir(a.out);
  write_power_csv(grid, a.out + "/power.csv");
  // Ordering summary: methods per cell, best power first.
  for (const auto& cell : grid.cells) {
    auto est = cell.estimates;
    std::stable_sort(est.begin(), est.end(),
                     [](const PowerEstimate& x, const PowerEstimate& y) {
                       return x.power > y.power;
                     });
    std::printf("K=%d ell=%d (frac %.2f) mu0=%.2f:", cell.K, cell.ell,
                cell.ell_frac, cell.mu0);
    for (std::size_t i = 0; i < est.size(); ++i)
      std::printf("%s %s=%.3f", i ? " >" : "", method_id(est[i].method).c_str(),
                  est[i].power);
    std::printf("\n");
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(a.out, argv, g, &provider, {"power.csv"}, wall);
}

// --- meta ---------------------------------------------------------------------

struct MetaArgs {
  std::string expr_dir, design, out;
  MethodFlagSet mf;
  double q_cutoff = 0.05;
  double sign_threshold = 0.05;
};

void run_meta_cmd(const MetaArgs& a, const GlobalOpts& g,
                  const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.expr_dir.empty()) throw UsageError("--expr-dir is required");
  if (a.design.empty()) throw UsageError("--design is required");
  if (a.out.empty()) throw UsageError("--out is required");

  const auto design = read_design_csv(a.design);
  const std::string design_base =
      std::filesystem::path(a.design).filename().string();

  std::vector<std::string> study_files;
  for (const auto& entry : std::filesystem::directory_iterator(a.expr_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (entry.path().extension() != ".csv") continue;
    if (name == design_base || name == "design.csv" || name == "truth.csv")
      continue;
    study_files.push_back(entry.path().string());
  }
  std::sort(study_files.begin(), study_files.end());
  if (study_files.empty())
    throw DataError("no study CSVs found in " + a.expr_dir);

  std::vector<ExpressionStudy> studies;
  studies.reserve(study_files.size());
  for (const auto& path : study_files)
    studies.push_back(read_study_csv(
        path, std::filesystem::path(path).stem().string(), design));

  MetaOptions opts;
  opts.methods = resolve_methods(a.mf);
  opts.sign_threshold = a.sign_threshold;
  opts.threads = g.threads;
  TableProvider provider(make_calibration(g));
  const MetaRun run = run_meta(studies, opts, provider);

  ensure_dir(a.out);
  write_meta_results_csv(run, a.out + "/results.csv");
  write_emeasure_csv(run, a.out + "/emeasure.csv");
  std::vector<std::string> outputs = {"results.csv", "emeasure.csv"};
  if (!run.skipped.empty()) {
    std::ofstream f(a.out + "/skipped.log", std::ios::trunc);
    for (const auto& s : run.skipped) f << s << "\n";
    outputs.push_back("skipped.log");
  }
  if (opts.methods.size() >= 2) {
    const std::string ma = method_id(opts.methods[0]);
    const std::string mb = method_id(opts.methods[1]);
    const auto cats = categorize_genes(run.results, ma, mb, a.q_cutoff);
    std::ofstream f(a.out + "/categories.csv", std::ios::trunc);
    f << "feature_id,category\n";
    for (const auto& [fid, cat] : cats)
      f << fid << ','
        << (cat == OverlapCategory::Both
                ? "both"
                : (cat == OverlapCategory::OnlyA ? "only_" + ma
                                                 : "only_" + mb))
        << "\n";
    outputs.push_back("categories.csv");
  }

  for (const auto& m : opts.methods) {
    const std::string id = method_id(m);
    int n_sig = 0;
    for (const auto& r : run.results)
      if (r.q_value.at(id) <= a.q_cutoff) ++n_sig;
    std::printf("%s: %d of %zu features at q<=%g\n", id.c_str(), n_sig,
                run.results.size(), a.q_cutoff);
  }
  if (!run.skipped.empty())
    std::printf("skipped %zu features (see skipped.log)\n",
                run.skipped.size());
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(a.out, argv, g, &provider, outputs, wall);
}

// --- synth --------------------------------------------------------------------

struct SynthArgs {
  std::string out, preset = "null";
  int features = 200;
  int studies = 8;
  int subjects = 40;
  double magnitude = 0.04;
  double frac = 1.0;
};

void run_synth(const SynthArgs& a, const GlobalOpts& g,
               const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.out.empty()) throw UsageError("--out is required");
  SynthConfig cfg;
  cfg.n_studies = a.studies;
  cfg.subjects_per_study = a.subjects;
  cfg.seed = g.seed;
  const int f = a.features;
  if (a.preset == "null") {
    cfg.blocks = {{f, SignalMode::Null, 0.0, 1.0}};
  } else if (a.preset == "concordant") {
    cfg.blocks = {{f / 2, SignalMode::ConcordantPos, a.magnitude, a.frac},
                  {f - f / 2, SignalMode::Null, 0.0, 1.0}};
  } else if (a.preset == "discordant") {
    cfg.blocks = {{f / 4, SignalMode::Discordant, a.magnitude, a.frac},
                  {f - f / 4, SignalMode::Null, 0.0, 1.0}};
  } else if (a.preset == "mixed") {
    cfg.blocks = {{f / 4, SignalMode::ConcordantPos, a.magnitude, a.frac},
                  {f / 8, SignalMode::ConcordantNeg, a.magnitude, a.frac},
                  {f / 8, SignalMode::Discordant, a.magnitude, a.frac},
                  {f - f / 4 - 2 * (f / 8), SignalMode::Null, 0.0, 1.0}};
  } else {
    throw UsageError("unknown preset: " + a.preset);
  }
  const SynthResult synth = synth_studies(cfg);
  write_synth_csvs(synth, a.out);
  std::vector<std::string> outputs = {"design.csv", "truth.csv"};
  for (const auto& st : synth.studies) outputs.push_back(st.study_id + ".csv");
  std::printf("wrote %d studies x %d features to %s\n", cfg.n_studies,
              a.features, a.out.c_str());
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_manifest(a.out, argv, g, nullptr, outputs, wall);
}

// --- slope --------------------------------------------------------------------

struct SlopeArgs {
  std::string test;
  double theta = 1.0;
  std::string lambdas = "1";
  int ell = 1;
  std::string n_grid;
  std::int64_t nmax = 0;
  std::int64_t reps = 200;
  std::string out;
};

void run_slope(const SlopeArgs& a, const GlobalOpts& g,
               const std::vector<std::string>& argv) {
  const auto t0 = std::chrono::steady_clock::now();
  SlopeConfig cfg;
  cfg.test = slope_test_from_name(a.test);
  cfg.theta = a.theta;
  cfg.lambdas = parse_double_list(a.lambdas, "--lambdas");
  cfg.ell = a.ell;
  cfg.reps = a.reps;
  cfg.seed = g.seed;
  if (!a.n_grid.empty()) {
    cfg.n_grid.clear();
    for (const auto& tok : split_list(a.n_grid))
      cfg.n_grid.push_back(csv::parse_int(tok, "--n-grid"));
  } else if (a.nmax > 0) {
    cfg.n_grid.clear();
    for (std::int64_t n = 100; n <= a.nmax; n *= 10) cfg.n_grid.push_back(n);
    if (cfg.n_grid.empty() || cfg.n_grid.back() != a.nmax)
      cfg.n_grid.push_back(a.nmax);
  }

  const SlopeTrace tr = estimate_exact_slope(cfg);
  if (a.out.empty()) {
    char buf[160];
    std::cout << "test,theta,n,slope_estimate,c_theory\n";
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s,%g,%lld,%.8f,%.8f\n",
                    slope_test_name(cfg.test).c_str(), cfg.theta,
                    static_cast<long long>(cfg.n_grid[i]),
                    tr.slope_estimates[i], tr.c_theory);
      std::cout << buf;
    }
  } else {
    ensure_dir(a.out);
    write_slope_csv({tr}, a.out + "/slope.csv");
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_manifest(a.out, argv, g, nullptr, {"slope.csv"}, wall);
  }
  std::fprintf(stderr, "final estimate at n=%lld: %.4f (theory %.4f)\n",
               static_cast<long long>(cfg.n_grid.back()),
               tr.slope_estimates.back(), tr.c_theory);
}

void add_method_flags(CLI::App* cmd, MethodFlagSet& mf, bool require_methods) {
  auto* m = cmd->add_option("--method,--methods", mf.methods,
                            "comma-separated method list");
  if (require_methods) m->required();
  cmd->add_option("--tau", mf.tau, "truncation level for tfhard/tfsoft")
      ->check(CLI::Range(1e-12, 1.0));
  cmd->add_option("--tau-set", mf.tau_set,
                  "comma-separated tau grid for otfhard/otfsoft");
  cmd->add_option("--delta", mf.delta,
                  "Cauchy truncation level (trunccauchy/fe/fecs)")
      ->check(CLI::Range(1e-12, 0.999999));
  cmd->add_option("--gamma", mf.gamma, "Pareto tail index (paretorv)")
      ->check(CLI::PositiveNumber);
}

void finalize_method_flags(CLI::App* cmd, MethodFlagSet& mf) {
  mf.tau_given = cmd->count("--tau") > 0;
  mf.delta_given = cmd->count("--delta") > 0;
  mf.gamma_given = cmd->count("--gamma") > 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> argv_vec(argv, argv + argc);

  CLI::App app{"p-value combination toolkit"};
  app.set_version_flag("--version", PCOMBINE_VERSION);
  app.set_config("--config", "", "INI config file supplying flag defaults");
  app.require_subcommand(1);
  app.fallthrough();  // global flags usable after the subcommand name

  GlobalOpts g;
  if (const char* env = std::getenv("PCOMBINE_TABLE_DIR")) g.table_dir = env;
  app.add_option("--seed", g.seed, "root seed for every stochastic step");
  app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
  app.add_option("--table-dir", g.table_dir,
                 "null-table cache directory (env PCOMBINE_TABLE_DIR)");
  app.add_option("--B", g.B, "Monte Carlo null-table size");
  app.add_option("--calibrate", g.calibrate,
                 "p-value calibration: auto, mc, or cauchy")
      ->check(CLI::IsMember({"auto", "mc", "cauchy"}));

  CombineArgs ca;
  auto* combine = app.add_subcommand("combine", "combine p-value rows");
  add_method_flags(combine, ca.mf, true);
  combine->add_option("--input", ca.input, "wide CSV of two-sided p-values");
  combine->add_option("--left", ca.left, "wide CSV of left one-sided p-values");
  combine->add_option("--right", ca.right,
                      "wide CSV of right one-sided p-values");
  combine->add_option("--out", ca.out, "output directory (default: stdout)");

  TableArgs ta;
  auto* table = app.add_subcommand("table", "build/cache null tables");
  add_method_flags(table, ta.mf, true);
  table->add_option("--K", ta.K_list, "comma-separated study counts");
  table->add_option("--alpha", ta.alphas, "comma-separated levels");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "power grid simulation");
  add_method_flags(simulate, sa.mf, false);
  simulate->add_option("--preset", sa.preset, "fig1, fig2, or fig3");
  simulate->add_option("--K-list", sa.K_list, "comma-separated study counts");
  simulate->add_option("--ell-fracs", sa.ell_fracs,
                       "comma-separated signal fractions");
  simulate->add_option("--alpha", sa.alpha, "test level");
  simulate->add_option("--power-target", sa.power_target,
                       "stop the mu0 walk at this best-method power");
  simulate->add_option("--reps", sa.reps, "replicates per cell");
  auto* mu0opt =
      simulate->add_option("--mu0", sa.mu0, "fixed signal mean (skips walk)");
  simulate->add_option("--sidedness", sa.sidedness, "one or two");
  simulate->add_option("--out", sa.out, "output directory (default: stdout)");

  MetaArgs ma;
  auto* meta = app.add_subcommand("meta", "feature-by-study meta-analysis");
  meta->add_option("--expr-dir", ma.expr_dir, "directory of study CSVs")
      ->required();
  meta->add_option("--design", ma.design, "design CSV")->required();
  ma.mf.methods = "fisher,afp,fe,fecs";
  add_method_flags(meta, ma.mf, false);
  meta->add_option("--q-cutoff", ma.q_cutoff, "significance cutoff on q");
  meta->add_option("--sign-threshold", ma.sign_threshold,
                   "one-sided p threshold in the sign score");
  meta->add_option("--out", ma.out, "output directory")->required();

  SynthArgs ya;
  auto* synth = app.add_subcommand("synth", "generate synthetic studies");
  synth->add_option("--out", ya.out, "output directory")->required();
  synth->add_option("--preset", ya.preset,
                    "null, concordant, discordant, or mixed");
  synth->add_option("--features", ya.features, "total feature count");
  synth->add_option("--studies", ya.studies, "study count");
  synth->add_option("--subjects", ya.subjects, "subjects per study");
  synth->add_option("--magnitude", ya.magnitude, "|beta_age| of signals");
  synth->add_option("--frac", ya.frac, "fraction of studies carrying signal");

  SlopeArgs la;
  auto* slope = app.add_subcommand("slope", "empirical Bahadur slopes");
  slope->add_option("--test", la.test, "ztest, fisher, or stouffer")
      ->required();
  slope->add_option("--theta,--mu", la.theta, "signal mean");
  slope->add_option("--lambdas", la.lambdas,
                    "per-study sample-size ratios (defines K)");
  slope->add_option("--ell", la.ell, "number of signal studies");
  slope->add_option("--n-grid", la.n_grid, "comma-separated sample sizes");
  slope->add_option("--nmax", la.nmax, "largest sample size (decade grid)");
  slope->add_option("--reps", la.reps, "replicates");
  slope->add_option("--out", la.out, "output directory (default: stdout)");

  try {
    app.parse(argc, argv);
    if (combine->parsed()) {
      finalize_method_flags(combine, ca.mf);
      run_combine(ca, g, argv_vec);
    } else if (table->parsed()) {
      finalize_method_flags(table, ta.mf);
      run_table(ta, g, argv_vec);
    } else if (simulate->parsed()) {
      finalize_method_flags(simulate, sa.mf);
      sa.mu0_given = mu0opt->count() > 0;
      run_simulate(sa, g, argv_vec);
    } else if (meta->parsed()) {
      finalize_method_flags(meta, ma.mf);
      run_meta_cmd(ma, g, argv_vec);
    } else if (synth->parsed()) {
      run_synth(ya, g, argv_vec);
    } else if (slope->parsed()) {
      run_slope(la, g, argv_vec);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const GuardError& e) {
    std::cerr << "resource guard: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
