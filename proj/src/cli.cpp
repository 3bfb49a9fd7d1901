#include "icluster/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "icluster/error.hpp"
#include "icluster/mixtures.hpp"
#include "icluster/oracle.hpp"
#include "icluster/serialize.hpp"
#include "icluster/solver.hpp"

namespace icluster::cli {

namespace {

struct RunConfig {
  std::string input_path;
  bool histogram = false;
  std::string output_path;
  std::string method = "kmeans";
  Index k = 0;
  Index k_max = 0;
  std::vector<Index> min_sizes;
  std::vector<Index> max_sizes;
  Index balanced = 0;
  std::string penalty = "none";
  std::string family = "gaussian_free_sigma";
  int max_iters = 100;
  double tol = 1e-8;
  std::string aic_k = "params";
  std::string density_path;
  Index grid = 512;
  std::vector<double> range;
  std::vector<Index> sizes{1000, 2000, 4000};
  int reps = 5;
  Index n = 10;
  Index trials = 50;
  std::vector<std::string> methods{"kmeans", "kmedian", "kcenter", "bregman:kl",
                                   "bregman:itakura-saito"};
  std::string mode = "auto";
  std::uint64_t seed = 0;
  int threads = 1;
  bool voronoi = false;
};

SolveMode parse_mode(const std::string& s) {
  if (s == "auto") return SolveMode::Auto;
  if (s == "lut") return SolveMode::Lut;
  if (s == "on_demand" || s == "ondemand") return SolveMode::OnDemand;
  throw Error(ErrorKind::InvalidArgument, "unknown mode '" + s + "'");
}

Penalty parse_penalty(const std::string& s) {
  if (s == "none") return Penalty::none();
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  if (colon == std::string::npos) {
    throw Error(ErrorKind::InvalidArgument, "unknown penalty '" + s + "'");
  }
  std::vector<double> values;
  std::stringstream ss(s.substr(colon + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      values.push_back(std::stod(tok));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidArgument, "bad penalty value '" + tok + "'");
    }
  }
  if (head == "linear" && values.size() == 1) return Penalty::linear(values[0]);
  if (head == "table" && !values.empty()) return Penalty::custom(values);
  throw Error(ErrorKind::InvalidArgument, "unknown penalty '" + s + "'");
}

SortedDataset load(const RunConfig& cfg) {
  const auto raw = read_points_file(cfg.input_path, cfg.histogram);
  return build_dataset(std::span<const RawPoint>(raw));
}

void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.output_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.output_path);
  if (!file) {
    throw Error(ErrorKind::ParseError,
                "cannot write '" + cfg.output_path + "'");
  }
  file << text;
}

FitOptions fit_options(const RunConfig& cfg) {
  FitOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.tol = cfg.tol;
  opt.threads = cfg.threads;
  if (cfg.aic_k == "params") {
    opt.aic_k = AicParameterCount::Params;
  } else if (cfg.aic_k == "clusters") {
    opt.aic_k = AicParameterCount::Clusters;
  } else {
    throw Error(ErrorKind::InvalidArgument, "--aic-k must be params or clusters");
  }
  return opt;
}

int cmd_cluster(const RunConfig& cfg, std::ostream& out) {
  const CostModel model = parse_method(cfg.method);
  const RangeCost cost(load(cfg), model);
  const Index n = cost.size();

  std::optional<SizeConstraints> constraints;
  if (cfg.balanced > 0) {
    constraints = SizeConstraints::balanced(n, cfg.k, cfg.balanced);
  } else if (!cfg.min_sizes.empty() || !cfg.max_sizes.empty()) {
    SizeConstraints c;
    c.lower = cfg.min_sizes.empty()
                  ? std::vector<Index>(static_cast<std::size_t>(cfg.k), 1)
                  : cfg.min_sizes;
    c.upper = cfg.max_sizes.empty()
                  ? std::vector<Index>(static_cast<std::size_t>(cfg.k), n)
                  : cfg.max_sizes;
    constraints = c;
  }

  SolveOptions opt;
  opt.mode = parse_mode(cfg.mode);
  opt.threads = cfg.threads;
  const SolveResult result = solve(cost, cfg.k, constraints, opt);
  nlohmann::json j = clustering_to_json(result.clustering, model, result.tables.mode);
  if (cfg.voronoi) {
    const VoronoiReport v = voronoi_consistency(cost, result.clustering);
    j["voronoi"] = {{"consistent", v.consistent}, {"violators", v.violators}};
  }
  emit(cfg, out, j.dump(2) + "\n");
  return kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const RangeCost cost(load(cfg), parse_method(cfg.method));
  SolveOptions opt;
  opt.mode = parse_mode(cfg.mode);
  opt.threads = cfg.threads;
  const SweepResult sweep = sweep_k(cost, cfg.k_max, parse_penalty(cfg.penalty), opt);
  std::ostringstream csv;
  write_sweep_csv(csv, sweep);
  emit(cfg, out, csv.str());
  err << "best k: " << sweep.best_k << "\n";
  return kOk;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  const SortedDataset ds = load(cfg);
  const FamilySpec family = parse_family(cfg.family);
  const FitOptions opt = fit_options(cfg);

  FitReport chosen;
  nlohmann::json j;
  if (cfg.k_max > 0) {
    AicSweep sweep = select_k_by_aic(ds, family, cfg.k_max, opt);
    j["best_k"] = sweep.best_k;
    j["reports"] = nlohmann::json::array();
    for (const auto& r : sweep.reports) j["reports"].push_back(fit_report_to_json(r));
    chosen = sweep.reports[static_cast<std::size_t>(sweep.best_k - 1)];
  } else {
    chosen = fit_hard_mixture(ds, family, cfg.k, opt);
    j = fit_report_to_json(chosen);
  }
  emit(cfg, out, j.dump(2) + "\n");

  if (!cfg.density_path.empty()) {
    double lo = ds.x(1);
    double hi = ds.x(ds.size());
    if (cfg.range.size() == 2) {
      lo = cfg.range[0];
      hi = cfg.range[1];
    } else {
      const double pad = hi > lo ? 0.1 * (hi - lo) : 1.0;
      lo -= pad;
      hi += pad;
    }
    std::ofstream file(cfg.density_path);
    if (!file) {
      throw Error(ErrorKind::ParseError, "cannot write '" + cfg.density_path + "'");
    }
    write_density_csv(file, density_samples(chosen.model, lo, hi, cfg.grid));
  }
  return kOk;
}

int cmd_gmm_compare(const RunConfig& cfg, std::ostream& out) {
  const GmmComparison cmp = gmm_comparison(load(cfg), cfg.k, fit_options(cfg));
  emit(cfg, out, gmm_comparison_to_json(cmp).dump(2) + "\n");
  return kOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  SolveOptions opt;
  opt.mode = parse_mode(cfg.mode);
  opt.threads = cfg.threads;
  const ScalingReport report =
      scaling_probe(parse_method(cfg.method), cfg.sizes, cfg.k, cfg.seed, opt, cfg.reps);
  std::ostringstream csv;
  write_scaling_csv(csv, report);
  emit(cfg, out, csv.str());
  return kOk;
}

// DP against exhaustive enumeration on seeded random instances.
int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> value(0.5, 10.0);
  std::uniform_real_distribution<double> weight(0.5, 3.0);
  SolveOptions opt;
  opt.mode = parse_mode(cfg.mode);
  opt.threads = cfg.threads;

  std::ostringstream report;
  bool all_ok = true;
  for (const std::string& method : cfg.methods) {
    const CostModel model = parse_method(method);
    const bool unit = model.kind == ModelKind::KCenter;
    Index agreed = 0;
    for (Index t = 0; t < cfg.trials; ++t) {
      std::vector<RawPoint> raw;
      for (Index l = 0; l < cfg.n; ++l) {
        raw.push_back({value(rng), unit ? std::nullopt
                                        : std::optional<double>(weight(rng))});
      }
      const RangeCost cost(build_dataset(std::span<const RawPoint>(raw)), model);
      const Index k = std::min(cfg.k, cost.size());
      const SolveResult dp = solve(cost, k, std::nullopt, opt);
      const OracleResult bf = brute_force(cost, k);
      const double dp_total = dp.tables.e(cost.size(), k);
      const double scale = std::max(std::abs(bf.best_cost), 1e-300);
      const bool ok = std::abs(dp_total - bf.best_cost) <= 1e-9 * scale &&
                      dp.clustering.delimiters() == bf.best_delimiters;
      if (ok) ++agreed;
    }
    const bool pass = agreed == cfg.trials;
    all_ok = all_ok && pass;
    report << (pass ? "PASS " : "FAIL ") << method << ' ' << agreed << '/'
           << cfg.trials << '\n';
  }
  report << (all_ok ? "PASS" : "FAIL") << '\n';
  emit(cfg, out, report.str());
  return all_ok ? kOk : kVerifyFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Optimal interval clustering and hard mixture learning"};
  app.require_subcommand(1, 1);
  RunConfig cfg;

  const auto add_input = [&](CLI::App* sub) {
    sub->add_option("-i,--input", cfg.input_path,
                    "data file: `value` or `value,weight` per line")
        ->required();
    sub->add_flag("--histogram", cfg.histogram,
                  "second column is a count (value,count)");
  };
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-o,--output", cfg.output_path, "output file (default stdout)");
    sub->add_option("--threads", cfg.threads, "solver threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "random seed");
  };
  const auto add_method = [&](CLI::App* sub) {
    sub->add_option("-m,--method", cfg.method,
                    "kmeans | kmedian | kcenter | kmedoid[:<gen>|:abs] | "
                    "bregman:<gen>[:r=<r>]");
    sub->add_option("--mode", cfg.mode, "auto | lut | on_demand");
  };

  CLI::App* cluster = app.add_subcommand("cluster", "optimal k-clustering (JSON)");
  add_input(cluster);
  add_common(cluster);
  add_method(cluster);
  cluster->add_option("-k,--k", cfg.k, "number of clusters")->required();
  cluster->add_option("--min-sizes", cfg.min_sizes, "per-cluster lower bounds")
      ->delimiter(',');
  cluster->add_option("--max-sizes", cfg.max_sizes, "per-cluster upper bounds")
      ->delimiter(',');
  cluster->add_option("--balanced", cfg.balanced,
                      "balanced bounds floor(n/(l k))..ceil(l n/k) for l");
  cluster->add_flag("--voronoi", cfg.voronoi, "append the Voronoi diagnostic");

  CLI::App* sweep = app.add_subcommand("sweep", "costs for k = 1..kmax (CSV)");
  add_input(sweep);
  add_common(sweep);
  add_method(sweep);
  sweep->add_option("--kmax", cfg.k_max, "largest k")->required();
  sweep->add_option("--penalty", cfg.penalty, "none | linear:<lambda> | table:<f1>,<f2>,...");

  CLI::App* fit = app.add_subcommand("fit", "hard mixture fit (JSON)");
  add_input(fit);
  add_common(fit);
  fit->add_option("--family", cfg.family, "component family");
  auto* fit_k = fit->add_option("-k,--k", cfg.k, "number of components");
  auto* fit_kmax = fit->add_option("--kmax", cfg.k_max, "select k in 1..kmax by AIC");
  fit_k->excludes(fit_kmax);
  fit->add_option("--max-iters", cfg.max_iters, "iteration cap");
  fit->add_option("--tol", cfg.tol, "stop when l_c improves by less");
  fit->add_option("--aic-k", cfg.aic_k, "params | clusters");
  fit->add_option("--density", cfg.density_path, "write density samples CSV");
  fit->add_option("--grid", cfg.grid, "density sample count");
  fit->add_option("--range", cfg.range, "density range xmin,xmax")->delimiter(',');

  CLI::App* gmm = app.add_subcommand("gmm-compare",
                                     "k-means GMM vs free-variance GMM (JSON)");
  add_input(gmm);
  add_common(gmm);
  gmm->add_option("-k,--k", cfg.k, "number of components")->required();
  gmm->add_option("--max-iters", cfg.max_iters, "iteration cap");
  gmm->add_option("--tol", cfg.tol, "stop when l_c improves by less");

  CLI::App* bench = app.add_subcommand("bench", "solver scaling (CSV)");
  add_common(bench);
  add_method(bench);
  bench->add_option("--sizes", cfg.sizes, "ascending n values")->delimiter(',');
  bench->add_option("-k,--k", cfg.k, "number of clusters")->required();
  bench->add_option("--reps", cfg.reps, "repetitions per size (median)");

  CLI::App* verify = app.add_subcommand("verify", "DP vs brute force");
  add_common(verify);
  verify->add_option("--mode", cfg.mode, "auto | lut | on_demand");
  verify->add_option("--n", cfg.n, "points per instance");
  verify->add_option("-k,--k", cfg.k, "number of clusters")->required();
  verify->add_option("--trials", cfg.trials, "instances per method");
  verify->add_option("--methods", cfg.methods, "methods to check")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*cluster) return cmd_cluster(cfg, out);
    if (*sweep) return cmd_sweep(cfg, out, err);
    if (*fit) {
      if (cfg.k < 1 && cfg.k_max < 1) {
        throw Error(ErrorKind::InvalidArgument, "fit needs --k or --kmax");
      }
      return cmd_fit(cfg, out);
    }
    if (*gmm) return cmd_gmm_compare(cfg, out);
    if (*bench) return cmd_bench(cfg, out);
    if (*verify) return cmd_verify(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::InfeasibleConstraints:
      case ErrorKind::KTooLarge:
        return kInfeasible;
      default:
        return kInputError;
    }
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace icluster::cli
