// gflclust: latent-space clustering of graph nodes from nodal time series.
// Subcommands cover the full pipeline: simulate, fit, select-lambda,
// cluster, evaluate, and batch (replicated end-to-end experiments).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "gfl/admm.hpp"
#include "gfl/clustering.hpp"
#include "gfl/errors.hpp"
#include "gfl/graph.hpp"
#include "gfl/io.hpp"
#include "gfl/metrics.hpp"
#include "gfl/simgen.hpp"
#include "gfl/version.hpp"

namespace {

using gfl::json;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_json_file(const std::string& path, const json& j) {
  gfl::detail::write_text_file(path, j.dump(2) + "\n");
}

json base_manifest(const std::string& command, std::uint64_t seed) {
  return json{{"tool", "gflclust"},
              {"version", gfl::kVersion},
              {"command", command},
              {"seed", seed},
              {"inputs", json::object()},
              {"outputs", json::object()}};
}

void add_digest(json& manifest, const char* group, const std::string& path) {
  manifest[group][std::filesystem::path(path).filename().string()] =
      gfl::digest_file(path);
}

// Flags shared by every command that runs the optimizer.
struct FitFlags {
  gfl::FitConfig cfg;
  std::string profile = "desk";
  std::string mu_sweep = "gauss_seidel";
  bool warm_start = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--profile", profile, "Preset scale: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--latent-dim", cfg.latent_dim, "Latent dimension d");
    cmd->add_option("--lambda", cfg.lambda, "Fusion penalty weight");
    cmd->add_option("--gamma", cfg.gamma,
                    "Consensus penalty weight (default: follows lambda)");
    cmd->add_option("--admm-iters", cfg.admm_iters, "Outer iterations (A)");
    cmd->add_option("--adam-iters", cfg.adam_iters,
                    "Decoder updates per iteration (B)");
    cmd->add_option("--bcd-iters", cfg.bcd_iters,
                    "Slack prox passes per iteration (D)");
    cmd->add_option("--adam-lr", cfg.adam_lr, "Decoder learning rate");
    cmd->add_option("--hidden1", cfg.hidden1, "First hidden layer width");
    cmd->add_option("--hidden2", cfg.hidden2, "Second hidden layer width");
    cmd->add_option("--delta", cfg.langevin.delta, "Sampler step size");
    cmd->add_option("--mcmc-steps", cfg.langevin.mcmc_steps,
                    "Sampler transitions per draw (k)");
    cmd->add_option("--samples", cfg.langevin.n_samples,
                    "Posterior draws per node (s)");
    cmd->add_flag("--warm-start", warm_start,
                  "Start chains from the previous iteration's draws");
    cmd->add_option("--mu-sweep", mu_sweep, "Neighbor read order for the mu update")
        ->check(CLI::IsMember({"gauss_seidel", "jacobi"}));
    cmd->add_option("--seed", cfg.seed, "Random seed");
    cmd->add_option("--objective-samples", cfg.objective_mc_samples,
                    "Draws behind the per-iteration objective estimate");
    cmd->add_option("--cv-samples", cfg.cv_loglik_samples,
                    "Draws behind held-out log-likelihood scores");
  }

  // Profile presets fill any scale field the user did not pin explicitly.
  gfl::FitConfig resolve(CLI::App* cmd) const {
    gfl::FitConfig out = cfg;
    if (profile == "paper") {
      if (!cmd->count("--admm-iters")) out.admm_iters = 50;
      if (!cmd->count("--bcd-iters")) out.bcd_iters = 20;
      if (!cmd->count("--samples")) out.langevin.n_samples = 500;
      if (!cmd->count("--mcmc-steps")) out.langevin.mcmc_steps = 50;
    }
    out.gamma_follows_lambda = cmd->count("--gamma") == 0;
    out.langevin.init_mode = warm_start ? gfl::LangevinInit::warm_start
                                        : gfl::LangevinInit::prior_mean;
    out.mu_sweep = mu_sweep == "jacobi" ? gfl::MuSweep::jacobi
                                        : gfl::MuSweep::gauss_seidel;
    out.validate();
    return out;
  }
};

struct SeriesFlags {
  std::string series_path;
  bool header = false;
  std::string standardize = "none";
  int period = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--series", series_path, "Series CSV, one row per node")
        ->required();
    cmd->add_flag("--header", header, "Series CSV has a header row");
    cmd->add_option("--standardize", standardize,
                    "Pre-fit standardization: none, zscore, or seasonal")
        ->check(CLI::IsMember({"none", "zscore", "seasonal"}));
    cmd->add_option("--period", period,
                    "Season length for --standardize seasonal");
  }

  gfl::NodeSeries load() const {
    gfl::NodeSeries series{gfl::read_csv_matrix(series_path, header)};
    if (standardize == "zscore") return gfl::standardize_zscore(series);
    if (standardize == "seasonal") {
      if (period < 1)
        throw std::invalid_argument("--standardize seasonal requires --period");
      return gfl::standardize_seasonal(series, period);
    }
    return series;
  }
};

void write_history_csv(const std::string& path,
                       const std::vector<gfl::IterationStats>& history) {
  std::ostringstream out;
  out << "iteration,primal_residual,objective,dual_max_norm\n";
  char buf[32];
  for (std::size_t i = 0; i < history.size(); ++i) {
    out << (i + 1);
    const double vals[3] = {history[i].primal_residual, history[i].objective,
                            history[i].dual_max_norm};
    for (double v : vals) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
  gfl::detail::write_text_file(path, out.str());
}

void write_metrics_csv(const std::string& path, const gfl::ClusteringScores& s) {
  std::ostringstream out;
  out << "nmi,ari,ari_raw,acc,hom,com,pur\n";
  char buf[32];
  const double vals[7] = {s.nmi, s.ari, s.ari_raw, s.acc, s.hom, s.com, s.pur};
  for (int i = 0; i < 7; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", vals[i]);
    out << (i ? "," : "") << buf;
  }
  out << "\n";
  gfl::detail::write_text_file(path, out.str());
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  int scenario = 1;
  int n_nodes = 0;
  std::string grid;
  int series_len = 0;
  std::uint64_t seed = 0;
  std::string spec_path;
  std::string out_dir;
  std::vector<int> sizes;
  std::vector<double> means, ars, vars;
  double p_in = -1.0, p_out = -1.0, rho = -1.0, phi = -10.0;
  int burn_in = -1;
};

std::pair<int, int> parse_grid(const std::string& grid) {
  const auto x = grid.find('x');
  if (x == std::string::npos || x == 0 || x + 1 == grid.size())
    throw std::invalid_argument("--grid expects ROWSxCOLS, e.g. 12x12");
  try {
    return {std::stoi(grid.substr(0, x)), std::stoi(grid.substr(x + 1))};
  } catch (const std::exception&) {
    throw std::invalid_argument("--grid expects ROWSxCOLS, e.g. 12x12");
  }
}

void run_simulate(const SimulateOpts& opt, CLI::App* cmd) {
  const auto start = std::chrono::steady_clock::now();
  gfl::ScenarioSpec spec;
  if (!opt.spec_path.empty()) {
    spec = gfl::scenario_from_json(gfl::parse_json_file(opt.spec_path));
    if (cmd->count("--scenario") && opt.scenario != spec.scenario)
      throw std::invalid_argument("--scenario conflicts with the spec file");
  } else {
    int rows = 0, cols = 0;
    if (!opt.grid.empty()) std::tie(rows, cols) = parse_grid(opt.grid);
    spec = gfl::make_scenario(opt.scenario,
                              opt.n_nodes > 0 ? opt.n_nodes
                                              : (opt.scenario == 2 ? 0 : 120),
                              opt.seed, rows, cols);
  }
  if (cmd->count("--seed")) spec.seed = opt.seed;
  if (cmd->count("--series-len")) spec.series_len = opt.series_len;
  if (!opt.sizes.empty()) spec.cluster_sizes = opt.sizes;
  if (!opt.means.empty()) spec.cluster_means = opt.means;
  if (!opt.ars.empty()) spec.ar_coeffs = opt.ars;
  if (!opt.vars.empty()) spec.noise_vars = opt.vars;
  if (opt.p_in >= 0.0) spec.p_in = opt.p_in;
  if (opt.p_out >= 0.0) spec.p_out = opt.p_out;
  if (opt.rho >= 0.0) spec.var_rho = opt.rho;
  if (opt.phi > -10.0) spec.var_phi = opt.phi;
  if (opt.burn_in >= 0) spec.burn_in = opt.burn_in;
  spec.validate();

  const gfl::ScenarioData data = gfl::run_scenario(spec);
  std::filesystem::create_directories(opt.out_dir);
  const std::string edges = join_path(opt.out_dir, "edges.tsv");
  const std::string series = join_path(opt.out_dir, "series.csv");
  const std::string labels = join_path(opt.out_dir, "labels.csv");
  gfl::write_edge_list(edges, data.graph);
  gfl::write_csv_matrix(series, data.series.values());
  gfl::write_labels(labels, data.labels);

  json manifest = base_manifest("simulate", spec.seed);
  manifest["spec"] = gfl::scenario_to_json(spec);
  manifest["n_edges"] = data.graph.n_edges();
  for (const auto& p : {edges, series, labels}) add_digest(manifest, "outputs", p);
  manifest["timing_seconds"] = seconds_since(start);
  write_json_file(join_path(opt.out_dir, "manifest.json"), manifest);
  std::cout << "wrote " << opt.out_dir << " (" << data.graph.n_nodes()
            << " nodes, " << data.graph.n_edges() << " edges)\n";
}

// --------------------------------------------------------------------- fit

struct FitOpts {
  std::string edges_path;
  SeriesFlags series;
  FitFlags fit;
  std::string resume_path;
  std::string out_dir;
};

void run_fit(const FitOpts& opt, CLI::App* cmd) {
  const auto start = std::chrono::steady_clock::now();
  const gfl::FitConfig cfg = opt.fit.resolve(cmd);
  const gfl::Graph graph = gfl::read_edge_list(opt.edges_path);
  const gfl::NodeSeries series = opt.series.load();

  gfl::FitResult result;
  if (!opt.resume_path.empty()) {
    const gfl::FitResult prev =
        gfl::fit_result_from_json(gfl::parse_json_file(opt.resume_path));
    result = gfl::fit(graph, series, cfg, &prev.state);
  } else {
    result = gfl::fit(graph, series, cfg);
  }

  std::filesystem::create_directories(opt.out_dir);
  const std::string fit_path = join_path(opt.out_dir, "fit.json");
  const std::string hist_path = join_path(opt.out_dir, "history.csv");
  write_json_file(fit_path, gfl::fit_result_to_json(result, cfg));
  write_history_csv(hist_path, result.history);

  json manifest = base_manifest("fit", cfg.seed);
  manifest["config"] = gfl::config_to_json(cfg);
  manifest["duals_zero_after_iter1"] =
      !result.history.empty() && result.history.front().dual_max_norm == 0.0;
  manifest["final_primal_residual"] = result.history.back().primal_residual;
  add_digest(manifest, "inputs", opt.edges_path);
  add_digest(manifest, "inputs", opt.series.series_path);
  if (!opt.resume_path.empty()) add_digest(manifest, "inputs", opt.resume_path);
  add_digest(manifest, "outputs", fit_path);
  add_digest(manifest, "outputs", hist_path);
  manifest["timing_seconds"] = seconds_since(start);
  write_json_file(join_path(opt.out_dir, "manifest.json"), manifest);
  std::cout << "fit complete: " << result.state.iteration
            << " iterations, final primal residual "
            << result.history.back().primal_residual << "\n";
}

// ----------------------------------------------------------- select-lambda

struct SelectOpts {
  std::string edges_path;
  SeriesFlags series;
  FitFlags fit;
  std::vector<double> lambdas;
  double holdout = 0.1;
  std::string out_dir;
};

void run_select(const SelectOpts& opt, CLI::App* cmd) {
  const auto start = std::chrono::steady_clock::now();
  gfl::FitConfig cfg = opt.fit.resolve(cmd);
  const gfl::Graph graph = gfl::read_edge_list(opt.edges_path);
  const gfl::NodeSeries series = opt.series.load();
  const std::vector<double> lambdas =
      opt.lambdas.empty() ? std::vector<double>{0.1, 0.25, 0.5, 0.75, 1.0}
                          : opt.lambdas;

  const gfl::LambdaSelection sel =
      gfl::select_lambda(graph, series, lambdas, opt.holdout, cfg);

  std::filesystem::create_directories(opt.out_dir);
  json report{{"lambda", sel.lambda},
              {"candidates", sel.candidates},
              {"heldout_loglik", sel.heldout_loglik},
              {"heldout_nodes", sel.heldout_nodes}};
  const std::string sel_path = join_path(opt.out_dir, "selection.json");
  write_json_file(sel_path, report);

  json manifest = base_manifest("select-lambda", cfg.seed);
  manifest["config"] = gfl::config_to_json(cfg);
  manifest["holdout_frac"] = opt.holdout;
  add_digest(manifest, "inputs", opt.edges_path);
  add_digest(manifest, "inputs", opt.series.series_path);
  add_digest(manifest, "outputs", sel_path);
  manifest["timing_seconds"] = seconds_since(start);
  write_json_file(join_path(opt.out_dir, "manifest.json"), manifest);

  std::cout << "lambda,heldout_loglik\n";
  for (std::size_t c = 0; c < sel.candidates.size(); ++c)
    std::cout << sel.candidates[c] << "," << sel.heldout_loglik[c] << "\n";
  std::cout << "selected " << sel.lambda << "\n";
}

// ----------------------------------------------------------------- cluster

struct ClusterOpts {
  std::string fit_path;
  int k = 0;
  int k_max = 10;
  int restarts = 10;
  std::uint64_t seed = 0;
  std::string out_dir;
};

void run_cluster(const ClusterOpts& opt) {
  const auto start = std::chrono::steady_clock::now();
  const gfl::FitResult fitted =
      gfl::fit_result_from_json(gfl::parse_json_file(opt.fit_path));
  const Eigen::MatrixXd& mu = fitted.state.mu;

  std::vector<std::pair<int, double>> table;
  gfl::ClusterResult res;
  if (opt.k > 0) {
    res = gfl::kmeans(mu, opt.k, opt.restarts, opt.seed);
    table.emplace_back(opt.k, res.silhouette);
  } else {
    res = gfl::select_k(mu, opt.k_max, opt.restarts, opt.seed, &table);
  }

  std::filesystem::create_directories(opt.out_dir);
  const std::string labels_path = join_path(opt.out_dir, "labels.csv");
  const std::string sil_path = join_path(opt.out_dir, "silhouette.csv");
  gfl::write_labels(labels_path, res.labels);
  gfl::write_silhouette_table(sil_path, table);

  json manifest = base_manifest("cluster", opt.seed);
  manifest["k"] = static_cast<int>(res.centroids.rows());
  manifest["restarts"] = opt.restarts;
  manifest["silhouette"] = res.silhouette;
  manifest["inertia"] = res.inertia;
  add_digest(manifest, "inputs", opt.fit_path);
  add_digest(manifest, "outputs", labels_path);
  add_digest(manifest, "outputs", sil_path);
  manifest["timing_seconds"] = seconds_since(start);
  write_json_file(join_path(opt.out_dir, "manifest.json"), manifest);
  std::cout << "selected k=" << res.centroids.rows() << " (silhouette "
            << res.silhouette << ")\n";
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
  std::string true_path;
  std::string pred_path;
  std::string out_dir;
};

void run_evaluate(const EvaluateOpts& opt) {
  const std::vector<int> truth = gfl::read_labels(opt.true_path);
  const std::vector<int> pred = gfl::read_labels(opt.pred_path);
  const gfl::ClusteringScores s = gfl::evaluate(truth, pred);
  std::cout << "nmi,ari,ari_raw,acc,hom,com,pur\n"
            << s.nmi << "," << s.ari << "," << s.ari_raw << "," << s.acc << ","
            << s.hom << "," << s.com << "," << s.pur << "\n";
  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    write_metrics_csv(join_path(opt.out_dir, "metrics.csv"), s);
  }
}

// ------------------------------------------------------------------- batch

struct BatchOpts {
  int scenario = 1;
  int n_nodes = 0;
  std::string grid;
  int reps = 5;
  FitFlags fit;
  std::vector<double> lambdas;
  double holdout = 0.1;
  int k = 0;
  int k_max = 10;
  int restarts = 10;
  std::string out_dir;
};

void run_batch(const BatchOpts& opt, CLI::App* cmd) {
  const auto start = std::chrono::steady_clock::now();
  if (opt.reps < 1) throw std::invalid_argument("--reps must be >= 1");
  gfl::FitConfig base_cfg = opt.fit.resolve(cmd);
  const std::uint64_t base_seed = base_cfg.seed;
  std::vector<double> lambdas = opt.lambdas;
  if (lambdas.empty())
    lambdas = opt.fit.profile == "paper"
                  ? std::vector<double>{0.1, 0.25, 0.5, 0.75, 1.0}
                  : std::vector<double>{0.1, 0.5, 1.0};

  int rows = 0, cols = 0;
  if (!opt.grid.empty()) std::tie(rows, cols) = parse_grid(opt.grid);

  std::filesystem::create_directories(opt.out_dir);
  std::ostringstream reps_csv;
  reps_csv << "rep,scenario_seed,fit_seed,lambda,k,nmi,ari,ari_raw,acc,hom,com,pur\n";
  std::vector<gfl::ClusteringScores> all_scores;
  std::vector<double> rep_seconds;

  for (int r = 0; r < opt.reps; ++r) {
    const auto rep_start = std::chrono::steady_clock::now();
    const std::uint64_t scenario_seed = gfl::derive_seed(base_seed, 2 * r);
    const std::uint64_t fit_seed = gfl::derive_seed(base_seed, 2 * r + 1);
    gfl::ScenarioSpec spec = gfl::make_scenario(
        opt.scenario, opt.n_nodes > 0 ? opt.n_nodes : (opt.scenario == 2 ? 0 : 120),
        scenario_seed, rows, cols);
    const gfl::ScenarioData data = gfl::run_scenario(spec);

    gfl::FitConfig cfg = base_cfg;
    cfg.seed = fit_seed;
    const gfl::LambdaSelection sel =
        gfl::select_lambda(data.graph, data.series, lambdas, opt.holdout, cfg);
    cfg.lambda = sel.lambda;
    const gfl::FitResult fitted = gfl::fit(data.graph, data.series, cfg);

    gfl::ClusterResult clu;
    if (opt.k > 0)
      clu = gfl::kmeans(fitted.state.mu, opt.k, opt.restarts, fit_seed);
    else
      clu = gfl::select_k(fitted.state.mu, opt.k_max, opt.restarts, fit_seed);
    const gfl::ClusteringScores s = gfl::evaluate(data.labels, clu.labels);
    all_scores.push_back(s);
    rep_seconds.push_back(seconds_since(rep_start));

    reps_csv << r << "," << scenario_seed << "," << fit_seed << "," << sel.lambda
             << "," << clu.centroids.rows() << "," << s.nmi << "," << s.ari << ","
             << s.ari_raw << "," << s.acc << "," << s.hom << "," << s.com << ","
             << s.pur << "\n";
    std::cerr << "rep " << r << ": lambda=" << sel.lambda
              << " k=" << clu.centroids.rows() << " acc=" << s.acc << " ("
              << rep_seconds.back() << "s)\n";
  }

  const char* names[6] = {"NMI", "ARI", "ACC", "HOM", "COM", "PUR"};
  auto value = [](const gfl::ClusteringScores& s, int m) {
    const double v[6] = {s.nmi, s.ari, s.acc, s.hom, s.com, s.pur};
    return v[m];
  };
  std::ostringstream summary_csv;
  summary_csv << "metric,mean,sd\n";
  std::ostringstream table;
  for (int m = 0; m < 6; ++m) {
    double mean = 0.0;
    for (const auto& s : all_scores) mean += value(s, m);
    mean /= static_cast<double>(all_scores.size());
    double var = 0.0;
    for (const auto& s : all_scores) var += std::pow(value(s, m) - mean, 2);
    var = all_scores.size() > 1
              ? var / static_cast<double>(all_scores.size() - 1)
              : 0.0;
    const double sd = std::sqrt(var);
    summary_csv << names[m] << "," << mean << "," << sd << "\n";
    char line[80];
    std::snprintf(line, sizeof(line), "%-4s %6.2f%% (%.2f)\n", names[m],
                  100.0 * mean, 100.0 * sd);
    table << line;
  }

  const std::string reps_path = join_path(opt.out_dir, "replications.csv");
  const std::string summary_path = join_path(opt.out_dir, "summary.csv");
  gfl::detail::write_text_file(reps_path, reps_csv.str());
  gfl::detail::write_text_file(summary_path, summary_csv.str());

  json manifest = base_manifest("batch", base_seed);
  manifest["config"] = gfl::config_to_json(base_cfg);
  manifest["scenario"] = opt.scenario;
  manifest["reps"] = opt.reps;
  manifest["lambdas"] = lambdas;
  manifest["holdout_frac"] = opt.holdout;
  manifest["rep_seconds"] = rep_seconds;
  add_digest(manifest, "outputs", reps_path);
  add_digest(manifest, "outputs", summary_path);
  manifest["timing_seconds"] = seconds_since(start);
  write_json_file(join_path(opt.out_dir, "manifest.json"), manifest);
  std::cout << table.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space clustering of graph nodes with nodal time series"};
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim_cmd->add_option("--scenario", sim.scenario, "Scenario id: 1, 2, or 3")
      ->check(CLI::Range(1, 3));
  sim_cmd->add_option("--n-nodes", sim.n_nodes, "Node count");
  sim_cmd->add_option("--grid", sim.grid, "Grid shape ROWSxCOLS (scenario 2)");
  sim_cmd->add_option("--series-len", sim.series_len, "Series length per node");
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--spec", sim.spec_path, "Scenario spec JSON file");
  sim_cmd->add_option("--sizes", sim.sizes, "Cluster sizes override");
  sim_cmd->add_option("--means", sim.means, "Cluster means override");
  sim_cmd->add_option("--ar", sim.ars, "Per-cluster AR coefficients");
  sim_cmd->add_option("--vars", sim.vars, "Per-cluster noise variances");
  sim_cmd->add_option("--p-in", sim.p_in, "Within-cluster edge probability");
  sim_cmd->add_option("--p-out", sim.p_out, "Across-cluster edge probability");
  sim_cmd->add_option("--rho", sim.rho, "Within-cluster innovation correlation");
  sim_cmd->add_option("--phi", sim.phi, "VAR coefficient (scenario 3)");
  sim_cmd->add_option("--burn-in", sim.burn_in, "Discarded warmup steps");
  sim_cmd->add_option("--out-dir", sim.out_dir, "Output directory")->required();
  sim_cmd->callback([&] { run_simulate(sim, sim_cmd); });

  FitOpts fit;
  auto* fit_cmd = app.add_subcommand("fit", "Learn prior means on a graph");
  fit_cmd->add_option("--edges", fit.edges_path, "Edge list TSV")->required();
  fit.series.attach(fit_cmd);
  fit.fit.attach(fit_cmd);
  fit_cmd->add_option("--resume", fit.resume_path,
                      "Continue from a previous fit.json for --admm-iters more");
  fit_cmd->add_option("--out-dir", fit.out_dir, "Output directory")->required();
  fit_cmd->callback([&] { run_fit(fit, fit_cmd); });

  SelectOpts sel;
  auto* sel_cmd =
      app.add_subcommand("select-lambda", "Pick the penalty by held-out nodes");
  sel_cmd->add_option("--edges", sel.edges_path, "Edge list TSV")->required();
  sel.series.attach(sel_cmd);
  sel.fit.attach(sel_cmd);
  sel_cmd->add_option("--lambdas", sel.lambdas,
                      "Candidate penalties (default 0.1 0.25 0.5 0.75 1.0)");
  sel_cmd->add_option("--holdout", sel.holdout, "Held-out node fraction");
  sel_cmd->add_option("--out-dir", sel.out_dir, "Output directory")->required();
  sel_cmd->callback([&] { run_select(sel, sel_cmd); });

  ClusterOpts clu;
  auto* clu_cmd = app.add_subcommand("cluster", "Cluster learned prior means");
  clu_cmd->add_option("--fit", clu.fit_path, "fit.json from the fit command")
      ->required();
  clu_cmd->add_option("--k", clu.k, "Fixed cluster count (skips selection)")
      ->check(CLI::NonNegativeNumber);
  clu_cmd->add_option("--k-max", clu.k_max, "Largest k tried by selection")
      ->check(CLI::PositiveNumber);
  clu_cmd->add_option("--restarts", clu.restarts, "Seeding restarts per k")
      ->check(CLI::PositiveNumber);
  clu_cmd->add_option("--seed", clu.seed, "Random seed");
  clu_cmd->add_option("--out-dir", clu.out_dir, "Output directory")->required();
  clu_cmd->callback([&] { run_cluster(clu); });

  EvaluateOpts ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score predicted labels");
  ev_cmd->add_option("--true", ev.true_path, "Reference labels CSV")->required();
  ev_cmd->add_option("--pred", ev.pred_path, "Predicted labels CSV")->required();
  ev_cmd->add_option("--out-dir", ev.out_dir, "Optional output directory");
  ev_cmd->callback([&] { run_evaluate(ev); });

  BatchOpts batch;
  auto* batch_cmd =
      app.add_subcommand("batch", "Replicated end-to-end scenario runs");
  batch_cmd->add_option("--scenario", batch.scenario, "Scenario id: 1, 2, or 3")
      ->check(CLI::Range(1, 3));
  batch_cmd->add_option("--n-nodes", batch.n_nodes, "Node count");
  batch_cmd->add_option("--grid", batch.grid, "Grid shape ROWSxCOLS (scenario 2)");
  batch_cmd->add_option("--reps", batch.reps, "Replication count");
  batch.fit.attach(batch_cmd);
  batch_cmd->add_option("--lambdas", batch.lambdas,
                        "Candidate penalties (default set by --profile)");
  batch_cmd->add_option("--holdout", batch.holdout, "Held-out node fraction");
  batch_cmd->add_option("--k", batch.k, "Fixed cluster count (skips selection)")
      ->check(CLI::NonNegativeNumber);
  batch_cmd->add_option("--k-max", batch.k_max, "Largest k tried by selection")
      ->check(CLI::PositiveNumber);
  batch_cmd->add_option("--restarts", batch.restarts, "Seeding restarts per k")
      ->check(CLI::PositiveNumber);
  batch_cmd->add_option("--out-dir", batch.out_dir, "Output directory")->required();
  batch_cmd->callback([&] { run_batch(batch, batch_cmd); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gfl::numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
