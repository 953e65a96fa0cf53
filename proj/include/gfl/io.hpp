#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gfl/admm.hpp"
#include "gfl/decoder.hpp"
#include "gfl/graph.hpp"
#include "gfl/simgen.hpp"

namespace gfl {

using json = nlohmann::json;

namespace detail {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << text;
}

inline double parse_double(const std::string& tok, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos])))
      ++pos;
    if (pos != tok.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": bad number '" + tok + "'");
  }
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream ss(line);
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace detail

// FNV-1a over the raw bytes, reported as 16 hex digits. Used to fingerprint
// inputs and outputs in run manifests.
inline std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

inline std::string digest_file(const std::string& path) {
  return fnv1a64_hex(detail::read_text_file(path));
}

// Edge list: one "i<TAB>j" pair per line, 0-based, '#' starts a comment.
// A "# nodes: N" comment pins the node count; otherwise it is inferred as
// max index + 1.
inline Graph read_edge_list(const std::string& path) {
  std::istringstream in(detail::read_text_file(path));
  std::string line;
  std::vector<std::pair<int, int>> edges;
  int declared = -1;
  int max_node = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      const std::string comment = line.substr(hash + 1);
      const auto key = comment.find("nodes:");
      if (key != std::string::npos)
        declared = static_cast<int>(detail::parse_double(
            comment.substr(key + 6), path + ":" + std::to_string(line_no)));
      line = line.substr(0, hash);
    }
    std::istringstream row(line);
    long long i, j;
    if (!(row >> i)) {
      if (line.find_first_not_of(" \t\r\n") != std::string::npos)
        throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                    ": expected two node ids");
      continue;
    }
    if (!(row >> j))
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected two node ids");
    std::string rest;
    if (row >> rest)
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": trailing tokens");
    edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    max_node = std::max({max_node, static_cast<int>(i), static_cast<int>(j)});
  }
  const int n = declared >= 0 ? declared : max_node + 1;
  if (n <= 0) throw std::invalid_argument(path + ": no nodes");
  return graph_from_edges(n, std::move(edges));
}

inline void write_edge_list(const std::string& path, const Graph& graph) {
  std::ostringstream out;
  out << "# nodes: " << graph.n_nodes() << "\n";
  for (const auto& [i, j] : graph.edges()) out << i << "\t" << j << "\n";
  detail::write_text_file(path, out.str());
}

// Comma-separated numeric matrix, one row per line.
inline Eigen::MatrixXd read_csv_matrix(const std::string& path, bool header = false) {
  std::istringstream in(detail::read_text_file(path));
  std::string line;
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) continue;
    if (line.empty()) continue;
    const auto toks = detail::split(line, ',');
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& tok : toks)
      row.push_back(detail::parse_double(tok, path + ":" + std::to_string(line_no)));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows.front().size(); ++c) m(r, c) = rows[r][c];
  return m;
}

inline void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ostringstream out;
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
  detail::write_text_file(path, out.str());
}

// Two-column "node,label" CSV covering every node 0..N-1 exactly once.
// A non-numeric first line is treated as a header.
inline std::vector<int> read_labels(const std::string& path) {
  std::istringstream in(detail::read_text_file(path));
  std::string line;
  std::vector<std::pair<int, int>> entries;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto toks = detail::split(line, ',');
    if (toks.size() != 2)
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": expected node,label");
    if (line_no == 1) {
      try {
        (void)detail::parse_double(toks[0], "");
      } catch (const std::invalid_argument&) {
        continue;  // header line
      }
    }
    entries.emplace_back(
        static_cast<int>(detail::parse_double(toks[0], path + ":" + std::to_string(line_no))),
        static_cast<int>(detail::parse_double(toks[1], path + ":" + std::to_string(line_no))));
  }
  if (entries.empty()) throw std::invalid_argument(path + ": no labels");
  std::sort(entries.begin(), entries.end());
  std::vector<int> labels(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].first != static_cast<int>(i))
      throw std::invalid_argument(path + ": node ids must cover 0.." +
                                  std::to_string(entries.size() - 1) +
                                  " exactly once");
    labels[i] = entries[i].second;
  }
  return labels;
}

inline void write_labels(const std::string& path, const std::vector<int>& labels) {
  std::ostringstream out;
  out << "node,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << i << "," << labels[i] << "\n";
  detail::write_text_file(path, out.str());
}

inline void write_silhouette_table(
    const std::string& path, const std::vector<std::pair<int, double>>& table) {
  std::ostringstream out;
  out << "k,silhouette\n";
  char buf[32];
  for (const auto& [k, s] : table) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    out << k << "," << buf << "\n";
  }
  detail::write_text_file(path, out.str());
}

namespace detail {

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw std::invalid_argument(where + ": expected an array of rows");
  const std::size_t cols = j.front().size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != cols) throw std::invalid_argument(where + ": ragged rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Eigen::VectorXd vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw std::invalid_argument(where + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace detail

inline json decoder_to_json(const DecoderParams& p) {
  return json{{"latent_dim", p.latent_dim()},
              {"hidden1", p.hidden1()},
              {"hidden2", p.hidden2()},
              {"out_dim", p.out_dim()},
              {"W1", detail::matrix_to_json(p.W1)},
              {"W2", detail::matrix_to_json(p.W2)},
              {"W3", detail::matrix_to_json(p.W3)},
              {"b1", detail::vector_to_json(p.b1)},
              {"b2", detail::vector_to_json(p.b2)},
              {"b3", detail::vector_to_json(p.b3)}};
}

inline DecoderParams decoder_from_json(const json& j) {
  DecoderParams p;
  p.W1 = detail::matrix_from_json(j.at("W1"), "decoder W1");
  p.W2 = detail::matrix_from_json(j.at("W2"), "decoder W2");
  p.W3 = detail::matrix_from_json(j.at("W3"), "decoder W3");
  p.b1 = detail::vector_from_json(j.at("b1"), "decoder b1");
  p.b2 = detail::vector_from_json(j.at("b2"), "decoder b2");
  p.b3 = detail::vector_from_json(j.at("b3"), "decoder b3");
  const bool shapes_ok =
      j.at("latent_dim").get<int>() == p.latent_dim() &&
      j.at("hidden1").get<int>() == p.hidden1() &&
      j.at("hidden2").get<int>() == p.hidden2() &&
      j.at("out_dim").get<int>() == p.out_dim() && p.W2.cols() == p.W1.rows() &&
      p.W3.cols() == p.W2.rows() && p.b1.size() == p.W1.rows() &&
      p.b2.size() == p.W2.rows() && p.b3.size() == p.W3.rows();
  if (!shapes_ok) throw std::invalid_argument("decoder: inconsistent shapes");
  return p;
}

inline json config_to_json(const FitConfig& cfg) {
  return json{{"latent_dim", cfg.latent_dim},
              {"lambda", cfg.lambda},
              {"gamma", cfg.gamma},
              {"gamma_follows_lambda", cfg.gamma_follows_lambda},
              {"admm_iters", cfg.admm_iters},
              {"adam_iters", cfg.adam_iters},
              {"bcd_iters", cfg.bcd_iters},
              {"adam_lr", cfg.adam_lr},
              {"hidden1", cfg.hidden1},
              {"hidden2", cfg.hidden2},
              {"delta", cfg.langevin.delta},
              {"mcmc_steps", cfg.langevin.mcmc_steps},
              {"n_samples", cfg.langevin.n_samples},
              {"init_mode", cfg.langevin.init_mode == LangevinInit::warm_start
                                ? "warm_start"
                                : "prior_mean"},
              {"mu_sweep",
               cfg.mu_sweep == MuSweep::jacobi ? "jacobi" : "gauss_seidel"},
              {"seed", cfg.seed},
              {"objective_mc_samples", cfg.objective_mc_samples},
              {"cv_loglik_samples", cfg.cv_loglik_samples}};
}

inline FitConfig config_from_json(const json& j) {
  FitConfig cfg;
  cfg.latent_dim = j.at("latent_dim").get<int>();
  cfg.lambda = j.at("lambda").get<double>();
  cfg.gamma = j.at("gamma").get<double>();
  cfg.gamma_follows_lambda = j.at("gamma_follows_lambda").get<bool>();
  cfg.admm_iters = j.at("admm_iters").get<int>();
  cfg.adam_iters = j.at("adam_iters").get<int>();
  cfg.bcd_iters = j.at("bcd_iters").get<int>();
  cfg.adam_lr = j.at("adam_lr").get<double>();
  cfg.hidden1 = j.at("hidden1").get<int>();
  cfg.hidden2 = j.at("hidden2").get<int>();
  cfg.langevin.delta = j.at("delta").get<double>();
  cfg.langevin.mcmc_steps = j.at("mcmc_steps").get<int>();
  cfg.langevin.n_samples = j.at("n_samples").get<int>();
  const std::string init = j.at("init_mode").get<std::string>();
  if (init == "warm_start")
    cfg.langevin.init_mode = LangevinInit::warm_start;
  else if (init == "prior_mean")
    cfg.langevin.init_mode = LangevinInit::prior_mean;
  else
    throw std::invalid_argument("config: unknown init_mode '" + init + "'");
  const std::string sweep = j.at("mu_sweep").get<std::string>();
  if (sweep == "jacobi")
    cfg.mu_sweep = MuSweep::jacobi;
  else if (sweep == "gauss_seidel")
    cfg.mu_sweep = MuSweep::gauss_seidel;
  else
    throw std::invalid_argument("config: unknown mu_sweep '" + sweep + "'");
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.objective_mc_samples = j.at("objective_mc_samples").get<int>();
  cfg.cv_loglik_samples = j.at("cv_loglik_samples").get<int>();
  return cfg;
}

// Fit artifact: learned prior means plus everything needed to resume the
// optimization (slack, duals, decoder, iteration counter).
inline json fit_result_to_json(const FitResult& result, const FitConfig& cfg) {
  json history = json::array();
  for (const auto& it : result.history)
    history.push_back(json{{"primal_residual", it.primal_residual},
                           {"objective", it.objective},
                           {"dual_max_norm", it.dual_max_norm}});
  return json{{"format", "gfl-fit-v1"},
              {"seed", cfg.seed},
              {"config", config_to_json(cfg)},
              {"mu", detail::matrix_to_json(result.state.mu)},
              {"history", std::move(history)},
              {"state", json{{"iteration", result.state.iteration},
                             {"nu", detail::matrix_to_json(result.state.nu)},
                             {"w", detail::matrix_to_json(result.state.w)},
                             {"decoder", decoder_to_json(result.state.decoder)}}}};
}

inline FitResult fit_result_from_json(const json& j) {
  if (j.value("format", "") != std::string("gfl-fit-v1"))
    throw std::invalid_argument("fit file: unknown format tag");
  FitResult result;
  result.state.mu = detail::matrix_from_json(j.at("mu"), "fit mu");
  const json& st = j.at("state");
  result.state.iteration = st.at("iteration").get<int>();
  result.state.nu = detail::matrix_from_json(st.at("nu"), "fit nu");
  result.state.w = detail::matrix_from_json(st.at("w"), "fit w");
  result.state.decoder = decoder_from_json(st.at("decoder"));
  for (const auto& it : j.at("history"))
    result.history.push_back(IterationStats{it.at("primal_residual").get<double>(),
                                            it.at("objective").get<double>(),
                                            it.at("dual_max_norm").get<double>()});
  return result;
}

inline json scenario_to_json(const ScenarioSpec& spec) {
  return json{{"scenario", spec.scenario},
              {"n_nodes", spec.n_nodes},
              {"series_len", spec.series_len},
              {"seed", spec.seed},
              {"cluster_sizes", spec.cluster_sizes},
              {"cluster_means", spec.cluster_means},
              {"ar_coeffs", spec.ar_coeffs},
              {"noise_vars", spec.noise_vars},
              {"p_in", spec.p_in},
              {"p_out", spec.p_out},
              {"grid_rows", spec.grid_rows},
              {"grid_cols", spec.grid_cols},
              {"var_phi", spec.var_phi},
              {"var_rho", spec.var_rho},
              {"burn_in", spec.burn_in}};
}

// Absent fields keep the standard scenario defaults for the given id.
inline ScenarioSpec scenario_from_json(const json& j) {
  const int scenario = j.at("scenario").get<int>();
  int rows = j.value("grid_rows", 0), cols = j.value("grid_cols", 0);
  int n_nodes = j.value("n_nodes", 0);
  ScenarioSpec spec =
      scenario == 2
          ? make_scenario(2, n_nodes, j.value("seed", std::uint64_t{0}), rows, cols)
          : make_scenario(scenario, n_nodes > 0 ? n_nodes : 120,
                          j.value("seed", std::uint64_t{0}));
  spec.series_len = j.value("series_len", spec.series_len);
  spec.cluster_sizes = j.value("cluster_sizes", spec.cluster_sizes);
  spec.cluster_means = j.value("cluster_means", spec.cluster_means);
  spec.ar_coeffs = j.value("ar_coeffs", spec.ar_coeffs);
  spec.noise_vars = j.value("noise_vars", spec.noise_vars);
  spec.p_in = j.value("p_in", spec.p_in);
  spec.p_out = j.value("p_out", spec.p_out);
  spec.var_phi = j.value("var_phi", spec.var_phi);
  spec.var_rho = j.value("var_rho", spec.var_rho);
  spec.burn_in = j.value("burn_in", spec.burn_in);
  spec.validate();
  return spec;
}

inline json parse_json_file(const std::string& path) {
  try {
    return json::parse(detail::read_text_file(path));
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace gfl
