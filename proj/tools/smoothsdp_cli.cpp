// Command-line front end: solve, certify and benchmark smooth SDPs, and run
// the certified Max-Cut pipeline on Gset-format graphs.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smoothsdp/report.hpp"
#include "smoothsdp/smoothsdp.hpp"

namespace {

using namespace smoothsdp;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitUncertified = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Problem file: header "trace n" | "diag n" | "blockdiag d q", then cost
/// entries "i j v" with 0-based indices (either triangle, duplicates summed).
SmoothSDP parse_problem_file(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_line()) throw std::runtime_error("problem file: empty");
  std::istringstream head(line);
  std::string kind;
  head >> kind;
  int n = 0, d = 0, q = 0;
  if (kind == "trace" || kind == "diag") {
    if (!(head >> n) || n < 1)
      throw std::runtime_error("problem file: header needs a positive dimension, line " +
                               std::to_string(line_no));
  } else if (kind == "blockdiag") {
    if (!(head >> d >> q) || d < 1 || q < 1)
      throw std::runtime_error("problem file: blockdiag needs d and q, line " +
                               std::to_string(line_no));
    n = d * q;
  } else {
    throw std::runtime_error("problem file: unknown constraint class \"" + kind + "\"");
  }
  std::string extra;
  if (head >> extra)
    throw std::runtime_error("problem file: trailing tokens in header, line " +
                             std::to_string(line_no));

  SparseSymMatrix c(n);
  while (next_line()) {
    std::istringstream row(line);
    int i = 0, j = 0;
    double v = 0.0;
    if (!(row >> i >> j >> v) || (row >> extra))
      throw std::runtime_error("problem file: expected \"i j v\", line " + std::to_string(line_no));
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::runtime_error("problem file: index out of range, line " + std::to_string(line_no));
    c.add(i, j, v);
  }
  c.freeze();
  if (kind == "trace") return SmoothSDP::fixed_trace(std::move(c));
  if (kind == "diag") return SmoothSDP::fixed_diagonal(std::move(c));
  return SmoothSDP::fixed_diagonal_blocks(std::move(c), d, q);
}

/// Dense whitespace matrix: one row per line.
Matrix parse_matrix_file(const std::string& text, int expected_rows) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::vector<double> vals;
    double v;
    while (row >> v) vals.push_back(v);
    if (!row.eof() && row.fail())
      throw std::runtime_error("Y file: non-numeric token, line " +
                               std::to_string(rows.size() + 1));
    if (!vals.empty()) rows.push_back(std::move(vals));
  }
  if (static_cast<int>(rows.size()) != expected_rows)
    throw std::runtime_error("Y file: expected " + std::to_string(expected_rows) + " rows, got " +
                             std::to_string(rows.size()));
  std::size_t p = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != p) throw std::runtime_error("Y file: inconsistent column counts");
  Matrix y(expected_rows, static_cast<int>(p));
  for (int i = 0; i < expected_rows; ++i)
    for (std::size_t j = 0; j < p; ++j) y(i, static_cast<int>(j)) = rows[i][j];
  return y;
}

struct CommonFlags {
  int p_start = 2;
  int p_max = 0;
  double tol_grad = 2e-6;
  std::uint64_t seed = 0;
  bool json = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--p-start", p_start, "first staircase rank");
    cmd->add_option("--p-max", p_max, "last staircase rank (0: ceil(sqrt(2m)))");
    cmd->add_option("--tol-grad", tol_grad, "gradient-norm stopping tolerance");
    cmd->add_option("--seed", seed, "random seed (echoed in reports)");
    cmd->add_flag("--json", json, "machine-readable JSON report");
  }

  StaircaseConfig staircase_config() const {
    StaircaseConfig cfg;
    cfg.p_start = p_start;
    cfg.p_max = p_max;
    cfg.seed = seed;
    cfg.rtr.eps_g = tol_grad;
    return cfg;
  }
};

int exit_code_for(StaircaseStatus status) {
  return status == StaircaseStatus::Uncertified ? kExitUncertified : kExitOk;
}

struct MaxcutOutcome {
  int code = kExitInputError;
  std::string output;
  std::vector<std::string> warnings;
};

MaxcutOutcome run_maxcut(const std::string& path, const CommonFlags& flags, int samples) {
  MaxcutOutcome out;
  Graph graph = parse_gset(read_file(path), &out.warnings);
  MaxCutProblem problem = build_problem(graph);

  StaircaseConfig cfg = flags.staircase_config();
  StaircaseResult result = staircase_run(problem.sdp, cfg);
  result.report.instance = path;

  CutResult cut = gw_round(problem, result.y.y, samples, flags.seed,
                           cut_bound(problem, result.y.y, result.certificate));
  if (flags.json) {
    out.output = to_json(result.report, result.certificate, cut, samples).dump(2) + "\n";
  } else {
    out.output = to_text(result.report, result.certificate, cut);
  }
  out.code = exit_code_for(result.report.status);
  return out;
}

int cmd_maxcut(const std::string& path, const CommonFlags& flags, int samples) {
  MaxcutOutcome out = run_maxcut(path, flags, samples);
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << out.output;
  return out.code;
}

int cmd_solve(const std::string& path, const CommonFlags& flags) {
  SmoothSDP problem = parse_problem_file(read_file(path));
  StaircaseConfig cfg = flags.staircase_config();
  StaircaseResult result = staircase_run(problem, cfg);
  result.report.instance = path;
  if (flags.json)
    std::cout << to_json(result.report, result.certificate).dump(2) << "\n";
  else
    std::cout << to_text(result.report, result.certificate);
  return exit_code_for(result.report.status);
}

int cmd_certify(const std::string& problem_path, const std::string& y_path, bool json) {
  SmoothSDP problem = parse_problem_file(read_file(problem_path));
  Matrix y = parse_matrix_file(read_file(y_path), problem.n());
  Certificate cert = certify_lifted(problem, y);
  if (json) {
    Json j = to_json(cert);
    j["dual_feasible"] = dual_feasibility(problem, cert);
    Vector mu = cert.mu.as_vector();
    j["mu_min"] = mu.minCoeff();
    j["mu_max"] = mu.maxCoeff();
    std::cout << j.dump(2) << "\n";
  } else {
    Vector mu = cert.mu.as_vector();
    std::cout << std::setprecision(12) << "f(Y):          " << cert.f << "\n"
              << "|grad f|:      " << cert.grad_norm << "\n"
              << "mu:            m=" << mu.size() << "  min=" << mu.minCoeff()
              << "  max=" << mu.maxCoeff() << "\n"
              << "lambda_min(S): [" << cert.lambda_min_s.lo << ", " << cert.lambda_min_s.hi << "]\n"
              << "gap (general): " << cert.gap_bound_general << "\n";
    if (cert.simplified) std::cout << "gap (simplified): " << cert.gap_bound_simplified << "\n";
    std::cout << "dual value:    " << cert.dual_value << "\n"
              << "dual feasible: " << (dual_feasibility(problem, cert) ? "yes" : "no") << "\n";
    if (cert.has_rayleigh) std::cout << "escape Rayleigh: " << cert.rayleigh << "\n";
  }
  return kExitOk;
}

int cmd_bench(const std::string& dir, const CommonFlags& flags, int samples, int workers) {
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("bench: no files in " + dir);
  if (workers < 1) workers = 1;

  std::vector<MaxcutOutcome> outcomes(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next.fetch_add(1); k < files.size(); k = next.fetch_add(1)) {
      try {
        outcomes[k] = run_maxcut(files[k], flags, samples);
      } catch (const std::exception& e) {
        outcomes[k].code = kExitInputError;
        outcomes[k].output = std::string("error: ") + e.what() + "\n";
      }
    }
  };
  std::vector<std::future<void>> pool;
  for (int w = 0; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();

  int code = kExitOk;
  for (std::size_t k = 0; k < files.size(); ++k) {
    for (const auto& w : outcomes[k].warnings) std::cerr << "warning: " << w << "\n";
    std::cout << outcomes[k].output;
    if (!flags.json) std::cout << "\n";
    code = std::max(code, outcomes[k].code);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified low-rank semidefinite programming"};
  app.require_subcommand(1);

  std::string path, y_path;
  int samples = 1000;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  CommonFlags maxcut_flags, solve_flags, bench_flags;
  bool certify_json = false;

  CLI::App* maxcut = app.add_subcommand("maxcut", "solve + certify + round a Gset graph");
  maxcut->add_option("file", path, "Gset-format edge list")->required();
  maxcut_flags.attach(maxcut);
  maxcut->add_option("--samples", samples, "rounding samples");

  CLI::App* solve = app.add_subcommand("solve", "staircase-solve a problem file");
  solve->add_option("file", path, "problem file (trace|diag|blockdiag header)")->required();
  solve_flags.attach(solve);

  CLI::App* certify = app.add_subcommand("certify", "certify a supplied factor Y");
  certify->add_option("problem", path, "problem file")->required();
  certify->add_option("Y", y_path, "dense whitespace matrix, n rows")->required();
  certify->add_flag("--json", certify_json, "machine-readable JSON report");

  CLI::App* bench = app.add_subcommand("bench", "run maxcut over every file in a directory");
  bench->add_option("dir", path, "directory of Gset files")->required();
  bench_flags.attach(bench);
  bench->add_option("--samples", samples, "rounding samples");
  bench->add_option("--workers", workers, "parallel solves");

  CLI11_PARSE(app, argc, argv);

  try {
    if (maxcut->parsed()) return cmd_maxcut(path, maxcut_flags, samples);
    if (solve->parsed()) return cmd_solve(path, solve_flags);
    if (certify->parsed()) return cmd_certify(path, y_path, certify_json);
    if (bench->parsed()) return cmd_bench(path, bench_flags, samples, workers);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
