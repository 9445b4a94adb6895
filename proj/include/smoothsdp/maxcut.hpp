#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "smoothsdp/certificate.hpp"
#include "smoothsdp/problem.hpp"
#include "smoothsdp/rng.hpp"

namespace smoothsdp {

struct Graph {
  struct Edge {
    int i;  // i < j, 0-based
    int j;
    double w;
  };
  int n = 0;
  std::vector<Edge> edges;
};

struct GsetParseError : std::runtime_error {
  int line;
  GsetParseError(const std::string& what, int line_no)
      : std::runtime_error(what + ", line " + std::to_string(line_no)), line(line_no) {}
};

/// Gset/rudy edge-list text: first line "n m", then m lines "i j w" with
/// 1-based endpoints. Duplicate edges are summed (warning), self-loops and
/// out-of-range endpoints rejected with their line number.
inline Graph parse_gset(const std::string& text, std::vector<std::string>* warnings = nullptr) {
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

  if (!next_line()) throw GsetParseError("empty input", 1);
  std::istringstream head(line);
  long long n = 0, m = 0;
  if (!(head >> n >> m) || n < 1 || m < 0)
    throw GsetParseError("malformed header, expected \"n m\"", line_no);
  std::string extra;
  if (head >> extra) throw GsetParseError("trailing tokens in header", line_no);

  Graph g;
  g.n = static_cast<int>(n);
  g.edges.reserve(static_cast<std::size_t>(m));
  for (long long k = 0; k < m; ++k) {
    if (!next_line()) throw GsetParseError("edge count mismatch: expected " + std::to_string(m) +
                                               " edges, got " + std::to_string(k),
                                           line_no + 1);
    std::istringstream row(line);
    long long i = 0, j = 0;
    double w = 0.0;
    if (!(row >> i >> j >> w))
      throw GsetParseError("non-numeric or missing token in edge", line_no);
    if (row >> extra) throw GsetParseError("trailing tokens in edge", line_no);
    if (i < 1 || i > n || j < 1 || j > n)
      throw GsetParseError("endpoint out of range", line_no);
    if (i == j) throw GsetParseError("self-loop rejected", line_no);
    if (!std::isfinite(w)) throw GsetParseError("non-finite weight", line_no);
    int a = static_cast<int>(std::min(i, j)) - 1;
    int b = static_cast<int>(std::max(i, j)) - 1;
    g.edges.push_back({a, b, w});
  }
  if (next_line()) throw GsetParseError("edge count mismatch: extra data after last edge", line_no);

  std::sort(g.edges.begin(), g.edges.end(), [](const Graph::Edge& a, const Graph::Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  std::vector<Graph::Edge> merged;
  merged.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    if (!merged.empty() && merged.back().i == e.i && merged.back().j == e.j) {
      merged.back().w += e.w;
      if (warnings)
        warnings->push_back("duplicate edge (" + std::to_string(e.i + 1) + "," +
                            std::to_string(e.j + 1) + ") summed");
    } else {
      merged.push_back(e);
    }
  }
  g.edges = std::move(merged);
  return g;
}

/// The Max-Cut relaxation in minimization form: C = -L/4 with unit diagonal
/// constraints, so that -f(Y) = <L, YY^T>/4 is the relaxation value in cut
/// units (the affine offset between the two forms is identically zero).
struct MaxCutProblem {
  Graph graph;
  SmoothSDP sdp;

  /// <L, YY^T>/4 = -f(Y).
  double relaxation_value(const Matrix& y) const { return -cost(sdp, y); }

  /// Cut value of a +-1 assignment: sum over cut edges of w.
  double cut_value(const std::vector<int>& x) const {
    double v = 0.0;
    for (const auto& e : graph.edges)
      if (x[e.i] != x[e.j]) v += e.w;
    return v;
  }
};

inline MaxCutProblem build_problem(const Graph& g) {
  SparseSymMatrix c(g.n);
  std::vector<double> degree(g.n, 0.0);
  for (const auto& e : g.edges) {
    c.add(e.i, e.j, e.w / 4.0);  // -L/4 off-diagonal
    degree[e.i] += e.w;
    degree[e.j] += e.w;
  }
  for (int i = 0; i < g.n; ++i)
    if (degree[i] != 0.0) c.add(i, i, -degree[i] / 4.0);
  c.freeze();
  return {g, SmoothSDP::fixed_diagonal(std::move(c))};
}

/// Certified upper bound on the maximum cut from any feasible Y:
/// <L, YY^T>/4 - n * min(0, lambda_min(S)). In the paper's adjacency-cost
/// normalization S is 4x ours, which is where its n/4 factor comes from.
inline double cut_bound(const MaxCutProblem& problem, const Matrix& y, const Certificate& cert) {
  return problem.relaxation_value(y) -
         problem.graph.n * std::min(0.0, cert.lambda_min_s.lo);
}

struct CutResult {
  std::vector<int> assignment;  // +-1 per vertex, assignment[0] = +1
  double cut_value = 0.0;
  double certified_upper_bound = std::numeric_limits<double>::infinity();
};

/// Goemans-Williamson style rounding: x = sign(Y g) for Gaussian g, best cut
/// over the samples. sign(0) is +1 and the winner is canonicalized to
/// assignment[0] = +1, so results are reproducible per seed; ties prefer the
/// lexicographically smaller assignment.
inline CutResult gw_round(const MaxCutProblem& problem, const Matrix& y, int samples,
                          std::uint64_t seed,
                          double certified_upper_bound = std::numeric_limits<double>::infinity()) {
  if (samples < 1) throw std::invalid_argument("gw_round: need at least one sample");
  const int n = problem.graph.n;
  if (y.rows() != n) throw std::invalid_argument("gw_round: Y row count != n");
  CutResult best;
  best.cut_value = -std::numeric_limits<double>::infinity();
  best.certified_upper_bound = certified_upper_bound;
  std::vector<int> x(n);
  for (int s = 0; s < samples; ++s) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(s)));
    Vector g = rng.gaussian_vector(static_cast<int>(y.cols()));
    Vector proj = y * g;
    for (int i = 0; i < n; ++i) x[i] = proj[i] >= 0.0 ? 1 : -1;
    if (x[0] < 0)
      for (int& xi : x) xi = -xi;
    double v = problem.cut_value(x);
    if (v > best.cut_value || (v == best.cut_value && x < best.assignment)) {
      best.cut_value = v;
      best.assignment = x;
    }
  }
  return best;
}

/// Exhaustive optimum over 2^(n-1) sign patterns; the test oracle.
inline std::pair<double, std::vector<int>> brute_force_maxcut(const Graph& g) {
  if (g.n < 1) throw std::invalid_argument("brute_force_maxcut: empty graph");
  if (g.n > 24) throw std::invalid_argument("brute_force_maxcut: n > 24 is too large");
  std::vector<int> x(g.n, 1), best_x(g.n, 1);
  double best = -std::numeric_limits<double>::infinity();
  const std::uint64_t patterns = 1ULL << (g.n - 1);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    for (int i = 1; i < g.n; ++i) x[i] = (mask >> (i - 1)) & 1 ? -1 : 1;
    double v = 0.0;
    for (const auto& e : g.edges)
      if (x[e.i] != x[e.j]) v += e.w;
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return {best, best_x};
}

}  // namespace smoothsdp
