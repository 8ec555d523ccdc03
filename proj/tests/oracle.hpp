// Brute-force reference computations for the tests. Everything here works on
// raw leaf vectors and Eigen matrices and never calls into the library.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

struct Node {
  int level;
  std::uint64_t pos;
};

inline std::size_t heap(int level, std::uint64_t pos) { return (std::size_t{1} << level) - 1 + pos; }

inline std::vector<Node> internal_nodes(int depth) {
  std::vector<Node> out;
  for (int l = 0; l < depth; ++l)
    for (std::uint64_t p = 0; p < (std::uint64_t{1} << l); ++p) out.push_back({l, p});
  return out;
}

inline std::vector<Node> all_nodes(int depth) {
  std::vector<Node> out = internal_nodes(depth + 1);
  return out;
}

inline std::size_t first(int depth, Node n) { return static_cast<std::size_t>(n.pos) << (depth - n.level); }
inline std::size_t last(int depth, Node n) { return first(depth, n) + (std::size_t{1} << (depth - n.level)); }
inline double len(Node n) { return std::ldexp(1.0, -n.level); }
inline Node left(Node n) { return {n.level + 1, 2 * n.pos}; }
inline Node right(Node n) { return {n.level + 1, 2 * n.pos + 1}; }
inline bool inside(Node inner, Node outer) {
  return inner.level >= outer.level && (inner.pos >> (inner.level - outer.level)) == outer.pos;
}

inline double avg(const Vec& f, int depth, Node n) {
  double s = 0;
  for (std::size_t i = first(depth, n); i < last(depth, n); ++i) s += f[i];
  return s / static_cast<double>(last(depth, n) - first(depth, n));
}

inline double integral(const Vec& f) {
  double s = 0;
  for (double x : f) s += x;
  return s / static_cast<double>(f.size());
}

inline double inner(const Vec& f, const Vec& g) {
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s / static_cast<double>(f.size());
}

inline Vec haar(int depth, Node n) {
  Vec h(std::size_t{1} << depth, 0.0);
  const double a = 1.0 / std::sqrt(len(n));
  const std::size_t b = first(depth, n), e = last(depth, n), m = (b + e) / 2;
  for (std::size_t i = b; i < e; ++i) h[i] = i < m ? a : -a;
  return h;
}

inline Vec indicator_times(int depth, Node n, const Vec& w) {
  Vec f(w.size(), 0.0);
  for (std::size_t i = first(depth, n); i < last(depth, n); ++i) f[i] = w[i];
  return f;
}

// Operator phi -> v^{1/2} T_sigma (w^{1/2} phi) as a matrix on leaf values.
inline Eigen::MatrixXd weighted_T_sigma(int depth, const std::vector<int>& sigma, const Vec& v, const Vec& w) {
  const std::size_t n = v.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const auto nodes = internal_nodes(depth);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Vec h = haar(depth, nodes[k]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) M(i, j) += sigma[k] * h[i] * h[j] / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) *= std::sqrt(v[i] * w[j]);
  return M;
}

inline Vec alpha(int depth, const Vec& v, const Vec& w) {
  const auto nodes = internal_nodes(depth);
  Vec a(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node I = nodes[k];
    const double dv = std::abs(avg(v, depth, left(I)) - avg(v, depth, right(I))) / avg(v, depth, I);
    const double dw = std::abs(avg(w, depth, left(I)) - avg(w, depth, right(I))) / avg(w, depth, I);
    a[k] = dv * dw * len(I);
  }
  return a;
}

inline Eigen::MatrixXd weighted_T0(int depth, const Vec& alpha_, const Vec& v, const Vec& w) {
  const std::size_t n = v.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const auto nodes = internal_nodes(depth);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node I = nodes[k];
    for (std::size_t i = first(depth, I); i < last(depth, I); ++i)
      for (std::size_t j = first(depth, I); j < last(depth, I); ++j)
        M(i, j) += alpha_[k] / (len(I) * len(I)) / static_cast<double>(n);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) *= std::sqrt(v[i] * w[j]);
  return M;
}

inline double top_singular(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

// ||S(w^{1/2} phi)||_{L^2(v)} = ||R phi|| with one row per internal I.
inline double square_norm(int depth, const Vec& v, const Vec& w) {
  const auto nodes = internal_nodes(depth);
  const std::size_t n = v.size();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(nodes.size(), n);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node I = nodes[k];
    const double scale = std::sqrt(avg(v, depth, I) * len(I));
    const double half = len(I) / 2;
    for (std::size_t j = first(depth, left(I)); j < last(depth, left(I)); ++j)
      R(k, j) = scale * std::sqrt(w[j]) / static_cast<double>(n) / half;
    for (std::size_t j = first(depth, right(I)); j < last(depth, right(I)); ++j)
      R(k, j) = -scale * std::sqrt(w[j]) / static_cast<double>(n) / half;
  }
  // Leaf norm carries the factor 2^{-N/2} on phi only.
  return top_singular(R) * std::sqrt(static_cast<double>(n));
}

// max over phi of sum_I <w^{1/2} phi>_I^2 alpha_I / ||phi||^2.
inline double embedding_sq(int depth, const Vec& w, const Vec& alpha_) {
  const auto nodes = internal_nodes(depth);
  const std::size_t n = w.size();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(nodes.size(), n);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Node I = nodes[k];
    for (std::size_t j = first(depth, I); j < last(depth, I); ++j)
      R(k, j) = std::sqrt(alpha_[k]) * std::sqrt(w[j]) / static_cast<double>(n) / len(I);
  }
  const double s = top_singular(R);
  return s * s * static_cast<double>(n);
}

inline Vec random_weight(std::mt19937_64& rng, std::size_t n, double spread = 1.0) {
  std::normal_distribution<double> g(0.0, spread);
  Vec v(n);
  for (auto& x : v) x = std::exp(g(rng));
  return v;
}

inline Vec random_function(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Pattern k of the internal nodes: bit i set means sign -1 on node i (heap order).
inline std::vector<int> pattern(std::size_t count, std::uint64_t bits) {
  std::vector<int> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = (bits >> i) & 1 ? -1 : 1;
  return s;
}

}  // namespace oracle
