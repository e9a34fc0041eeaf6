#pragma once

// Reference implementations used by the unit and acceptance tests. They are
// written from the textbook definitions and share no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

// Four-digit half thickness, summed term by term in extended precision with
// the coefficients as stored in double.
inline double half_thickness(double x, double t) {
  using ld = long double;
  const ld lx = x;
  const ld sum = ld(0.2969) * std::sqrt(lx) - ld(0.1260) * lx - ld(0.3516) * lx * lx +
                 ld(0.2843) * lx * lx * lx - ld(0.1015) * lx * lx * lx * lx;
  return static_cast<double>(ld(5.0) * ld(t) * sum);
}

// Thin-airfoil lift coefficient of the four-digit mean line at incidence
// alpha (radians): cl = 2 pi (alpha - alpha_0), with the zero-lift angle from
// the Glauert integral evaluated by a fine midpoint rule.
inline double thin_airfoil_cl(double m, double p, double alpha = 0.0) {
  if (m == 0.0) return 2.0 * std::numbers::pi * alpha;
  const int n = 200000;
  double integral = 0.0;
  for (int i = 0; i < n; ++i) {
    const double theta = std::numbers::pi * (i + 0.5) / n;
    const double x = 0.5 * (1.0 - std::cos(theta));
    const double slope = x < p ? 2.0 * m / (p * p) * (p - x) : 2.0 * m / ((1 - p) * (1 - p)) * (p - x);
    integral += slope * (std::cos(theta) - 1.0);
  }
  integral *= std::numbers::pi / n;
  const double alpha0 = -integral / std::numbers::pi;
  return 2.0 * std::numbers::pi * (alpha - alpha0);
}

struct Triple {
  std::string a, b, label, chunk;
};

struct Edge {
  std::string a, b, label;
  std::vector<std::string> chunks;  // sorted
  bool operator==(const Edge&) const = default;
};

struct Graph {
  std::set<std::string> nodes;
  std::vector<Edge> edges;  // sorted by (a, b, label)
};

inline double cosine(const std::vector<float>& u, const std::vector<float>& v) {
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += double(u[i]) * v[i];
    uu += double(u[i]) * u[i];
    vv += double(v[i]) * v[i];
  }
  if (uu == 0 || vv == 0) return 0.0;
  return uv / std::sqrt(uu * vv);
}

// Merge by connected components of the "cosine >= threshold" graph, found by
// repeated relabelling until nothing changes.
inline Graph brute_force_merge(const std::vector<Triple>& triples,
                               const std::map<std::string, std::vector<float>>& vectors,
                               double threshold) {
  std::map<std::string, int> freq;
  for (const auto& t : triples) {
    ++freq[t.a];
    ++freq[t.b];
  }
  std::vector<std::string> names;
  for (const auto& [n, c] : freq) names.push_back(n);
  const std::size_t n = names.size();
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        if (cosine(vectors.at(names[i]), vectors.at(names[j])) >= threshold && label[j] < label[i]) {
          label[i] = label[j];
          changed = true;
        }
      }
    }
  }
  std::map<std::string, std::string> canonical;
  for (std::size_t i = 0; i < n; ++i) {
    std::string best;
    for (std::size_t j = 0; j < n; ++j) {
      if (label[j] != label[i]) continue;
      if (best.empty() || freq[names[j]] > freq[best] ||
          (freq[names[j]] == freq[best] && names[j] < best)) {
        best = names[j];
      }
    }
    canonical[names[i]] = best;
  }
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<std::string>> grouped;
  for (const auto& t : triples) {
    std::string a = canonical[t.a], b = canonical[t.b];
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    grouped[{a, b, t.label}].push_back(t.chunk);
  }
  Graph g;
  for (auto& [key, chunks] : grouped) {
    std::sort(chunks.begin(), chunks.end());
    g.nodes.insert(std::get<0>(key));
    g.nodes.insert(std::get<1>(key));
    g.edges.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), chunks});
  }
  return g;
}

// Indices of the k best entries by descending cosine, ties by id ascending.
inline std::vector<std::size_t> exhaustive_top_k(const std::vector<std::vector<float>>& vectors,
                                                 const std::vector<std::string>& ids,
                                                 const std::vector<float>& query, std::size_t k) {
  std::vector<std::size_t> order(vectors.size());
  std::vector<double> score(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    order[i] = i;
    score[i] = cosine(vectors[i], query);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return ids[a] < ids[b];
  });
  order.resize(std::min(k, order.size()));
  return order;
}

// Warnock's closed form of the L2-star discrepancy, computed independently.
inline double l2_star(const std::vector<std::array<double, 3>>& pts) {
  const double n = double(pts.size());
  const int d = 3;
  double a = 0.0;
  for (const auto& p : pts) {
    double prod = 1.0;
    for (int k = 0; k < d; ++k) prod *= (1.0 - p[k] * p[k]);
    a += prod;
  }
  double b = 0.0;
  for (const auto& p : pts) {
    for (const auto& q : pts) {
      double prod = 1.0;
      for (int k = 0; k < d; ++k) prod *= (1.0 - std::max(p[k], q[k]));
      b += prod;
    }
  }
  return std::sqrt(std::pow(3.0, -d) - std::pow(2.0, 1 - d) / n * a + b / (n * n));
}

}  // namespace oracle
