#pragma once

// Equiangular quadrature grids on S^2, SO(3) and the circle with Haar weights
// normalized to total volume 1.

#include "homharm/groups.hpp"

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace homharm {

enum class Space { S2, SO3, Circle };

inline std::string_view to_string(Space s) {
  switch (s) {
    case Space::S2: return "S2";
    case Space::SO3: return "SO3";
    case Space::Circle: return "Circle";
  }
  return "?";
}

inline Space space_from_string(std::string_view s) {
  if (s == "S2") return Space::S2;
  if (s == "SO3") return Space::SO3;
  if (s == "Circle") return Space::Circle;
  throw std::invalid_argument("unknown space '" + std::string(s) + "'");
}

/// Driscoll-Healy colatitude weights for 2B nodes beta_j = pi (2j+1) / (4B),
/// scaled so they sum to 1. Exact for polynomials in cos(beta) of degree < 2B.
inline std::vector<double> colatitude_weights(int bandwidth) {
  const int n = 2 * bandwidth;
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) {
    const double theta = kPi * (2 * j + 1) / (4.0 * bandwidth);
    double s = 0.0;
    for (int k = 0; k < bandwidth; ++k) s += std::sin((2 * k + 1) * theta) / (2 * k + 1);
    // (2/B) sin(theta) s integrates sin(beta) dbeta over [0, pi], total 2.
    w[j] = std::sin(theta) * s / bandwidth;
  }
  return w;
}

/// Sample grid with Haar weights. Node coordinates are (alpha, beta, gamma);
/// unused coordinates are zero (S^2 has gamma = 0, the circle uses alpha only).
///
/// Node order: S^2 index = ia * 2B + jb; SO(3) index = (ia * 2B + jb) * 2B + kg,
/// so the gamma fiber over a sphere node is contiguous.
struct QuadratureGrid {
  Space space = Space::S2;
  int bandwidth = 1;
  std::vector<std::array<double, 3>> nodes;
  std::vector<double> weights;

  int side() const { return 2 * bandwidth; }
  std::size_t size() const { return nodes.size(); }

  double alpha(int ia) const { return kTwoPi * ia / side(); }
  double beta(int jb) const { return kPi * (2 * jb + 1) / (4.0 * bandwidth); }
  double gamma(int kg) const { return kTwoPi * kg / side(); }

  std::size_t s2_index(int ia, int jb) const {
    return static_cast<std::size_t>(ia) * side() + jb;
  }
  std::size_t so3_index(int ia, int jb, int kg) const {
    return (static_cast<std::size_t>(ia) * side() + jb) * side() + kg;
  }

  bool operator==(const QuadratureGrid& o) const {
    return space == o.space && bandwidth == o.bandwidth;
  }
};

inline QuadratureGrid quadrature_grid(Space space, int bandwidth) {
  if (bandwidth < 1) throw std::invalid_argument("quadrature_grid: bandwidth must be >= 1");
  QuadratureGrid g;
  g.space = space;
  g.bandwidth = bandwidth;
  const int n = 2 * bandwidth;
  switch (space) {
    case Space::Circle:
      g.nodes.reserve(n);
      for (int k = 0; k < n; ++k) {
        g.nodes.push_back({g.alpha(k), 0.0, 0.0});
        g.weights.push_back(1.0 / n);
      }
      break;
    case Space::S2: {
      const auto wb = colatitude_weights(bandwidth);
      g.nodes.reserve(static_cast<std::size_t>(n) * n);
      for (int ia = 0; ia < n; ++ia)
        for (int jb = 0; jb < n; ++jb) {
          g.nodes.push_back({g.alpha(ia), g.beta(jb), 0.0});
          g.weights.push_back(wb[jb] / n);
        }
      break;
    }
    case Space::SO3: {
      const auto wb = colatitude_weights(bandwidth);
      g.nodes.reserve(static_cast<std::size_t>(n) * n * n);
      for (int ia = 0; ia < n; ++ia)
        for (int jb = 0; jb < n; ++jb)
          for (int kg = 0; kg < n; ++kg) {
            g.nodes.push_back({g.alpha(ia), g.beta(jb), g.gamma(kg)});
            g.weights.push_back(wb[jb] / (static_cast<double>(n) * n));
          }
      break;
    }
  }
  return g;
}

}  // namespace homharm
