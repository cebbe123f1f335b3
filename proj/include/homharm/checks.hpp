#pragma once

// Property suites behind `homharm check`. Every check draws from its own
// stream, seeded from the suite seed and the check name, so checks can run in
// any order or concurrently and the report stays byte-identical.

#include "homharm/fields.hpp"
#include "homharm/nonlin.hpp"
#include "homharm/report.hpp"
#include "homharm/se_kernels.hpp"
#include "homharm/spectral_conv.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace homharm {

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"transforms", "sparsity", "conv-equivariance",
                                                 "conv-oracle", "nonlin",   "se2",
                                                 "se3",        "gradients", "all"};
  return names;
}

inline bool is_suite(std::string_view s) {
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), s) != n.end();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t check_seed(std::uint64_t suite_seed, std::string_view check_name) {
  return splitmix64(suite_seed ^ fnv1a(check_name));
}

/// Field orders exercised at a bandwidth: |k| <= 2 and |k| < B.
inline std::vector<int> check_orders(int bandwidth) {
  std::vector<int> out;
  for (int k = -2; k <= 2; ++k)
    if (std::abs(k) < bandwidth) out.push_back(k);
  return out;
}

namespace checks {

struct Context {
  const SuiteConfig& cfg;
  std::mt19937_64 rng;
  std::vector<std::pair<std::string, double>> details;

  cd complex() {
    std::normal_distribution<double> n(0.0, 1.0);
    const double re = n(rng);
    return {re, n(rng)};
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  Rotation3 rotation() {
    const double a = uniform(0.0, kTwoPi);
    const double b = std::acos(uniform(-1.0, 1.0));
    const double g = uniform(0.0, kTwoPi);
    return Rotation3::from_euler(a, b, g);
  }
  Eigen::Vector3d vector3() {
    const double x = normal(), y = normal();
    return {x, y, normal()};
  }
  int trials() const { return std::max(1, cfg.trials); }
  void note(std::string key, double v) { details.emplace_back(std::move(key), v); }
};

struct Definition {
  std::string name;
  double tolerance;
  std::function<double(Context&)> run;
};

// ---------------------------------------------------------------------------
// Helpers

inline double rel_err(const std::vector<cd>& a, const std::vector<cd>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

inline double rel_err(const SpectralBlocks& a, const SpectralBlocks& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    num += (a.blocks[i] - b.blocks[i]).squaredNorm();
    den += b.blocks[i].squaredNorm();
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

inline double rel_err(const PointFeatures& a, const PointFeatures& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    num += (a[l] - b[l]).squaredNorm();
    den += b[l].squaredNorm();
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

inline double rel_err(const PointCloud& a, const PointCloud& b) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < a.size(); ++i)
    for (int l = 0; l <= a.lmax; ++l) {
      num += (a.features[i][l] - b.features[i][l]).squaredNorm();
      den += b.features[i][l].squaredNorm();
    }
  return std::sqrt(num / std::max(den, 1e-300));
}

inline TensorField random_field(Context& ctx, int b, int k, int channels) {
  auto next = [&] { return ctx.complex(); };
  return random_bandlimited_field(b, k, channels, next);
}

inline SparseKernelSpec random_kernel(Context& ctx, int m1, int m2, int b, int cin, int cout) {
  SparseKernelSpec k = SparseKernelSpec::zeros(m1, m2, b, cin, cout);
  for (auto& row : k.coeffs)
    for (auto& v : row)
      for (auto& c : v) c = ctx.complex();
  return k;
}

inline SpectralBlocks random_blocks(Context& ctx, int b, int channels) {
  SpectralBlocks s = SpectralBlocks::zeros(b, channels);
  for (auto& blk : s.blocks)
    for (Eigen::Index i = 0; i < blk.size(); ++i) blk.data()[i] = ctx.complex();
  return s;
}

inline PointFeatures random_features(Context& ctx, int lmax, int channels) {
  PointFeatures f;
  for (int l = 0; l <= lmax; ++l) {
    Eigen::MatrixXd m(2 * l + 1, channels);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = ctx.normal();
    f.push_back(m);
  }
  return f;
}

inline double grid_norm2(const std::vector<cd>& samples, const QuadratureGrid& g, int channels) {
  double e = 0.0;
  for (int c = 0; c < channels; ++c)
    for (std::size_t i = 0; i < g.size(); ++i) e += g.weights[i] * std::norm(samples[c * g.size() + i]);
  return e;
}

/// Racah's formula in long double, independent of the library's exact path.
inline double cg_racah(int l1, int m1, int l2, int m2, int l, int m) {
  if (m != m1 + m2 || l < std::abs(l1 - l2) || l > l1 + l2) return 0.0;
  if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m) > l) return 0.0;
  auto fact = [](int n) {
    long double r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  };
  const long double pre =
      std::sqrt((2 * l + 1) * fact(l + l1 - l2) * fact(l - l1 + l2) * fact(l1 + l2 - l) /
                fact(l1 + l2 + l + 1)) *
      std::sqrt(fact(l + m) * fact(l - m) * fact(l1 - m1) * fact(l1 + m1) * fact(l2 - m2) *
                fact(l2 + m2));
  long double acc = 0;
  for (int k = 0; k <= l1 + l2; ++k) {
    const int a = l1 + l2 - l - k, b = l1 - m1 - k, c = l2 + m2 - k, d = l - l2 + m1 + k,
              e = l - l1 - m2 + k;
    if (a < 0 || b < 0 || c < 0 || d < 0 || e < 0) continue;
    acc += ((k % 2) ? -1.0L : 1.0L) / (fact(k) * fact(a) * fact(b) * fact(c) * fact(d) * fact(e));
  }
  return static_cast<double>(pre * acc);
}

inline std::string pair_name(int m1, int m2) {
  return "[in=" + std::to_string(m1) + ";out=" + std::to_string(m2) + "]";
}

// ---------------------------------------------------------------------------
// transforms (with the group and representation-theory golden checks)

inline std::vector<Definition> transforms_suite(const SuiteConfig& cfg) {
  const int b = cfg.bandwidth;
  std::vector<Definition> d;
  d.push_back({"transforms.sht_roundtrip", 1e-10, [b](Context& ctx) {
                 ShtCoeffs c = ShtCoeffs::zeros(b, 3);
                 for (auto& v : c.data) v = ctx.complex();
                 return rel_err(sht_forward(sht_inverse(c), b).data, c.data);
               }});
  d.push_back({"transforms.sht_parseval", 1e-10, [b](Context& ctx) {
                 ShtCoeffs c = ShtCoeffs::zeros(b, 3);
                 for (auto& v : c.data) v = ctx.complex();
                 const TensorField f = sht_inverse(c);
                 double spec = 0.0;
                 for (const auto& v : c.data) spec += std::norm(v);
                 return std::abs(grid_norm2(f.samples, f.grid, 3) - spec) / spec;
               }});
  d.push_back({"transforms.so3_roundtrip", 1e-10, [b](Context& ctx) {
                 const SpectralBlocks s = random_blocks(ctx, b, 3);
                 return rel_err(so3_ft_forward(so3_ft_inverse(s), b), s);
               }});
  d.push_back({"transforms.so3_parseval", 1e-10, [b](Context& ctx) {
                 const SpectralBlocks s = random_blocks(ctx, b, 3);
                 const GroupFunction f = so3_ft_inverse(s);
                 return std::abs(grid_norm2(f.samples, f.grid, 3) - s.energy()) / s.energy();
               }});
  d.push_back({"transforms.quadrature_exactness", 1e-12, [b](Context&) {
                 const auto g = quadrature_grid(Space::S2, b);
                 std::vector<std::vector<cd>> y;
                 for (int l = 0; l < b; ++l)
                   for (int m = -l; m <= l; ++m) {
                     std::vector<cd> v(g.size());
                     for (std::size_t i = 0; i < g.size(); ++i)
                       v[i] = sph_harm(l, m, {g.nodes[i][0], g.nodes[i][1]});
                     y.push_back(std::move(v));
                   }
                 double err = 0.0;
                 for (std::size_t p = 0; p < y.size(); ++p)
                   for (std::size_t q = 0; q < y.size(); ++q) {
                     cd ip{};
                     for (std::size_t i = 0; i < g.size(); ++i) ip += g.weights[i] * std::conj(y[p][i]) * y[q][i];
                     err = std::max(err, std::abs(ip - (p == q ? 1.0 : 0.0)));
                   }
                 return err;
               }});
  d.push_back({"transforms.group_orthogonality", 1e-11, [b](Context&) {
                 const int bo = std::min(b, 4);
                 const auto g = quadrature_grid(Space::SO3, bo);
                 std::vector<std::vector<Eigen::MatrixXcd>> vals(g.size());
                 for (std::size_t i = 0; i < g.size(); ++i)
                   for (int l = 0; l < bo; ++l)
                     vals[i].push_back(wigner_D(l, Rotation3{g.nodes[i][0], g.nodes[i][1], g.nodes[i][2]}).entries);
                 double err = 0.0;
                 for (int l1 = 0; l1 < bo; ++l1)
                   for (int l2 = 0; l2 < bo; ++l2)
                     for (int m1 = -l1; m1 <= l1; ++m1)
                       for (int n1 = -l1; n1 <= l1; ++n1)
                         for (int m2 = -l2; m2 <= l2; ++m2)
                           for (int n2 = -l2; n2 <= l2; ++n2) {
                             cd ip{};
                             for (std::size_t i = 0; i < g.size(); ++i)
                               ip += g.weights[i] * std::conj(vals[i][l1](m1 + l1, n1 + l1)) *
                                     vals[i][l2](m2 + l2, n2 + l2);
                             const double expect =
                                 (l1 == l2 && m1 == m2 && n1 == n2) ? 1.0 / (2 * l1 + 1) : 0.0;
                             err = std::max(err, std::abs(ip - expect));
                           }
                 return err;
               }});
  d.push_back({"transforms.wigner_d_l1_closed_form", 1e-14, [](Context& ctx) {
                 double err = 0.0;
                 std::vector<double> betas = {0.0, kPi};
                 for (int t = 0; t < ctx.trials(); ++t) betas.push_back(ctx.uniform(0.0, kPi));
                 for (double beta : betas) {
                   const double c = std::cos(beta), s = std::sin(beta), r = std::sqrt(2.0);
                   Eigen::Matrix3d ref;
                   ref << (1 + c) / 2, s / r, (1 - c) / 2, -s / r, c, s / r, (1 - c) / 2, -s / r, (1 + c) / 2;
                   err = std::max(err, (wigner_d(1, beta) - ref).cwiseAbs().maxCoeff());
                 }
                 return err;
               }});
  d.push_back({"transforms.cg_racah_l4", 1e-12, [](Context&) {
                 double err = 0.0;
                 for (int l1 = 0; l1 <= 4; ++l1)
                   for (int l2 = 0; l2 <= 4; ++l2)
                     for (int l = std::abs(l1 - l2); l <= std::min(l1 + l2, 4); ++l)
                       for (int m1 = -l1; m1 <= l1; ++m1)
                         for (int m2 = -l2; m2 <= l2; ++m2) {
                           if (std::abs(m1 + m2) > l) continue;
                           err = std::max(err, std::abs(clebsch_gordan(l1, m1, l2, m2, l, m1 + m2) -
                                                        cg_racah(l1, m1, l2, m2, l, m1 + m2)));
                         }
                 return err;
               }});
  d.push_back({"transforms.cg_trivial_selection", 1e-14, [](Context&) {
                 double worst = 0.0;
                 for (int l1 = 0; l1 <= 6; ++l1)
                   for (int l2 = 0; l2 <= 6; ++l2)
                     for (int m1 = -l1; m1 <= l1; ++m1)
                       for (int m2 = -l2; m2 <= l2; ++m2)
                         if (l1 != l2 || m1 != -m2)
                           worst = std::max(worst, std::abs(clebsch_gordan(l1, m1, l2, m2, 0, 0)));
                 return worst;
               }});
  d.push_back({"transforms.stabilizer_diagonal", 1e-14, [b](Context& ctx) {
                 double err = 0.0;
                 for (int t = 0; t < ctx.trials(); ++t) {
                   const double gamma = ctx.uniform(0.0, kTwoPi);
                   for (int l = 0; l < std::max(b, 2); ++l) {
                     const auto dm = wigner_D(l, Rotation3{0.0, 0.0, gamma}).entries;
                     for (int m = -l; m <= l; ++m)
                       for (int n = -l; n <= l; ++n) {
                         const cd expect = m == n ? std::polar(1.0, -n * gamma) : cd{};
                         err = std::max(err, std::abs(dm(m + l, n + l) - expect));
                       }
                   }
                 }
                 return err;
               }});
  d.push_back({"transforms.group_associativity", 1e-12, [](Context& ctx) {
                 double err = 0.0;
                 for (int t = 0; t < ctx.trials(); ++t) {
                   const Rotation3 a = ctx.rotation(), r = ctx.rotation(), c = ctx.rotation();
                   err = std::max(err, (compose(compose(a, r), c).matrix() - compose(a, compose(r, c)).matrix())
                                           .cwiseAbs()
                                           .maxCoeff());
                   err = std::max(err, (compose(a, a.inverse()).matrix() - Eigen::Matrix3d::Identity())
                                           .cwiseAbs()
                                           .maxCoeff());
                 }
                 return err;
               }});
  d.push_back({"transforms.twist_cocycle", 1e-12, [](Context& ctx) {
                 double err = 0.0;
                 for (int t = 0; t < ctx.trials(); ++t) {
                   const Rotation3 g1 = ctx.rotation(), g2 = ctx.rotation();
                   const S2Point x{ctx.uniform(0.0, kTwoPi), std::acos(ctx.uniform(-1.0, 1.0))};
                   err = std::max(err, angle_distance(twist(compose(g1, g2), x),
                                                      twist(g1, act(g2, x)) + twist(g2, x)));
                 }
                 return err;
               }});
  return d;
}

// ---------------------------------------------------------------------------
// sparsity

inline std::vector<Definition> sparsity_suite(const SuiteConfig& cfg) {
  const int b = cfg.bandwidth;
  std::vector<Definition> d;
  for (int k : check_orders(b)) {
    d.push_back({"sparsity.offcolumn[k=" + std::to_string(k) + "]", 1e-10, [b, k](Context& ctx) {
                   const TensorField f = random_field(ctx, b, k, 2);
                   const SpectralBlocks s = so3_ft_forward(lift(f), b);
                   return s.energy_outside_column(k) / s.energy();
                 }});
    d.push_back({"sparsity.lift_intertwining[k=" + std::to_string(k) + "]", 1e-9, [b, k](Context& ctx) {
                   const TensorField f = random_field(ctx, b, k, 1);
                   double err = 0.0;
                   for (int t = 0; t < std::min(ctx.trials(), 5); ++t) {
                     const Rotation3 g = ctx.rotation();
                     err = std::max(err, rel_err(lift(induced_action(g, f)).samples,
                                                 regular_action(g, lift(f)).samples));
                   }
                   return err;
                 }});
    d.push_back({"sparsity.converse_mackey[k=" + std::to_string(k) + "]", 1e-10, [b, k](Context& ctx) {
                   SpectralBlocks s = SpectralBlocks::zeros(b, 1);
                   for (int l = std::abs(k); l < b; ++l)
                     for (int m = -l; m <= l; ++m) s.block(0, l)(m + l, k + l) = ctx.complex();
                   const GroupFunction f = so3_ft_inverse(s);
                   double scale = 0.0;
                   for (const auto& v : f.samples) scale = std::max(scale, std::abs(v));
                   return is_mackey(f, FieldType::so2(k), 0.0).residual / scale;
                 }});
  }
  return d;
}

// ---------------------------------------------------------------------------
// conv-equivariance

inline std::vector<Definition> conv_equivariance_suite(const SuiteConfig& cfg) {
  const int b = cfg.bandwidth;
  const auto orders = check_orders(b);
  std::vector<Definition> d;
  for (int m1 : orders)
    for (int m2 : orders)
      d.push_back({"conv-equivariance.rotations" + pair_name(m1, m2), 1e-8, [=](Context& ctx) {
                     const TensorField f = random_field(ctx, b, m1, 2);
                     const SparseKernelSpec k = random_kernel(ctx, m1, m2, b, 2, 2);
                     const TensorField out = convolve(f, k);
                     double err = 0.0;
                     for (int t = 0; t < ctx.trials(); ++t) {
                       const Rotation3 g = ctx.rotation();
                       err = std::max(err, rel_err(convolve(induced_action(g, f), k).samples,
                                                   induced_action(g, out).samples));
                     }
                     return err;
                   }});
  for (int m1 : orders)
    for (int m2 : orders)
      d.push_back({"conv-equivariance.sparse_sufficiency" + pair_name(m1, m2), 1e-12, [=](Context& ctx) {
                     const SpectralBlocks f = mackey_spectrum(random_field(ctx, b, m1, 2));
                     const SpectralBlocks dense = random_blocks(ctx, b, 4);
                     const SpectralBlocks full = restrict_column(conv_dense(f, dense, 2), m2);
                     const SpectralBlocks sparse = conv_dense(f, restrict_entry(dense, m1, m2), 2);
                     return rel_err(sparse, full);
                   }});
  for (int m1 : orders)
    for (int m2 : orders)
      d.push_back({"conv-equivariance.basis_independence" + pair_name(m1, m2), 1e8, [=](Context& ctx) {
                     // measured as 1 / smallest singular value
                     const TensorField f = random_field(ctx, b, m1, 1);
                     const SparseKernelSpec proto = SparseKernelSpec::zeros(m1, m2, b);
                     Eigen::MatrixXcd stack(f.nodes(), proto.dimension());
                     for (int j = 0; j < proto.dimension(); ++j) {
                       SparseKernelSpec k = proto;
                       k.at(0, 0, proto.lmin() + j) = 1.0;
                       const TensorField out = convolve(f, k);
                       for (std::size_t i = 0; i < out.nodes(); ++i) stack(i, j) = out.at(0, i);
                     }
                     const double smin = Eigen::JacobiSVD<Eigen::MatrixXcd>(stack).singularValues().minCoeff();
                     ctx.note("smallest_singular_value", smin);
                     return 1.0 / smin;
                   }});
  return d;
}

// ---------------------------------------------------------------------------
// conv-oracle

inline std::vector<Definition> conv_oracle_suite(const SuiteConfig& cfg) {
  const int b = std::min(cfg.bandwidth, 4);
  const auto orders = check_orders(b);
  std::vector<Definition> d;
  for (int m1 : orders)
    for (int m2 : orders)
      d.push_back({"conv-oracle.spectral_vs_spatial" + pair_name(m1, m2), 1e-6, [=](Context& ctx) {
                     const TensorField f = random_field(ctx, b, m1, 2);
                     const SparseKernelSpec k = random_kernel(ctx, m1, m2, b, 2, 2);
                     const TensorField a = convolve(f, k);
                     const TensorField o = conv_spatial_oracle(f, k);
                     // least-squares global scalar between the two paths
                     cd num{};
                     double den = 0.0;
                     for (std::size_t i = 0; i < a.samples.size(); ++i) {
                       num += std::conj(a.samples[i]) * o.samples[i];
                       den += std::norm(a.samples[i]);
                     }
                     const cd scale = num / den;
                     ctx.note("global_scalar_re", scale.real());
                     ctx.note("global_scalar_im", scale.imag());
                     return rel_err(o.samples, a.samples);
                   }});
  d.push_back({"conv-oracle.global_scalar", 1e-10, [=](Context& ctx) {
                 double worst = 0.0;
                 for (int m1 : orders) {
                   const int m2 = orders[ctx.rng() % orders.size()];
                   const TensorField f = random_field(ctx, b, m1, 1);
                   const SparseKernelSpec k = random_kernel(ctx, m1, m2, b, 1, 1);
                   const TensorField a = convolve(f, k);
                   const TensorField o = conv_spatial_oracle(f, k);
                   cd num{};
                   double den = 0.0;
                   for (std::size_t i = 0; i < a.samples.size(); ++i) {
                     num += std::conj(a.samples[i]) * o.samples[i];
                     den += std::norm(a.samples[i]);
                   }
                   worst = std::max(worst, std::abs(num / den - 1.0));
                 }
                 return worst;
               }});
  d.push_back({"conv-oracle.group_quadrature", 1e-10, [=](Context& ctx) {
                 // (kappa * F)(g) = int F(v) kappa(v^-1 g) dv by direct quadrature on the SO(3) grid
                 const int bq = std::min(b, 3);
                 const int m1 = std::min(1, bq - 1), m2 = -m1;
                 const TensorField f = random_field(ctx, bq, m1, 1);
                 const SparseKernelSpec k = random_kernel(ctx, m1, m2, bq, 1, 1);
                 const GroupFunction lf = lift(f);
                 const auto& grid = lf.grid;
                 GroupFunction direct = GroupFunction::zeros(grid, 1);
                 std::vector<Rotation3> r(grid.size());
                 for (std::size_t i = 0; i < grid.size(); ++i)
                   r[i] = Rotation3{grid.nodes[i][0], grid.nodes[i][1], grid.nodes[i][2]};
                 for (std::size_t g = 0; g < grid.size(); ++g)
                   for (std::size_t v = 0; v < grid.size(); ++v) {
                     const Rotation3 rel = compose(r[v].inverse(), r[g]);
                     cd kv{};
                     for (int l = k.lmin(); l < k.bandwidth; ++l)
                       kv += k.c(0, 0, l) * wigner_D_entry(l, m1, m2, rel.alpha, rel.beta, rel.gamma);
                     direct.at(0, g) += grid.weights[v] * lf.at(0, v) * kv;
                   }
                 return rel_err(lift(convolve(f, k)).samples, direct.samples);
               }});
  return d;
}

// ---------------------------------------------------------------------------
// nonlin

inline double sigma_equivariance(const std::vector<TensorField>& fs, const Rotation3& g,
                                 const ActivationSpec& spec, double oversample,
                                 const std::vector<int>& orders) {
  std::vector<TensorField> moved;
  for (const auto& f : fs) moved.push_back(induced_action(g, f));
  const auto a = nonlinearity(moved, spec, orders, oversample);
  const auto r = nonlinearity(fs, spec, orders, oversample);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const TensorField c = induced_action(g, r[j]);
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
      num += std::norm(a[j].samples[i] - c.samples[i]);
      den += std::norm(c.samples[i]);
    }
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

inline std::vector<Definition> nonlin_suite(const SuiteConfig& cfg) {
  const int b = std::min(cfg.bandwidth, 4);
  const double os = cfg.oversample;
  std::vector<int> orders;
  for (int k = -1; k <= 1; ++k)
    if (std::abs(k) < b) orders.push_back(k);
  auto inputs = [b, orders](Context& ctx) {
    std::vector<TensorField> fs;
    for (int k : orders) fs.push_back(random_field(ctx, b, k, 1));
    return fs;
  };
  std::vector<Definition> d;
  d.push_back({"nonlin.grid_aligned", 1e-12, [=](Context& ctx) {
                 const auto fs = inputs(ctx);
                 const auto spec = ActivationSpec::of(ActivationKind::Relu);
                 const auto base = nonlinearity(fs, spec, orders, os);
                 double err = 0.0;
                 for (int steps = 1; steps < 2 * b; ++steps) {
                   std::vector<TensorField> moved;
                   for (const auto& f : fs) moved.push_back(rotate_alpha(f, steps));
                   const auto a = nonlinearity(moved, spec, orders, os);
                   for (std::size_t j = 0; j < a.size(); ++j)
                     err = std::max(err, rel_err(a[j].samples, rotate_alpha(base[j], steps).samples));
                 }
                 // the activation itself commutes bitwise with grid shifts of the lift
                 const GroupFunction l = lift_sum(fs);
                 for (int steps = 1; steps < 2 * b; ++steps) {
                   const bool same =
                       activate(shift_gamma(l, steps), spec).samples == shift_gamma(activate(l, spec), steps).samples &&
                       activate(rotate_alpha(l, steps), spec).samples == rotate_alpha(activate(l, spec), steps).samples;
                   if (!same) err = std::max(err, 1.0);
                 }
                 return err;
               }});
  d.push_back({"nonlin.oversampling_monotone", std::nextafter(1.0, 0.0), [=](Context& ctx) {
                 // measured: largest ratio e(2f)/e(f); strictly decreasing means < 1
                 if (b < 2) throw std::invalid_argument("oversampling sweep needs bandwidth >= 2");
                 const auto fs = inputs(ctx);
                 std::vector<Rotation3> gs;
                 for (int t = 0; t < std::min(ctx.trials(), 5); ++t) gs.push_back(ctx.rotation());
                 const auto spec = ActivationSpec::of(ActivationKind::Relu);
                 std::vector<double> errs;
                 for (double f : {1.0, 2.0, 4.0}) {
                   double e = 0.0;
                   for (const auto& g : gs) e += sigma_equivariance(fs, g, spec, f, orders);
                   errs.push_back(e / gs.size());
                   ctx.note("error_x" + std::to_string(static_cast<int>(f)), errs.back());
                 }
                 return std::max(errs[1] / errs[0], errs[2] / errs[1]);
               }});
  d.push_back({"nonlin.identity_equivariance", 1e-10, [=](Context& ctx) {
                 const auto fs = inputs(ctx);
                 double err = 0.0;
                 for (int t = 0; t < std::min(ctx.trials(), 5); ++t)
                   err = std::max(err, sigma_equivariance(fs, ctx.rotation(),
                                                          ActivationSpec::of(ActivationKind::Identity), os, orders));
                 return err;
               }});
  d.push_back({"nonlin.relu_equivariance", 5e-2, [=](Context& ctx) {
                 // aliasing-limited: relu is not bandlimited on the sampled grid
                 const auto fs = inputs(ctx);
                 double err = 0.0;
                 for (int t = 0; t < std::min(ctx.trials(), 5); ++t)
                   err = std::max(err, sigma_equivariance(fs, ctx.rotation(),
                                                          ActivationSpec::of(ActivationKind::Relu), os, orders));
                 return err;
               }});
  d.push_back({"nonlin.prior_work_equivalence", 1e-10, [=](Context& ctx) {
                 const int sb = oversampled_bandwidth(b, os);
                 double err = 0.0;
                 for (auto kind : {ActivationKind::Relu, ActivationKind::Tanh, ActivationKind::Gelu}) {
                   const PointFeatures f = random_features(ctx, b - 1, 2);
                   err = std::max(err, rel_err(point_sphere_nonlin(f, ActivationSpec::of(kind), sb),
                                               point_so3_nonlin(f, ActivationSpec::of(kind), sb)));
                 }
                 return err;
               }});
  return d;
}

// ---------------------------------------------------------------------------
// se2 / se3

inline RadialProfile check_profile() { return {{0.0, 0.4, 0.8, 1.2}, {0.7, 1.0, 0.5, 0.0}}; }

inline std::vector<Definition> se2_suite(const SuiteConfig&) {
  std::vector<Definition> d;
  d.push_back({"se2.steerability", 1e-12, [](Context& ctx) {
                 double err = 0.0;
                 for (int mi = -4; mi <= 4; ++mi)
                   for (int mo = -4; mo <= 4; ++mo) {
                     const SE2KernelBasis k{mi, mo, check_profile()};
                     for (int t = 0; t < ctx.trials(); ++t) {
                       const double a = ctx.uniform(0.0, 1.2), phi = ctx.uniform(-kPi, kPi);
                       const double th = ctx.uniform(-kPi, kPi);
                       const Eigen::Vector2d x(a * std::cos(phi), a * std::sin(phi));
                       const cd lhs = se2_kernel_eval(k, Eigen::Rotation2Dd(th) * x);
                       const cd rhs = std::polar(1.0, (mo - mi) * th) * se2_kernel_eval(k, x);
                       err = std::max(err, std::abs(lhs - rhs));
                     }
                   }
                 return err;
               }});
  return d;
}

inline PointCloud random_cloud(Context& ctx, int n, int lmax, int channels) {
  Eigen::MatrixX3d pos(n, 3);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 3; ++k) pos(i, k) = ctx.uniform(-1.0, 1.0);
  PointCloud c = PointCloud::zeros(pos, lmax, channels);
  for (auto& f : c.features)
    for (auto& blk : f)
      for (Eigen::Index i = 0; i < blk.size(); ++i) blk.data()[i] = ctx.normal();
  return c;
}

inline TfnConvSpec random_tfn(Context& ctx, int lmax, int cin, int cout) {
  TfnConvSpec spec;
  spec.out_lmax = lmax;
  spec.out_channels = cout;
  spec.radius = 1.2;
  for (int li = 0; li <= lmax; ++li)
    for (int lo = 0; lo <= lmax; ++lo)
      for (int t : se3_admissible_t(li, lo)) {
        Eigen::MatrixXd w(cout, cin);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = ctx.normal() / std::sqrt(cin * 8.0);
        spec.terms.push_back({{li, lo, t, check_profile()}, w});
      }
  for (int l = 0; l <= lmax; ++l) {
    Eigen::MatrixXd s(cout, cin);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = ctx.normal();
    spec.self_interaction.push_back(s);
  }
  return spec;
}

inline double layer_equivariance(Context& ctx, const PointCloud& cloud, const TfnConvSpec& spec,
                                 ActivationKind kind, int sphere_bandwidth, int trials) {
  double err = 0.0;
  for (int t = 0; t < trials; ++t) {
    const SE3Element g{ctx.vector3(), ctx.rotation()};
    const auto act = ActivationSpec::of(kind);
    err = std::max(err, rel_err(se3_layer(transform_cloud(cloud, g), spec, act, sphere_bandwidth),
                                transform_cloud(se3_layer(cloud, spec, act, sphere_bandwidth), g)));
  }
  return err;
}

inline std::vector<Definition> se3_suite(const SuiteConfig& cfg) {
  const double os = cfg.oversample;
  std::vector<Definition> d;
  d.push_back({"se3.steerability", 1e-10, [](Context& ctx) {
                 double err = 0.0;
                 for (int li = 0; li <= 3; ++li)
                   for (int lo = 0; lo <= 3; ++lo)
                     for (int t : se3_admissible_t(li, lo)) {
                       const SE3KernelBasis k{li, lo, t, check_profile()};
                       for (int s = 0; s < std::min(ctx.trials(), 5); ++s) {
                         const Eigen::Vector3d x = ctx.vector3().normalized() * ctx.uniform(0.05, 1.2);
                         const Rotation3 g = ctx.rotation();
                         const Eigen::MatrixXd lhs = se3_kernel_eval(k, g.matrix() * x);
                         const Eigen::MatrixXd rhs =
                             real_wigner_D(lo, g) * se3_kernel_eval(k, x) * real_wigner_D(li, g).transpose();
                         err = std::max(err, (lhs - rhs).cwiseAbs().maxCoeff());
                       }
                     }
                 return err;
               }});
  d.push_back({"se3.t_orthogonality", 1e-11, [](Context& ctx) {
                 const auto grid = quadrature_grid(Space::S2, 8);
                 const double r = ctx.uniform(0.1, 1.1);
                 double err = 0.0;
                 for (int li = 0; li <= 3; ++li)
                   for (int lo = 0; lo <= 3; ++lo) {
                     const auto ts = se3_admissible_t(li, lo);
                     std::vector<std::vector<Eigen::MatrixXd>> k(ts.size());
                     for (std::size_t a = 0; a < ts.size(); ++a)
                       for (std::size_t i = 0; i < grid.size(); ++i)
                         k[a].push_back(se3_kernel_eval({li, lo, ts[a], check_profile()},
                                                        r * S2Point{grid.nodes[i][0], grid.nodes[i][1]}.vector()));
                     for (std::size_t a = 0; a < ts.size(); ++a)
                       for (std::size_t c = a + 1; c < ts.size(); ++c) {
                         double ip = 0.0;
                         for (std::size_t i = 0; i < grid.size(); ++i)
                           ip += grid.weights[i] * (k[a][i].array() * k[c][i].array()).sum();
                         err = std::max(err, std::abs(ip));
                       }
                   }
                 return err;
               }});
  d.push_back({"se3.tfn_equivariance", 1e-9, [](Context& ctx) {
                 const PointCloud cloud = random_cloud(ctx, 64, 2, 3);
                 const TfnConvSpec spec = random_tfn(ctx, 2, 3, 2);
                 double err = 0.0;
                 for (int t = 0; t < std::min(ctx.trials(), 5); ++t) {
                   const SE3Element g{ctx.vector3(), ctx.rotation()};
                   err = std::max(err, rel_err(tfn_point_conv(transform_cloud(cloud, g), spec),
                                               transform_cloud(tfn_point_conv(cloud, spec), g)));
                 }
                 return err;
               }});
  d.push_back({"se3.layer_equivariance", 1e-8, [os](Context& ctx) {
                 // relu on the per-point sphere grid; see details for the linear and smooth cases
                 const int sb = oversampled_bandwidth(4, os);
                 const PointCloud cloud = random_cloud(ctx, 64, 2, 3);
                 const TfnConvSpec spec = random_tfn(ctx, 2, 3, 2);
                 const int trials = std::min(ctx.trials(), 3);
                 ctx.note("sphere_bandwidth", sb);
                 ctx.note("identity_error", layer_equivariance(ctx, cloud, spec, ActivationKind::Identity, sb, trials));
                 ctx.note("gelu_error", layer_equivariance(ctx, cloud, spec, ActivationKind::Gelu, sb, trials));
                 return layer_equivariance(ctx, cloud, spec, ActivationKind::Relu, sb, trials);
               }});
  return d;
}

// ---------------------------------------------------------------------------
// gradients

inline std::vector<Definition> gradients_suite(const SuiteConfig& cfg) {
  const int b = cfg.bandwidth;
  const int m1 = std::min(1, b - 1), m2 = -m1;
  std::vector<Definition> d;
  auto setup = [=](Context& ctx) {
    struct S {
      SpectralBlocks f;
      SparseKernelSpec k;
    };
    return S{mackey_spectrum(random_field(ctx, b, m1, 2)), random_kernel(ctx, m1, m2, b, 2, 3)};
  };
  auto loss = [](const SpectralBlocks& ff, const SparseKernelSpec& kk) {
    const SpectralBlocks o = conv_spectral(ff, kk);
    return 0.5 * real_inner(o, o);
  };
  d.push_back({"gradients.vjp_adjoint", 1e-12, [=](Context& ctx) {
                 const auto [f, k] = setup(ctx);
                 SpectralBlocks u = random_blocks(ctx, b, 3);
                 const ConvGradients g = conv_vjp(f, k, u);
                 const double lhs = real_inner(u, conv_spectral(f, k));
                 double kern = 0.0;
                 for (int o = 0; o < 3; ++o)
                   for (int i = 0; i < 2; ++i)
                     for (int l = k.lmin(); l < b; ++l)
                       kern += (std::conj(g.kernel.c(o, i, l)) * k.c(o, i, l)).real();
                 return std::max(std::abs(lhs - real_inner(g.input, f)), std::abs(lhs - kern)) /
                        std::abs(lhs);
               }});
  d.push_back({"gradients.finite_difference_input", 1e-8, [=](Context& ctx) {
                 const auto [f, k] = setup(ctx);
                 const ConvGradients grad = conv_vjp(f, k, conv_spectral(f, k));
                 SpectralBlocks dir = SpectralBlocks::zeros(b, 2);
                 dir.column = m1;
                 for (int c = 0; c < 2; ++c)
                   for (int l = std::abs(m1); l < b; ++l)
                     for (int m = -l; m <= l; ++m) dir.block(c, l)(m + l, m1 + l) = ctx.complex();
                 const double h = 1e-5;
                 SpectralBlocks fp = f, fm = f;
                 for (std::size_t i = 0; i < f.blocks.size(); ++i) {
                   fp.blocks[i] += h * dir.blocks[i];
                   fm.blocks[i] -= h * dir.blocks[i];
                 }
                 const double fd = (loss(fp, k) - loss(fm, k)) / (2 * h);
                 const double an = real_inner(grad.input, dir);
                 return std::abs(fd - an) / std::abs(an);
               }});
  d.push_back({"gradients.finite_difference_kernel", 1e-8, [=](Context& ctx) {
                 const auto [f, k] = setup(ctx);
                 const ConvGradients grad = conv_vjp(f, k, conv_spectral(f, k));
                 const SparseKernelSpec kd = random_kernel(ctx, m1, m2, b, 2, 3);
                 const double h = 1e-5;
                 SparseKernelSpec kp = k, km = k;
                 double an = 0.0;
                 for (int o = 0; o < 3; ++o)
                   for (int i = 0; i < 2; ++i)
                     for (int l = k.lmin(); l < b; ++l) {
                       kp.at(o, i, l) += h * kd.c(o, i, l);
                       km.at(o, i, l) -= h * kd.c(o, i, l);
                       an += (std::conj(grad.kernel.c(o, i, l)) * kd.c(o, i, l)).real();
                     }
                 const double fd = (loss(f, kp) - loss(f, km)) / (2 * h);
                 return std::abs(fd - an) / std::abs(an);
               }});
  return d;
}

inline std::vector<Definition> definitions(const std::string& suite, const SuiteConfig& cfg) {
  using Builder = std::vector<Definition> (*)(const SuiteConfig&);
  const std::vector<std::pair<std::string, Builder>> all = {
      {"transforms", transforms_suite}, {"sparsity", sparsity_suite},
      {"conv-equivariance", conv_equivariance_suite}, {"conv-oracle", conv_oracle_suite},
      {"nonlin", nonlin_suite}, {"se2", se2_suite}, {"se3", se3_suite},
      {"gradients", gradients_suite}};
  std::vector<Definition> out;
  for (const auto& [name, build] : all)
    if (suite == "all" || suite == name)
      for (auto& d : build(cfg)) out.push_back(std::move(d));
  return out;
}

}  // namespace checks

/// Runs one suite. Throws std::invalid_argument for an unknown suite or bad config.
inline CheckReport run_suite(const std::string& suite, const SuiteConfig& cfg) {
  if (!is_suite(suite)) throw std::invalid_argument("unknown suite '" + suite + "'");
  if (cfg.bandwidth < 1) throw std::invalid_argument("bandwidth must be >= 1");
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(cfg.oversample >= 1.0)) throw std::invalid_argument("oversample must be >= 1");
  auto defs = checks::definitions(suite, cfg);
  std::sort(defs.begin(), defs.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  for (const auto& [name, tol] : cfg.tolerance_overrides) {
    const bool known = std::any_of(defs.begin(), defs.end(), [&](const auto& d) { return d.name == name; });
    if (!known) throw std::invalid_argument("tolerance override for unknown check '" + name + "'");
  }

  CheckReport report;
  report.suite = suite;
  report.config = cfg;
  report.orders = check_orders(cfg.bandwidth);
  report.checks.resize(defs.size());

  auto run_one = [&](std::size_t i) {
    const auto& def = defs[i];
    CheckResult& res = report.checks[i];
    res.name = def.name;
    res.seed = check_seed(cfg.seed, def.name);
    const auto ov = cfg.tolerance_overrides.find(def.name);
    res.tolerance = ov == cfg.tolerance_overrides.end() ? def.tolerance : ov->second;
    checks::Context ctx{cfg, std::mt19937_64(res.seed), {}};
    const auto start = std::chrono::steady_clock::now();
    try {
      res.measured_error = def.run(ctx);
    } catch (const std::exception& e) {
      res.measured_error = std::numeric_limits<double>::quiet_NaN();
      res.error = e.what();
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    res.wall_time_ms = cfg.timings ? ms : 0.0;
    res.details = std::move(ctx.details);
    res.passed = res.error.empty() && res.measured_error <= res.tolerance;
  };

  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(defs.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < defs.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < defs.size(); i = next++) run_one(i);
      });
    for (auto& th : pool) th.join();
  }
  return report;
}

}  // namespace homharm
