#pragma once

// Equivariant convolution on S^2 / SO(3) with the sparse kernel
// kappa(R) = sum_l c^l D^l_{m1 m2}(R).
//
// Convolution is (kappa * f)(g) = int f(v) kappa(v^-1 g) dv, so under the
// normalized transform F(kappa * f) = F(f) F(kappa). The kernel spectrum is
// c^l / (2l + 1) at entry (m1, m2) and zero elsewhere, hence per degree the
// output column m2 equals the input column m1 scaled by c^l / (2l + 1). The
// coefficients c^l = 2l + 1 give the identity for m1 = m2.

#include "homharm/fields.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace homharm {

/// Kernel coefficients for one (m_in, m_out) pair, per output/input channel.
/// coeffs[o][i][l - lmin()] holds c^l for lmin() <= l < bandwidth.
struct SparseKernelSpec {
  int m_in = 0;
  int m_out = 0;
  int bandwidth = 1;
  int in_channels = 1;
  int out_channels = 1;
  std::vector<std::vector<std::vector<cd>>> coeffs;

  int lmin() const { return std::max(std::abs(m_in), std::abs(m_out)); }
  /// Number of free coefficients per channel pair.
  int dimension() const { return std::max(0, bandwidth - lmin()); }

  static SparseKernelSpec zeros(int m_in, int m_out, int bandwidth, int in_channels = 1,
                                int out_channels = 1) {
    if (bandwidth < 1) throw std::invalid_argument("SparseKernelSpec: bandwidth must be >= 1");
    if (in_channels < 1 || out_channels < 1)
      throw std::invalid_argument("SparseKernelSpec: channel counts must be >= 1");
    SparseKernelSpec k{m_in, m_out, bandwidth, in_channels, out_channels, {}};
    k.coeffs.assign(out_channels,
                    std::vector<std::vector<cd>>(in_channels, std::vector<cd>(k.dimension(), cd{})));
    return k;
  }

  /// c^l, structurally zero below lmin().
  cd c(int o, int i, int l) const {
    if (l < lmin() || l >= bandwidth) return {};
    return coeffs[o][i][l - lmin()];
  }
  cd& at(int o, int i, int l) {
    if (l < lmin() || l >= bandwidth)
      throw std::out_of_range("SparseKernelSpec: degree " + std::to_string(l) +
                              " outside the admissible range");
    return coeffs[o][i][l - lmin()];
  }

  void validate() const {
    if (static_cast<int>(coeffs.size()) != out_channels)
      throw std::invalid_argument("SparseKernelSpec: coeffs must have out_channels rows");
    for (const auto& row : coeffs) {
      if (static_cast<int>(row.size()) != in_channels)
        throw std::invalid_argument("SparseKernelSpec: coeffs rows must have in_channels entries");
      for (const auto& v : row)
        if (static_cast<int>(v.size()) != dimension())
          throw std::invalid_argument("SparseKernelSpec: expected " + std::to_string(dimension()) +
                                      " coefficients per channel pair");
    }
  }
};

/// Kernel whose conjugate reproduces conj(kappa): order (-m1, -m2) with
/// coefficients (-1)^(m1 - m2) conj(c^l). Pairing a kernel with its partner on
/// conjugate inputs keeps real-valued features real.
inline SparseKernelSpec conjugate_partner(const SparseKernelSpec& k) {
  SparseKernelSpec p = k;
  p.m_in = -k.m_in;
  p.m_out = -k.m_out;
  const double sign = ((k.m_in - k.m_out) % 2 == 0) ? 1.0 : -1.0;
  for (auto& row : p.coeffs)
    for (auto& v : row)
      for (auto& c : v) c = sign * std::conj(c);
  return p;
}

namespace detail {

inline void check_conv_input(const SpectralBlocks& f, const SparseKernelSpec& k, const char* what) {
  k.validate();
  if (f.bandwidth != k.bandwidth)
    throw std::invalid_argument(std::string(what) + ": bandwidth mismatch (input B=" +
                                std::to_string(f.bandwidth) + ", kernel B=" +
                                std::to_string(k.bandwidth) + ")");
  if (f.channels != k.in_channels)
    throw std::invalid_argument(std::string(what) + ": input has " + std::to_string(f.channels) +
                                " channels, kernel expects " + std::to_string(k.in_channels));
  if (!f.column || *f.column != k.m_in)
    throw std::invalid_argument(std::string(what) + ": input spectrum is not column-sparse at m_in=" +
                                std::to_string(k.m_in) + " (field type mismatch)");
}

}  // namespace detail

/// Output column m_out of degree l = sum_i c^l[o][i] / (2l+1) * input column m_in.
inline SpectralBlocks conv_spectral(const SpectralBlocks& f, const SparseKernelSpec& k) {
  detail::check_conv_input(f, k, "conv_spectral");
  SpectralBlocks out = SpectralBlocks::zeros(k.bandwidth, k.out_channels);
  out.column = k.m_out;
  for (int l = k.lmin(); l < k.bandwidth; ++l) {
    const double inv = 1.0 / (2.0 * l + 1.0);
    for (int o = 0; o < k.out_channels; ++o)
      for (int i = 0; i < k.in_channels; ++i)
        out.block(o, l).col(k.m_out + l) += (k.c(o, i, l) * inv) * f.block(i, l).col(k.m_in + l);
  }
  return out;
}

/// Field-level convolution: order m_in fields in, order m_out fields out.
inline TensorField convolve(const TensorField& f, const SparseKernelSpec& k) {
  if (f.type != FieldType::so2(k.m_in))
    throw std::invalid_argument("convolve: field order " + std::to_string(f.type.order) +
                                " does not match kernel m_in=" + std::to_string(k.m_in));
  return mackey_synthesis(conv_spectral(mackey_spectrum(f), k), k.m_out);
}

/// Dense kernel spectrum: blocks[o * in + i], entry (m1, m2) of degree l is c^l / (2l+1).
inline SpectralBlocks kernel_spectrum(const SparseKernelSpec& k) {
  k.validate();
  SpectralBlocks s = SpectralBlocks::zeros(k.bandwidth, k.out_channels * k.in_channels);
  for (int o = 0; o < k.out_channels; ++o)
    for (int i = 0; i < k.in_channels; ++i)
      for (int l = k.lmin(); l < k.bandwidth; ++l)
        s.block(o * k.in_channels + i, l)(k.m_in + l, k.m_out + l) = k.c(o, i, l) / (2.0 * l + 1.0);
  return s;
}

/// Unrestricted spectral convolution out[o]^l = sum_i f[i]^l K[o, i]^l with an
/// arbitrary dense kernel spectrum (channels ordered o * in_channels + i).
inline SpectralBlocks conv_dense(const SpectralBlocks& f, const SpectralBlocks& kernel,
                                 int out_channels) {
  if (kernel.bandwidth != f.bandwidth || kernel.channels != out_channels * f.channels)
    throw std::invalid_argument("conv_dense: kernel shape does not match input");
  SpectralBlocks out = SpectralBlocks::zeros(f.bandwidth, out_channels);
  for (int l = 0; l < f.bandwidth; ++l)
    for (int o = 0; o < out_channels; ++o)
      for (int i = 0; i < f.channels; ++i)
        out.block(o, l) += f.block(i, l) * kernel.block(o * f.channels + i, l);
  return out;
}

/// Keeps only column n of every block (the order-n Mackey part).
inline SpectralBlocks restrict_column(const SpectralBlocks& s, int n) {
  SpectralBlocks out = SpectralBlocks::zeros(s.bandwidth, s.channels);
  out.column = n;
  for (int c = 0; c < s.channels; ++c)
    for (int l = std::abs(n); l < s.bandwidth; ++l) out.block(c, l).col(n + l) = s.block(c, l).col(n + l);
  return out;
}

/// Keeps only entry (m1, m2) of every block.
inline SpectralBlocks restrict_entry(const SpectralBlocks& s, int m1, int m2) {
  SpectralBlocks out = SpectralBlocks::zeros(s.bandwidth, s.channels);
  for (int c = 0; c < s.channels; ++c)
    for (int l = std::max(std::abs(m1), std::abs(m2)); l < s.bandwidth; ++l)
      out.block(c, l)(m1 + l, m2 + l) = s.block(c, l)(m1 + l, m2 + l);
  return out;
}

/// kappa(alpha, beta, gamma) = exp(-i m1 alpha) sum_l c^l d^l_{m1 m2}(beta) exp(-i m2 gamma)
/// on the SO(3) grid; channel o * in_channels + i.
inline GroupFunction kernel_to_spatial(const SparseKernelSpec& k) {
  k.validate();
  const int b = k.bandwidth;
  const int n = 2 * b;
  const auto gw = detail::grid_wigner(b);
  GroupFunction out =
      GroupFunction::zeros(quadrature_grid(Space::SO3, b), k.out_channels * k.in_channels);
  for (int o = 0; o < k.out_channels; ++o)
    for (int i = 0; i < k.in_channels; ++i) {
      const int ch = o * k.in_channels + i;
      for (int jb = 0; jb < n; ++jb) {
        cd radial{};
        for (int l = k.lmin(); l < b; ++l)
          radial += k.c(o, i, l) * gw->d[jb][l](k.m_in + l, k.m_out + l);
        for (int ia = 0; ia < n; ++ia)
          for (int kg = 0; kg < n; ++kg)
            out.at(ch, out.grid.so3_index(ia, jb, kg)) =
                gw->phase(-k.m_in, ia) * radial * gw->phase(-k.m_out, kg);
      }
    }
  return out;
}

/// kappa(g) in twisted form: with y = g N and h = twist(g, N) (so g = s(y) Rz(h)),
/// kappa(g) = exp(-i m2 h) sum_l c^l D^l_{m1 m2}(alpha_y, beta_y, 0).
inline cd kernel_eval_twisted(const SparseKernelSpec& k, int o, int i, const Rotation3& g) {
  const S2Point y = coset_point(g);
  const double h = twist(g, S2Point::north());
  cd acc{};
  for (int l = k.lmin(); l < k.bandwidth; ++l)
    acc += k.c(o, i, l) * wigner_D_entry(l, k.m_in, k.m_out, y.alpha, y.beta, 0.0);
  return std::polar(1.0, -k.m_out * h) * acc;
}

/// Brute-force correlation f_out(x) = int f_in(x') kappa(s(x')^-1 s(x)) dx' with
/// the kernel evaluated through the twist. O(nodes^2 * B) work; meant for B <= 4.
/// The global constant relating it to conv_spectral is 1 under the normalized
/// measures used here.
inline TensorField conv_spatial_oracle(const TensorField& f, const SparseKernelSpec& k) {
  detail::require_so2_field(f, "conv_spatial_oracle");
  k.validate();
  if (f.type.order != k.m_in)
    throw std::invalid_argument("conv_spatial_oracle: field order does not match kernel m_in");
  if (f.channels != k.in_channels)
    throw std::invalid_argument("conv_spatial_oracle: channel count does not match kernel");
  const auto& grid = f.grid;
  const std::size_t nn = grid.size();
  std::vector<Rotation3> sec(nn);
  for (std::size_t p = 0; p < nn; ++p) sec[p] = section(S2Point{grid.nodes[p][0], grid.nodes[p][1]});
  TensorField out = TensorField::zeros(grid, FieldType::so2(k.m_out), k.out_channels);
  std::vector<cd> kv(static_cast<std::size_t>(k.out_channels) * k.in_channels);
  for (std::size_t x = 0; x < nn; ++x)
    for (std::size_t xp = 0; xp < nn; ++xp) {
      const Rotation3 g = compose(sec[xp].inverse(), sec[x]);
      for (int o = 0; o < k.out_channels; ++o)
        for (int i = 0; i < k.in_channels; ++i)
          out.at(o, x) += grid.weights[xp] * kernel_eval_twisted(k, o, i, g) * f.at(i, xp);
    }
  return out;
}

struct ConvGradients {
  SpectralBlocks input;
  SparseKernelSpec kernel;
};

/// Adjoint of conv_spectral in the real inner product Re sum conj(a) b over all
/// block entries: returns the cotangents for the input spectrum and for c^l.
inline ConvGradients conv_vjp(const SpectralBlocks& f, const SparseKernelSpec& k,
                              const SpectralBlocks& upstream) {
  detail::check_conv_input(f, k, "conv_vjp");
  if (upstream.bandwidth != k.bandwidth || upstream.channels != k.out_channels)
    throw std::invalid_argument("conv_vjp: cotangent shape does not match the output");
  ConvGradients g{SpectralBlocks::zeros(k.bandwidth, k.in_channels),
                  SparseKernelSpec::zeros(k.m_in, k.m_out, k.bandwidth, k.in_channels, k.out_channels)};
  g.input.column = k.m_in;
  for (int l = k.lmin(); l < k.bandwidth; ++l) {
    const double inv = 1.0 / (2.0 * l + 1.0);
    for (int o = 0; o < k.out_channels; ++o) {
      const auto u = upstream.block(o, l).col(k.m_out + l);
      for (int i = 0; i < k.in_channels; ++i) {
        g.input.block(i, l).col(k.m_in + l) += (std::conj(k.c(o, i, l)) * inv) * u;
        g.kernel.at(o, i, l) = f.block(i, l).col(k.m_in + l).dot(u) * inv;
      }
    }
  }
  return g;
}

/// Re sum conj(a) b over all entries.
inline double real_inner(const SpectralBlocks& a, const SpectralBlocks& b) {
  if (a.blocks.size() != b.blocks.size()) throw std::invalid_argument("real_inner: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    acc += (a.blocks[i].conjugate().cwiseProduct(b.blocks[i])).sum().real();
  }
  return acc;
}

}  // namespace homharm
