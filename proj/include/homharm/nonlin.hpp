#pragma once

// Equivariant nonlinearity: lift a set of mixed-order fields to one function on
// SO(3), apply a pointwise activation there, and project back to each output
// order. The regular action only permutes function values, so any pointwise
// activation commutes with it; the real and imaginary parts are activated
// independently.

#include "homharm/spectral_conv.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace homharm {

enum class ActivationKind { Identity, Relu, Gelu, Tanh, PerPointMlp };

inline std::string_view to_string(ActivationKind k) {
  switch (k) {
    case ActivationKind::Identity: return "identity";
    case ActivationKind::Relu: return "relu";
    case ActivationKind::Gelu: return "gelu";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::PerPointMlp: return "per_point_mlp";
  }
  return "?";
}

inline ActivationKind activation_from_string(std::string_view s) {
  if (s == "identity") return ActivationKind::Identity;
  if (s == "relu") return ActivationKind::Relu;
  if (s == "gelu") return ActivationKind::Gelu;
  if (s == "tanh") return ActivationKind::Tanh;
  if (s == "per_point_mlp") return ActivationKind::PerPointMlp;
  throw std::invalid_argument("unknown activation '" + std::string(s) + "'");
}

/// One dense layer y = W x + b.
struct MlpLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

/// Pointwise activation. per_point_mlp mixes channels at each node with relu
/// between layers and a linear last layer.
struct ActivationSpec {
  ActivationKind kind = ActivationKind::Relu;
  std::vector<MlpLayer> layers;

  static ActivationSpec of(ActivationKind k) { return {k, {}}; }

  /// Channels produced from `in` input channels.
  int output_channels(int in) const {
    if (kind != ActivationKind::PerPointMlp) return in;
    if (layers.empty()) throw std::invalid_argument("per_point_mlp needs at least one layer");
    int d = in;
    for (const auto& ly : layers) {
      if (ly.weight.cols() != d || ly.bias.size() != ly.weight.rows())
        throw std::invalid_argument("per_point_mlp: layer shapes do not chain");
      d = static_cast<int>(ly.weight.rows());
    }
    return d;
  }
};

inline double activate_scalar(ActivationKind k, double x) {
  switch (k) {
    case ActivationKind::Identity: return x;
    case ActivationKind::Relu: return x > 0.0 ? x : 0.0;
    case ActivationKind::Gelu: return 0.5 * x * std::erfc(-x / std::sqrt(2.0));
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::PerPointMlp: break;
  }
  throw std::invalid_argument("activate_scalar: per_point_mlp acts on channel vectors");
}

inline Eigen::VectorXd apply_mlp(const ActivationSpec& spec, Eigen::VectorXd x) {
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    x = spec.layers[i].weight * x + spec.layers[i].bias;
    if (i + 1 < spec.layers.size()) x = x.cwiseMax(0.0);
  }
  return x;
}

/// Applies xi at every node; channel c of node i only sees node i.
inline GroupFunction activate(const GroupFunction& l, const ActivationSpec& spec) {
  if (spec.kind != ActivationKind::PerPointMlp) {
    GroupFunction out = l;
    for (auto& v : out.samples)
      v = cd(activate_scalar(spec.kind, v.real()), activate_scalar(spec.kind, v.imag()));
    return out;
  }
  if (l.value_dim != 1) throw std::invalid_argument("activate: per_point_mlp expects scalar values");
  const int co = spec.output_channels(l.channels);
  GroupFunction out = GroupFunction::zeros(l.grid, co);
  Eigen::VectorXd re(l.channels), im(l.channels);
  for (std::size_t i = 0; i < l.nodes(); ++i) {
    for (int c = 0; c < l.channels; ++c) {
      re(c) = l.at(c, i).real();
      im(c) = l.at(c, i).imag();
    }
    const Eigen::VectorXd yr = apply_mlp(spec, re), yi = apply_mlp(spec, im);
    for (int c = 0; c < co; ++c) out.at(c, i) = cd(yr(c), yi(c));
  }
  return out;
}

/// Pointwise sum of the lifts of fields with possibly different orders.
inline GroupFunction lift_sum(const std::vector<TensorField>& fields) {
  if (fields.empty()) throw std::invalid_argument("lift_sum: no fields");
  GroupFunction out = lift(fields.front());
  for (std::size_t i = 1; i < fields.size(); ++i) {
    if (!(fields[i].grid == fields.front().grid))
      throw std::invalid_argument("lift_sum: fields live on different grids");
    if (fields[i].channels != fields.front().channels)
      throw std::invalid_argument("lift_sum: fields have different channel counts");
    const GroupFunction g = lift(fields[i]);
    for (std::size_t j = 0; j < out.samples.size(); ++j) out.samples[j] += g.samples[j];
  }
  return out;
}

/// Column extraction: the order-m part of l at gamma = 0, via the fiber DFT.
inline TensorField project_column(const GroupFunction& l, int m) { return fiber_dft(l, m); }

/// Bandlimited delta on the stabilizer for order m: sum_l (2l+1) D^l_{mm}. It
/// makes project_kernel coincide with project_column on bandlimited input.
inline GroupFunction delta_kernel(int m, int bandwidth) {
  SparseKernelSpec k = SparseKernelSpec::zeros(m, m, bandwidth);
  for (int l = k.lmin(); l < bandwidth; ++l) k.at(0, 0, l) = 2.0 * l + 1.0;
  return kernel_to_spatial(k);
}

/// f(x) = int kappa(g^-1 s(x)) l(g) dg for a kernel with kappa(g Rz(t)) = exp(-i m t) kappa(g).
/// Evaluated spectrally: the output spectrum is l^ kappa^, whose only nonzero
/// column is m. `kernel` holds one channel per channel of l (applied channelwise).
inline TensorField project_kernel(const GroupFunction& l, const GroupFunction& kernel, int m) {
  if (!(l.grid == kernel.grid))
    throw std::invalid_argument("project_kernel: kernel and input live on different grids");
  if (kernel.channels != 1 && kernel.channels != l.channels)
    throw std::invalid_argument("project_kernel: kernel needs 1 or l.channels channels");
  if (l.value_dim != 1 || kernel.value_dim != 1)
    throw std::invalid_argument("project_kernel: expects scalar functions");
  double scale = 0.0;
  for (const auto& v : kernel.samples) scale = std::max(scale, std::abs(v));
  const MackeyCheck mc = is_mackey(kernel, FieldType::so2(m), 1e-8 * std::max(1.0, scale));
  if (!mc.ok)
    throw std::invalid_argument("project_kernel: kernel is not Mackey for order " +
                                std::to_string(m) + " (residual " + std::to_string(mc.residual) +
                                ")");
  const int b = l.grid.bandwidth;
  const SpectralBlocks lh = so3_ft_forward(l, b);
  const SpectralBlocks kh = so3_ft_forward(kernel, b);
  SpectralBlocks out = SpectralBlocks::zeros(b, l.channels);
  out.column = m;
  for (int c = 0; c < l.channels; ++c)
    for (int deg = std::abs(m); deg < b; ++deg) {
      const int kc = kernel.channels == 1 ? 0 : c;
      out.block(c, deg).col(m + deg) = lh.block(c, deg) * kh.block(kc, deg).col(m + deg);
    }
  return mackey_synthesis(out, m);
}

/// Resamples an order-k field to another bandwidth through its spectrum
/// (zero padding up, truncation down).
inline TensorField resample(const TensorField& f, int bandwidth) {
  if (bandwidth == f.grid.bandwidth) return f;
  const SpectralBlocks s = mackey_spectrum(f);
  SpectralBlocks t = SpectralBlocks::zeros(bandwidth, f.channels);
  for (int c = 0; c < f.channels; ++c)
    for (int l = std::abs(f.type.order); l < std::min(bandwidth, s.bandwidth); ++l)
      t.block(c, l) = s.block(c, l);
  return mackey_synthesis(t, f.type.order);
}

/// Working bandwidth for an oversampling factor (>= 1).
inline int oversampled_bandwidth(int bandwidth, double oversample) {
  if (!(oversample >= 1.0)) throw std::invalid_argument("oversample factor must be >= 1");
  return static_cast<int>(std::ceil(oversample * bandwidth - 1e-9));
}

/// sigma = project o activate o lift_sum. Inputs are resampled to the
/// oversampled working grid, activated there, projected per output order by
/// column extraction and bandlimited back to the input bandwidth.
inline std::vector<TensorField> nonlinearity(const std::vector<TensorField>& fields,
                                             const ActivationSpec& spec,
                                             const std::vector<int>& out_orders,
                                             double oversample = 2.0) {
  if (fields.empty()) throw std::invalid_argument("nonlinearity: no fields");
  const int b = fields.front().grid.bandwidth;
  const int bw = oversampled_bandwidth(b, oversample);
  for (int m : out_orders)
    if (std::abs(m) >= b) throw std::invalid_argument("nonlinearity: output order must be < bandwidth");
  std::vector<TensorField> up;
  up.reserve(fields.size());
  for (const auto& f : fields) {
    if (!(f.grid == fields.front().grid))
      throw std::invalid_argument("nonlinearity: fields live on different grids");
    up.push_back(resample(f, bw));
  }
  const GroupFunction a = activate(lift_sum(up), spec);
  std::vector<TensorField> out;
  out.reserve(out_orders.size());
  for (int m : out_orders) out.push_back(resample(project_column(a, m), b));
  return out;
}

// ---------------------------------------------------------------------------
// Per-point sphere nonlinearity for SE(3) features

/// Features of one point: entry l is a (2l+1) x channels matrix of real-basis
/// coefficients of degree l.
using PointFeatures = std::vector<Eigen::MatrixXd>;

namespace detail {

// Complex coefficients f = Q^H f_real for every degree.
inline std::vector<Eigen::MatrixXcd> to_complex(const PointFeatures& f) {
  std::vector<Eigen::MatrixXcd> out;
  for (std::size_t l = 0; l < f.size(); ++l)
    out.push_back(real_basis_change(static_cast<int>(l)).adjoint() * f[l].cast<cd>());
  return out;
}

inline int feature_channels(const PointFeatures& f) {
  if (f.empty()) throw std::invalid_argument("point features are empty");
  for (std::size_t l = 0; l < f.size(); ++l)
    if (f[l].rows() != static_cast<Eigen::Index>(2 * l + 1) || f[l].cols() != f[0].cols())
      throw std::invalid_argument("point features: degree " + std::to_string(l) + " has shape " +
                                  std::to_string(f[l].rows()) + "x" + std::to_string(f[l].cols()));
  return static_cast<int>(f[0].cols());
}

}  // namespace detail

/// Per point: synthesize sum_l sum_m f^l_m Y^l_m / sqrt(2l+1) on the sphere
/// grid, apply xi (or the per-point MLP across channels), and analyse back to
/// degrees 0..out_lmax. The 1/sqrt(2l+1) makes the sphere signal the zero
/// column of the lifted SO(3) function, sum_m conj(D^l_{m0}(R)) f^l_m.
inline PointFeatures point_sphere_nonlin(const PointFeatures& f, const ActivationSpec& spec,
                                         int sphere_bandwidth, int out_lmax = -1) {
  const int channels = detail::feature_channels(f);
  const int lmax = static_cast<int>(f.size()) - 1;
  if (out_lmax < 0) out_lmax = lmax;
  if (lmax >= sphere_bandwidth || out_lmax >= sphere_bandwidth)
    throw std::invalid_argument("point_sphere_nonlin: feature degree must be < sphere bandwidth");
  const auto fc = detail::to_complex(f);
  ShtCoeffs c = ShtCoeffs::zeros(sphere_bandwidth, channels);
  for (int ch = 0; ch < channels; ++ch)
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m) c.at(ch, l, m) = fc[l](m + l, ch) / std::sqrt(2.0 * l + 1.0);
  const TensorField s = sht_inverse(c);
  GroupFunction as_fn{s.grid, 1, channels, s.samples};
  const GroupFunction a = activate(as_fn, spec);
  TensorField act_field = TensorField::zeros(s.grid, FieldType::so2(0), a.channels);
  act_field.samples = a.samples;
  const ShtCoeffs back = sht_forward(act_field, sphere_bandwidth);
  PointFeatures out;
  for (int l = 0; l <= out_lmax; ++l) {
    Eigen::MatrixXcd blk(2 * l + 1, a.channels);
    for (int ch = 0; ch < a.channels; ++ch)
      for (int m = -l; m <= l; ++m) blk(m + l, ch) = std::sqrt(2.0 * l + 1.0) * back.at(ch, l, m);
    out.push_back((real_basis_change(l) * blk).real());
  }
  return out;
}

/// The same map through the full SO(3) lift: l_0(R) = sum conj(D^l_{m0}(R)) f^l_m
/// on the SO(3) grid, xi pointwise, then f'^l_m = (2l+1) int D^l_{m0}(R) xi(l_0(R)) dR.
inline PointFeatures point_so3_nonlin(const PointFeatures& f, const ActivationSpec& spec,
                                      int bandwidth, int out_lmax = -1) {
  const int channels = detail::feature_channels(f);
  const int lmax = static_cast<int>(f.size()) - 1;
  if (out_lmax < 0) out_lmax = lmax;
  if (lmax >= bandwidth || out_lmax >= bandwidth)
    throw std::invalid_argument("point_so3_nonlin: feature degree must be < bandwidth");
  const auto fc = detail::to_complex(f);
  const auto grid = quadrature_grid(Space::SO3, bandwidth);
  GroupFunction l0 = GroupFunction::zeros(grid, channels);
  const int top = std::max(lmax, out_lmax);
  std::vector<std::vector<Eigen::MatrixXcd>> dcache(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Rotation3 r{grid.nodes[i][0], grid.nodes[i][1], grid.nodes[i][2]};
    for (int l = 0; l <= top; ++l) dcache[i].push_back(wigner_D(l, r).entries);
    for (int ch = 0; ch < channels; ++ch)
      for (int l = 0; l <= lmax; ++l)
        for (int m = -l; m <= l; ++m) l0.at(ch, i) += std::conj(dcache[i][l](m + l, l)) * fc[l](m + l, ch);
  }
  const GroupFunction a = activate(l0, spec);
  PointFeatures out;
  for (int l = 0; l <= out_lmax; ++l) {
    Eigen::MatrixXcd blk = Eigen::MatrixXcd::Zero(2 * l + 1, a.channels);
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (int ch = 0; ch < a.channels; ++ch)
        for (int m = -l; m <= l; ++m)
          blk(m + l, ch) += grid.weights[i] * dcache[i][l](m + l, l) * a.at(ch, i);
    blk *= (2.0 * l + 1.0);
    out.push_back((real_basis_change(l) * blk).real());
  }
  return out;
}

}  // namespace homharm
