#pragma once

// Closed-form steerable kernels for SE(2) and SE(3), and a TFN-style point
// convolution built on the SE(3) basis. Everything on the SE(3) side lives in
// the real basis of harmonics.hpp.

#include "homharm/harmonics.hpp"
#include "homharm/nonlin.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace homharm {

/// Real profile sampled on increasing radii, linearly interpolated. Constant
/// below the first radius, zero beyond the last.
struct RadialProfile {
  std::vector<double> radii;
  std::vector<double> values;

  static RadialProfile constant(double v, double r_max) { return {{0.0, r_max}, {v, v}}; }

  void validate() const {
    if (radii.empty() || radii.size() != values.size())
      throw std::invalid_argument("RadialProfile: radii and values must be non-empty and equal length");
    for (std::size_t i = 1; i < radii.size(); ++i)
      if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("RadialProfile: radii must increase");
  }

  double operator()(double r) const {
    if (r <= radii.front()) return values.front();
    if (r > radii.back()) return 0.0;
    const auto it = std::lower_bound(radii.begin(), radii.end(), r);
    const std::size_t hi = static_cast<std::size_t>(it - radii.begin());
    if (radii[hi] == r) return values[hi];
    const std::size_t lo = hi - 1;
    const double t = (r - radii[lo]) / (radii[hi] - radii[lo]);
    return (1.0 - t) * values[lo] + t * values[hi];
  }
};

// ---------------------------------------------------------------------------
// SE(2)

/// kappa(x) = exp(i (m_out - m_in) phi) R(a) in polar coordinates x = a (cos phi, sin phi).
struct SE2KernelBasis {
  int m_in = 0;
  int m_out = 0;
  RadialProfile radial;
};

/// The angular factor is undefined at the origin; there the kernel is R(0)
/// when m_out = m_in and zero otherwise.
inline cd se2_kernel_eval(const SE2KernelBasis& k, const Eigen::Vector2d& x) {
  const double a = x.norm();
  const int dm = k.m_out - k.m_in;
  if (a == 0.0) return dm == 0 ? cd(k.radial(0.0)) : cd{};
  if (dm == 0) return k.radial(a);
  return std::polar(k.radial(a), dm * std::atan2(x.y(), x.x()));
}

// ---------------------------------------------------------------------------
// SE(3)

/// K(x)_{ij} = C_t(|x|) sum_m CG(t, m; l_in, j | l_out, i) conj(Y^m_t(x / |x|)),
/// for |l_in - l_out| <= t <= l_in + l_out.
struct SE3KernelBasis {
  int l_in = 0;
  int l_out = 0;
  int t = 0;
  RadialProfile radial;

  void validate() const {
    if (l_in < 0 || l_out < 0) throw std::invalid_argument("SE3KernelBasis: degrees must be >= 0");
    if (t < std::abs(l_in - l_out) || t > l_in + l_out)
      throw std::invalid_argument("SE3KernelBasis: t=" + std::to_string(t) + " outside [" +
                                  std::to_string(std::abs(l_in - l_out)) + ", " +
                                  std::to_string(l_in + l_out) + "]");
    radial.validate();
  }
};

/// Admissible t values for a degree pair.
inline std::vector<int> se3_admissible_t(int l_in, int l_out) {
  std::vector<int> ts;
  for (int t = std::abs(l_in - l_out); t <= l_in + l_out; ++t) ts.push_back(t);
  return ts;
}

namespace detail {

/// CG(t, i - j; l_in, j | l_out, i) as a (2 l_out + 1) x (2 l_in + 1) matrix, cached.
inline std::shared_ptr<const Eigen::MatrixXd> se3_coupling(int l_in, int l_out, int t) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const Eigen::MatrixXd>> cache;
  const std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{l_in, l_out, t}];
  if (!slot) {
    auto m = std::make_shared<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(2 * l_out + 1, 2 * l_in + 1));
    for (int i = -l_out; i <= l_out; ++i)
      for (int j = -l_in; j <= l_in; ++j)
        (*m)(i + l_out, j + l_in) = clebsch_gordan(t, i - j, l_in, j, l_out, i);
    slot = std::move(m);
  }
  return slot;
}

}  // namespace detail

/// Complex-basis kernel matrix, (2 l_out + 1) x (2 l_in + 1). K(R x) = D^{l_out}(R) K(x) D^{l_in}(R)^H.
inline Eigen::MatrixXcd se3_kernel_eval_complex(const SE3KernelBasis& k, const Eigen::Vector3d& x) {
  const int ro = 2 * k.l_out + 1, ri = 2 * k.l_in + 1;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(ro, ri);
  const double r = x.norm();
  if (r == 0.0 && k.t > 0) return out;
  const double c = k.radial(r);
  if (c == 0.0) return out;
  const S2Point dir = r == 0.0 ? S2Point::north() : S2Point::from_vector(x);
  std::vector<cd> ybar(2 * k.t + 1);
  for (int m = -k.t; m <= k.t; ++m) ybar[m + k.t] = std::conj(sph_harm(k.t, m, dir));
  const auto cg = detail::se3_coupling(k.l_in, k.l_out, k.t);
  for (int i = -k.l_out; i <= k.l_out; ++i)
    for (int j = -k.l_in; j <= k.l_in; ++j) {
      const int m = i - j;
      if (std::abs(m) > k.t) continue;
      out(i + k.l_out, j + k.l_in) = c * (*cg)(i + k.l_out, j + k.l_in) * ybar[m + k.t];
    }
  return out;
}

/// Real-basis kernel matrix with K(R x) = D^{l_out}(R) K(x) D^{l_in}(R)^T for the
/// real Wigner matrices. In the real basis the complex kernel is real up to the
/// constant phase (-i)^{l_in + l_out + t}, which is removed.
inline Eigen::MatrixXd se3_kernel_eval(const SE3KernelBasis& k, const Eigen::Vector3d& x) {
  k.validate();
  const Eigen::MatrixXcd kc = se3_kernel_eval_complex(k, x);
  const Eigen::MatrixXcd real =
      real_basis_change(k.l_out) * kc * real_basis_change(k.l_in).adjoint();
  const cd phase = ((k.l_in + k.l_out + k.t) % 2) ? cd(0.0, -1.0) : cd(1.0, 0.0);
  return (phase * real).real();
}

// ---------------------------------------------------------------------------
// Point clouds

/// Positions plus per-point real-basis features for degrees 0..lmax.
struct PointCloud {
  Eigen::MatrixX3d positions;
  int channels = 1;
  int lmax = 0;
  std::vector<PointFeatures> features;  // [point][l] -> (2l+1) x channels

  static PointCloud zeros(const Eigen::MatrixX3d& pos, int lmax, int channels) {
    PointCloud c{pos, channels, lmax, {}};
    c.features.resize(pos.rows());
    for (auto& f : c.features)
      for (int l = 0; l <= lmax; ++l) f.push_back(Eigen::MatrixXd::Zero(2 * l + 1, channels));
    return c;
  }

  int size() const { return static_cast<int>(positions.rows()); }

  void validate() const {
    if (static_cast<int>(features.size()) != size())
      throw std::invalid_argument("PointCloud: one feature set per point required");
    if (!positions.allFinite()) throw std::invalid_argument("PointCloud: non-finite position");
    for (const auto& f : features) {
      if (static_cast<int>(f.size()) != lmax + 1)
        throw std::invalid_argument("PointCloud: feature degrees must cover 0..lmax");
      for (int l = 0; l <= lmax; ++l)
        if (f[l].rows() != 2 * l + 1 || f[l].cols() != channels || !f[l].allFinite())
          throw std::invalid_argument("PointCloud: bad feature block at degree " + std::to_string(l));
    }
  }
};

/// One kernel basis with its channel mixing matrix (out_channels x in_channels).
struct TfnTerm {
  SE3KernelBasis basis;
  Eigen::MatrixXd weights;
};

/// Point convolution: sum over terms of K(x_j - x_i) f^{l_in}(x_j) W^T over
/// neighbours j != i within `radius`, plus an optional per-point self
/// interaction f^{l}(x_i) S_l^T for each degree present on both sides.
struct TfnConvSpec {
  int out_lmax = 0;
  int out_channels = 1;
  double radius = 1.0;
  std::vector<TfnTerm> terms;
  std::vector<Eigen::MatrixXd> self_interaction;  // [l], empty matrix to skip
};

/// Neighbour lists within `radius` (self excluded), ascending indices.
inline std::vector<std::vector<int>> neighbours(const Eigen::MatrixX3d& pos, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("neighbours: radius must be > 0");
  const int n = static_cast<int>(pos.rows());
  std::vector<std::vector<int>> out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i && (pos.row(j) - pos.row(i)).norm() < radius) out[i].push_back(j);
  return out;
}

/// Points with no neighbours receive zero from the kernel terms.
inline PointCloud tfn_point_conv(const PointCloud& cloud, const TfnConvSpec& spec) {
  cloud.validate();
  for (const auto& term : spec.terms) {
    term.basis.validate();
    if (term.basis.l_in > cloud.lmax)
      throw std::invalid_argument("tfn_point_conv: basis input degree exceeds cloud lmax");
    if (term.basis.l_out > spec.out_lmax)
      throw std::invalid_argument("tfn_point_conv: basis output degree exceeds out_lmax");
    if (term.weights.rows() != spec.out_channels || term.weights.cols() != cloud.channels)
      throw std::invalid_argument("tfn_point_conv: weights must be out_channels x in_channels");
  }
  for (std::size_t l = 0; l < spec.self_interaction.size(); ++l) {
    const auto& s = spec.self_interaction[l];
    if (s.size() == 0) continue;
    if (static_cast<int>(l) > cloud.lmax || static_cast<int>(l) > spec.out_lmax ||
        s.rows() != spec.out_channels || s.cols() != cloud.channels)
      throw std::invalid_argument("tfn_point_conv: bad self-interaction at degree " + std::to_string(l));
  }
  const auto nb = neighbours(cloud.positions, spec.radius);
  PointCloud out = PointCloud::zeros(cloud.positions, spec.out_lmax, spec.out_channels);
  for (int i = 0; i < cloud.size(); ++i) {
    for (int j : nb[i]) {
      const Eigen::Vector3d d = (cloud.positions.row(j) - cloud.positions.row(i)).transpose();
      for (const auto& term : spec.terms) {
        const Eigen::MatrixXd k = se3_kernel_eval(term.basis, d);
        out.features[i][term.basis.l_out] +=
            k * cloud.features[j][term.basis.l_in] * term.weights.transpose();
      }
    }
    for (std::size_t l = 0; l < spec.self_interaction.size(); ++l)
      if (spec.self_interaction[l].size() != 0)
        out.features[i][l] += cloud.features[i][l] * spec.self_interaction[l].transpose();
  }
  return out;
}

/// Rigid motion of a cloud: positions R x + t, features rotated by the real Wigner blocks.
inline PointCloud transform_cloud(const PointCloud& cloud, const SE3Element& g) {
  PointCloud out = cloud;
  const Eigen::Matrix3d r = g.rotation.matrix();
  for (int i = 0; i < cloud.size(); ++i)
    out.positions.row(i) = (r * cloud.positions.row(i).transpose() + g.x).transpose();
  std::vector<Eigen::MatrixXd> d;
  for (int l = 0; l <= cloud.lmax; ++l) d.push_back(real_wigner_D(l, g.rotation));
  for (auto& f : out.features)
    for (int l = 0; l <= cloud.lmax; ++l) f[l] = d[l] * f[l];
  return out;
}

/// tfn_point_conv followed by the per-point sphere nonlinearity.
inline PointCloud se3_layer(const PointCloud& cloud, const TfnConvSpec& conv,
                            const ActivationSpec& act, int sphere_bandwidth) {
  PointCloud out = tfn_point_conv(cloud, conv);
  const int channels = act.output_channels(out.channels);
  for (auto& f : out.features) f = point_sphere_nonlin(f, act, sphere_bandwidth, out.lmax);
  out.channels = channels;
  return out;
}

}  // namespace homharm
