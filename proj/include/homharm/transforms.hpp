#pragma once

// Spherical harmonic transform, SO(3) Fourier transform and the gamma-fiber DFT
// on the equiangular grids. All transforms are exact for bandlimited input
// (degrees l < B).
//
// Normalizations (Haar measure of total volume 1):
//   SO(3) forward   F^l_{mn} = int f(g) conj(D^l_{mn}(g)) dg
//   SO(3) inverse   f(g)     = sum_l (2l+1) sum_{mn} F^l_{mn} D^l_{mn}(g)
//   SHT forward     c^l_m    = int conj(Y^l_m) f dx
//   SHT inverse     f        = sum_{l,m} c^l_m Y^l_m
// A lifted order-k field f has F^l_{mn} = delta(n - k) int f(x) exp(i m alpha)
// d^l_{mk}(beta) dx; the 2 pi delta(k - n) of the unnormalized measure becomes
// a plain Kronecker delta here.

#include "homharm/field_types.hpp"
#include "homharm/harmonics.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace homharm {

/// Spherical harmonic coefficients c^l_m for l < B, per channel.
struct ShtCoeffs {
  int bandwidth = 1;
  int channels = 1;
  std::vector<cd> data;

  static ShtCoeffs zeros(int bandwidth, int channels) {
    ShtCoeffs c{bandwidth, channels, {}};
    c.data.assign(static_cast<std::size_t>(channels) * bandwidth * bandwidth, cd{});
    return c;
  }

  cd& at(int c, int l, int m) {
    return data[static_cast<std::size_t>(c) * bandwidth * bandwidth + l * l + (m + l)];
  }
  const cd& at(int c, int l, int m) const {
    return data[static_cast<std::size_t>(c) * bandwidth * bandwidth + l * l + (m + l)];
  }

  /// Keeps degrees l < b.
  ShtCoeffs truncated(int b) const {
    ShtCoeffs out = zeros(b, channels);
    for (int c = 0; c < channels; ++c)
      for (int l = 0; l < std::min(b, bandwidth); ++l)
        for (int m = -l; m <= l; ++m) out.at(c, l, m) = at(c, l, m);
    return out;
  }
};

/// Block Fourier coefficients F^l (a (2l+1) x (2l+1) matrix per degree and
/// channel). `column` is set when the blocks are known to be supported on a
/// single column n = column (the spectrum of a lifted field).
struct SpectralBlocks {
  int bandwidth = 1;
  int channels = 1;
  std::vector<Eigen::MatrixXcd> blocks;
  std::optional<int> column;

  static SpectralBlocks zeros(int bandwidth, int channels) {
    SpectralBlocks s{bandwidth, channels, {}, std::nullopt};
    s.blocks.reserve(static_cast<std::size_t>(bandwidth) * channels);
    for (int c = 0; c < channels; ++c)
      for (int l = 0; l < bandwidth; ++l)
        s.blocks.push_back(Eigen::MatrixXcd::Zero(2 * l + 1, 2 * l + 1));
    return s;
  }

  Eigen::MatrixXcd& block(int c, int l) {
    return blocks[static_cast<std::size_t>(c) * bandwidth + l];
  }
  const Eigen::MatrixXcd& block(int c, int l) const {
    return blocks[static_cast<std::size_t>(c) * bandwidth + l];
  }

  /// sum_l (2l+1) |F^l|_F^2, equal to the squared L2 norm on the group.
  double energy() const {
    double e = 0.0;
    for (int c = 0; c < channels; ++c)
      for (int l = 0; l < bandwidth; ++l) e += (2 * l + 1) * block(c, l).squaredNorm();
    return e;
  }

  /// Weighted energy of every entry outside column n.
  double energy_outside_column(int n) const {
    double e = 0.0;
    for (int c = 0; c < channels; ++c)
      for (int l = 0; l < bandwidth; ++l) {
        const auto& b = block(c, l);
        for (int j = -l; j <= l; ++j)
          if (j != n) e += (2 * l + 1) * b.col(j + l).squaredNorm();
      }
    return e;
  }

  /// Keeps degrees l < b.
  SpectralBlocks truncated(int b) const {
    SpectralBlocks out = zeros(b, channels);
    out.column = column;
    for (int c = 0; c < channels; ++c)
      for (int l = 0; l < std::min(b, bandwidth); ++l) out.block(c, l) = block(c, l);
    return out;
  }
};

namespace detail {

// Small-d matrices at every colatitude node of a bandwidth-B grid, shared
// read-only between callers.
struct GridWigner {
  int bandwidth;
  std::vector<double> beta_weights;
  std::vector<std::vector<Eigen::MatrixXd>> d;  // [jb][l]
  std::vector<cd> roots;                        // exp(2 pi i t / 2B)

  cd phase(int k, int t) const {
    const int n = 2 * bandwidth;
    int idx = (k * t) % n;
    if (idx < 0) idx += n;
    return roots[idx];
  }
};

inline std::shared_ptr<const GridWigner> grid_wigner(int bandwidth) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const GridWigner>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(bandwidth);
  if (it != cache.end()) return it->second;
  auto gw = std::make_shared<GridWigner>();
  gw->bandwidth = bandwidth;
  gw->beta_weights = colatitude_weights(bandwidth);
  const int n = 2 * bandwidth;
  gw->d.reserve(n);
  for (int j = 0; j < n; ++j)
    gw->d.push_back(wigner_d_all(bandwidth - 1, kPi * (2 * j + 1) / (4.0 * bandwidth)));
  gw->roots.resize(n);
  for (int t = 0; t < n; ++t) gw->roots[t] = std::polar(1.0, kTwoPi * t / n);
  cache.emplace(bandwidth, gw);
  return gw;
}

inline void require_grid(const QuadratureGrid& g, Space space, int bandwidth, const char* what) {
  if (g.space != space || g.bandwidth != bandwidth)
    throw std::invalid_argument(std::string(what) + ": grid is " +
                                std::string(to_string(g.space)) + " B=" +
                                std::to_string(g.bandwidth) + ", expected " +
                                std::string(to_string(space)) + " B=" + std::to_string(bandwidth));
}

// Azimuthal DFT over alpha of S^2 samples: out[m][jb] = (1/2B) sum_a exp(i sign m alpha) f.
inline std::vector<cd> alpha_dft(const GridWigner& gw, const cd* f, int sign) {
  const int n = 2 * gw.bandwidth;
  const int nm = 2 * gw.bandwidth - 1;
  std::vector<cd> out(static_cast<std::size_t>(nm) * n, cd{});
  for (int m = -(gw.bandwidth - 1); m < gw.bandwidth; ++m)
    for (int ia = 0; ia < n; ++ia) {
      const cd ph = gw.phase(sign * m, ia) / static_cast<double>(n);
      for (int jb = 0; jb < n; ++jb)
        out[static_cast<std::size_t>(m + gw.bandwidth - 1) * n + jb] += ph * f[ia * n + jb];
    }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spherical harmonic transform

/// c^l_m = <Y^l_m, f> for every channel of a scalar-sampled S^2 field.
inline ShtCoeffs sht_forward(const TensorField& f, int bandwidth) {
  detail::require_grid(f.grid, Space::S2, bandwidth, "sht_forward");
  if (f.dim() != 1) throw std::invalid_argument("sht_forward: expects one value per node");
  const auto gw = detail::grid_wigner(bandwidth);
  const int n = 2 * bandwidth;
  ShtCoeffs out = ShtCoeffs::zeros(bandwidth, f.channels);
  for (int c = 0; c < f.channels; ++c) {
    const auto fm = detail::alpha_dft(*gw, &f.samples[static_cast<std::size_t>(c) * n * n], -1);
    for (int l = 0; l < bandwidth; ++l) {
      const double norm = std::sqrt(2.0 * l + 1.0);
      for (int m = -l; m <= l; ++m) {
        cd acc{};
        for (int jb = 0; jb < n; ++jb)
          acc += gw->beta_weights[jb] * gw->d[jb][l](m + l, l) *
                 fm[static_cast<std::size_t>(m + bandwidth - 1) * n + jb];
        out.at(c, l, m) = norm * acc;
      }
    }
  }
  return out;
}

/// Pointwise synthesis sum c^l_m Y^l_m on the S^2 grid of the coefficients' bandwidth.
inline TensorField sht_inverse(const ShtCoeffs& coeffs) {
  const int bandwidth = coeffs.bandwidth;
  if (bandwidth < 1) throw std::invalid_argument("sht_inverse: bandwidth must be >= 1");
  const auto gw = detail::grid_wigner(bandwidth);
  const int n = 2 * bandwidth;
  TensorField out =
      TensorField::zeros(quadrature_grid(Space::S2, bandwidth), FieldType::so2(0), coeffs.channels);
  std::vector<cd> fm(static_cast<std::size_t>(2 * bandwidth - 1) * n);
  for (int c = 0; c < coeffs.channels; ++c) {
    std::fill(fm.begin(), fm.end(), cd{});
    for (int m = -(bandwidth - 1); m < bandwidth; ++m)
      for (int jb = 0; jb < n; ++jb) {
        cd acc{};
        for (int l = std::abs(m); l < bandwidth; ++l)
          acc += std::sqrt(2.0 * l + 1.0) * gw->d[jb][l](m + l, l) * coeffs.at(c, l, m);
        fm[static_cast<std::size_t>(m + bandwidth - 1) * n + jb] = acc;
      }
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb) {
        cd acc{};
        for (int m = -(bandwidth - 1); m < bandwidth; ++m)
          acc += gw->phase(m, ia) * fm[static_cast<std::size_t>(m + bandwidth - 1) * n + jb];
        out.at(c, out.grid.s2_index(ia, jb)) = acc;
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SO(3) Fourier transform

/// F^l_{mn} = int f conj(D^l_{mn}); gamma DFT, then alpha DFT, then the
/// weighted d-matrix sum over beta. Vector-valued functions are transformed
/// componentwise; output channel index is channel * value_dim + component.
inline SpectralBlocks so3_ft_forward(const GroupFunction& f, int bandwidth) {
  detail::require_grid(f.grid, Space::SO3, bandwidth, "so3_ft_forward");
  const auto gw = detail::grid_wigner(bandwidth);
  const int b = bandwidth;
  const int n = 2 * b;
  const int nf = 2 * b - 1;
  const int outc = f.channels * f.value_dim;
  SpectralBlocks out = SpectralBlocks::zeros(b, outc);
  std::vector<cd> a(static_cast<std::size_t>(n) * n * nf);   // [ia][jb][nn]
  std::vector<cd> cm(static_cast<std::size_t>(nf) * n * nf);  // [mm][jb][nn]
  for (int c = 0; c < f.channels; ++c)
    for (int comp = 0; comp < f.value_dim; ++comp) {
      std::fill(a.begin(), a.end(), cd{});
      std::fill(cm.begin(), cm.end(), cd{});
      for (int ia = 0; ia < n; ++ia)
        for (int jb = 0; jb < n; ++jb)
          for (int nn = -(b - 1); nn < b; ++nn) {
            cd acc{};
            for (int kg = 0; kg < n; ++kg)
              acc += gw->phase(nn, kg) * f.at(c, f.grid.so3_index(ia, jb, kg), comp);
            a[(static_cast<std::size_t>(ia) * n + jb) * nf + (nn + b - 1)] = acc / double(n);
          }
      for (int mm = -(b - 1); mm < b; ++mm)
        for (int ia = 0; ia < n; ++ia) {
          const cd ph = gw->phase(mm, ia) / double(n);
          for (int jb = 0; jb < n; ++jb)
            for (int nn = 0; nn < nf; ++nn)
              cm[(static_cast<std::size_t>(mm + b - 1) * n + jb) * nf + nn] +=
                  ph * a[(static_cast<std::size_t>(ia) * n + jb) * nf + nn];
        }
      const int oc = c * f.value_dim + comp;
      for (int l = 0; l < b; ++l) {
        auto& blk = out.block(oc, l);
        for (int m = -l; m <= l; ++m)
          for (int k = -l; k <= l; ++k) {
            cd acc{};
            for (int jb = 0; jb < n; ++jb)
              acc += gw->beta_weights[jb] * gw->d[jb][l](m + l, k + l) *
                     cm[(static_cast<std::size_t>(m + b - 1) * n + jb) * nf + (k + b - 1)];
            blk(m + l, k + l) = acc;
          }
      }
    }
  return out;
}

/// f(g) = sum_l (2l+1) tr(F^l^T D^l(g)) on the SO(3) grid of the blocks' bandwidth.
inline GroupFunction so3_ft_inverse(const SpectralBlocks& s) {
  const int b = s.bandwidth;
  if (b < 1) throw std::invalid_argument("so3_ft_inverse: bandwidth must be >= 1");
  const auto gw = detail::grid_wigner(b);
  const int n = 2 * b;
  const int nf = 2 * b - 1;
  GroupFunction out = GroupFunction::zeros(quadrature_grid(Space::SO3, b), s.channels);
  std::vector<cd> cm(static_cast<std::size_t>(nf) * n * nf);  // [mm][jb][nn]
  std::vector<cd> a(static_cast<std::size_t>(n) * n * nf);    // [ia][jb][nn]
  for (int c = 0; c < s.channels; ++c) {
    std::fill(cm.begin(), cm.end(), cd{});
    std::fill(a.begin(), a.end(), cd{});
    for (int l = 0; l < b; ++l) {
      const auto& blk = s.block(c, l);
      for (int m = -l; m <= l; ++m)
        for (int k = -l; k <= l; ++k) {
          const cd v = (2.0 * l + 1.0) * blk(m + l, k + l);
          if (v == cd{}) continue;
          for (int jb = 0; jb < n; ++jb)
            cm[(static_cast<std::size_t>(m + b - 1) * n + jb) * nf + (k + b - 1)] +=
                v * gw->d[jb][l](m + l, k + l);
        }
    }
    for (int ia = 0; ia < n; ++ia)
      for (int mm = -(b - 1); mm < b; ++mm) {
        const cd ph = gw->phase(-mm, ia);
        for (int jb = 0; jb < n; ++jb)
          for (int nn = 0; nn < nf; ++nn)
            a[(static_cast<std::size_t>(ia) * n + jb) * nf + nn] +=
                ph * cm[(static_cast<std::size_t>(mm + b - 1) * n + jb) * nf + nn];
      }
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb)
        for (int kg = 0; kg < n; ++kg) {
          cd acc{};
          for (int nn = -(b - 1); nn < b; ++nn)
            acc += gw->phase(-nn, kg) * a[(static_cast<std::size_t>(ia) * n + jb) * nf + (nn + b - 1)];
          out.at(c, out.grid.so3_index(ia, jb, kg)) = acc;
        }
  }
  return out;
}

/// out(alpha, beta) = (1/2B) sum_gamma exp(i m gamma) f(alpha, beta, gamma).
/// The result is tagged as an order-m field.
inline TensorField fiber_dft(const GroupFunction& f, int m) {
  if (f.grid.space != Space::SO3) throw std::invalid_argument("fiber_dft: expects an SO(3) grid");
  const int b = f.grid.bandwidth;
  if (std::abs(m) >= b) throw std::invalid_argument("fiber_dft: |m| must be < bandwidth");
  if (f.value_dim != 1) throw std::invalid_argument("fiber_dft: expects scalar values");
  const auto gw = detail::grid_wigner(b);
  const int n = 2 * b;
  TensorField out = TensorField::zeros(quadrature_grid(Space::S2, b), FieldType::so2(m), f.channels);
  for (int c = 0; c < f.channels; ++c)
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb) {
        cd acc{};
        for (int kg = 0; kg < n; ++kg) acc += gw->phase(m, kg) * f.at(c, f.grid.so3_index(ia, jb, kg));
        out.at(c, out.grid.s2_index(ia, jb)) = acc / double(n);
      }
  return out;
}

// ---------------------------------------------------------------------------
// Column transforms for lifted fields

/// Spectrum of the lift of an order-k field, computed on S^2 directly:
/// F^l_{mk} = int f exp(i m alpha) d^l_{mk}(beta) dx, zero elsewhere.
/// Equal to so3_ft_forward(lift(f)) on the grid.
inline SpectralBlocks mackey_spectrum(const TensorField& f) {
  if (f.grid.space != Space::S2) throw std::invalid_argument("mackey_spectrum: expects an S2 field");
  if (f.type.stabilizer != Stabilizer::SO2)
    throw std::invalid_argument("mackey_spectrum: expects an SO(2) field type");
  const int b = f.grid.bandwidth;
  const int k = f.type.order;
  if (std::abs(k) >= b) throw std::invalid_argument("mackey_spectrum: field order must be < bandwidth");
  const auto gw = detail::grid_wigner(b);
  const int n = 2 * b;
  SpectralBlocks out = SpectralBlocks::zeros(b, f.channels);
  out.column = k;
  for (int c = 0; c < f.channels; ++c) {
    const auto fm = detail::alpha_dft(*gw, &f.samples[static_cast<std::size_t>(c) * n * n], +1);
    for (int l = std::abs(k); l < b; ++l)
      for (int m = -l; m <= l; ++m) {
        cd acc{};
        for (int jb = 0; jb < n; ++jb)
          acc += gw->beta_weights[jb] * gw->d[jb][l](m + l, k + l) *
                 fm[static_cast<std::size_t>(m + b - 1) * n + jb];
        out.block(c, l)(m + l, k + l) = acc;
      }
  }
  return out;
}

/// Order-k field whose lift has the given column-k spectrum:
/// f(alpha, beta) = sum_l (2l+1) sum_m F^l_{mk} D^l_{mk}(alpha, beta, 0).
inline TensorField mackey_synthesis(const SpectralBlocks& s, int k) {
  const int b = s.bandwidth;
  if (std::abs(k) >= b) throw std::invalid_argument("mackey_synthesis: order must be < bandwidth");
  const auto gw = detail::grid_wigner(b);
  const int n = 2 * b;
  TensorField out = TensorField::zeros(quadrature_grid(Space::S2, b), FieldType::so2(k), s.channels);
  std::vector<cd> fm(static_cast<std::size_t>(2 * b - 1) * n);
  for (int c = 0; c < s.channels; ++c) {
    std::fill(fm.begin(), fm.end(), cd{});
    for (int l = std::abs(k); l < b; ++l) {
      const auto& blk = s.block(c, l);
      for (int m = -l; m <= l; ++m) {
        const cd v = (2.0 * l + 1.0) * blk(m + l, k + l);
        for (int jb = 0; jb < n; ++jb)
          fm[static_cast<std::size_t>(m + b - 1) * n + jb] += v * gw->d[jb][l](m + l, k + l);
      }
    }
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb) {
        cd acc{};
        for (int m = -(b - 1); m < b; ++m)
          acc += gw->phase(-m, ia) * fm[static_cast<std::size_t>(m + b - 1) * n + jb];
        out.at(c, out.grid.s2_index(ia, jb)) = acc;
      }
  }
  return out;
}

/// Evaluates the order-k field with column-k spectrum `s` at an arbitrary point.
inline cd mackey_evaluate(const SpectralBlocks& s, int k, int channel, const S2Point& x) {
  const int b = s.bandwidth;
  const auto d = wigner_d_all(b - 1, x.beta);
  cd acc{};
  for (int l = std::abs(k); l < b; ++l)
    for (int m = -l; m <= l; ++m)
      acc += (2.0 * l + 1.0) * s.block(channel, l)(m + l, k + l) * std::polar(1.0, -m * x.alpha) *
             d[l](m + l, k + l);
  return acc;
}

}  // namespace homharm
