#pragma once

// Wigner d/D matrices, spherical harmonics, Clebsch-Gordan coefficients and
// the complex-to-real change of basis.
//
// Conventions (fixed for the whole library):
//   D^l_{mn}(alpha, beta, gamma) = exp(-i m alpha) d^l_{mn}(beta) exp(-i n gamma)
//   d^l_{mn}(beta) = <l m| exp(-i beta J_y) |l n>, so d^1_{00} = cos(beta)
//   Y^l_m(alpha, beta) = sqrt(2l + 1) * conj(D^l_{m0}(alpha, beta, 0))
// Y^l_m carries the Condon-Shortley phase and is orthonormal under the
// normalized sphere measure (total area 1), i.e. it is sqrt(4 pi) times the
// usual unit-sphere harmonic.

#include "homharm/groups.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace homharm {

using cd = std::complex<double>;

namespace detail {

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// cos(b/2)^p sin(b/2)^q * sqrt(binom(2l, k)), evaluated in log space so large
// powers near beta = 0 or pi underflow to exactly zero instead of NaN.
inline double seed_magnitude(int l, int k, int p, int q, double beta) {
  const double c = std::cos(0.5 * beta);
  const double s = std::sin(0.5 * beta);
  if ((p > 0 && c == 0.0) || (q > 0 && s == 0.0)) return 0.0;
  double lg = 0.5 * log_binomial(2 * l, k);
  if (p > 0) lg += p * std::log(std::abs(c));
  if (q > 0) lg += q * std::log(std::abs(s));
  double v = std::exp(lg);
  if (p % 2 == 1 && c < 0.0) v = -v;
  if (q % 2 == 1 && s < 0.0) v = -v;
  return v;
}

// d^{l0}_{mn}(beta) with l0 = max(|m|, |n|).
inline double wigner_d_seed(int m, int n, double beta) {
  const int l = std::max(std::abs(m), std::abs(n));
  if (m == l) {
    const double v = seed_magnitude(l, l + n, l + n, l - n, beta);
    return ((l - n) % 2 == 0) ? v : -v;
  }
  if (m == -l) return seed_magnitude(l, l - n, l - n, l + n, beta);
  if (n == l) return seed_magnitude(l, l + m, l + m, l - m, beta);
  // n == -l
  const double v = seed_magnitude(l, l - m, l - m, l + m, beta);
  return ((l + m) % 2 == 0) ? v : -v;
}

// Advances d^{l-1}, d^l to d^{l+1} for fixed (m, n).
inline double wigner_d_step(int l, int m, int n, double cb, double d_prev, double d_cur) {
  const double lp = l + 1.0;
  const double a = lp * (2.0 * l + 1.0) / std::sqrt((lp * lp - m * m) * (lp * lp - n * n));
  double b = cb;
  double c = 0.0;
  if (l > 0) {
    b -= static_cast<double>(m) * n / (static_cast<double>(l) * lp);
    c = std::sqrt((static_cast<double>(l) * l - m * m) * (static_cast<double>(l) * l - n * n)) /
        (l * (2.0 * l + 1.0));
  }
  return a * (b * d_cur - c * d_prev);
}

// Exact values at the poles, where the recursion would only be accurate to
// rounding: d^l(0) = I and d^l_{mn}(pi) = (-1)^(l+m) delta(m + n).
inline bool wigner_d_pole(int l, int m, int n, double beta, double& out) {
  if (beta == 0.0) {
    out = (m == n) ? 1.0 : 0.0;
    return true;
  }
  if (beta == kPi) {
    out = (m == -n) ? (((l + m) % 2 == 0) ? 1.0 : -1.0) : 0.0;
    return true;
  }
  return false;
}

}  // namespace detail

/// d^l_{mn}(beta) for a single entry via the three-term recursion in l.
inline double wigner_d_entry(int l, int m, int n, double beta) {
  if (l < 0 || std::abs(m) > l || std::abs(n) > l) return 0.0;
  if (double v; detail::wigner_d_pole(l, m, n, beta, v)) return v;
  const int l0 = std::max(std::abs(m), std::abs(n));
  const double cb = std::cos(beta);
  double prev = 0.0;
  double cur = detail::wigner_d_seed(m, n, beta);
  for (int j = l0; j < l; ++j) {
    const double next = detail::wigner_d_step(j, m, n, cb, prev, cur);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// All small-d matrices d^0 .. d^lmax at one beta. Entry (m + l, n + l) of
/// element l holds d^l_{mn}(beta).
inline std::vector<Eigen::MatrixXd> wigner_d_all(int lmax, double beta) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(lmax + 1);
  for (int l = 0; l <= lmax; ++l) out.push_back(Eigen::MatrixXd::Zero(2 * l + 1, 2 * l + 1));
  const double cb = std::cos(beta);
  for (int m = -lmax; m <= lmax; ++m) {
    for (int n = -lmax; n <= lmax; ++n) {
      const int l0 = std::max(std::abs(m), std::abs(n));
      double prev = 0.0;
      double cur = detail::wigner_d_seed(m, n, beta);
      out[l0](m + l0, n + l0) = cur;
      for (int l = l0; l < lmax; ++l) {
        const double next = detail::wigner_d_step(l, m, n, cb, prev, cur);
        prev = cur;
        cur = next;
        out[l + 1](m + l + 1, n + l + 1) = cur;
      }
    }
  }
  if (beta == 0.0 || beta == kPi)
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m)
        for (int n = -l; n <= l; ++n) detail::wigner_d_pole(l, m, n, beta, out[l](m + l, n + l));
  return out;
}

/// Small Wigner matrix d^l(beta), real orthogonal, rows/cols indexed m + l.
inline Eigen::MatrixXd wigner_d(int l, double beta) {
  if (l < 0) throw std::invalid_argument("wigner_d: negative degree");
  Eigen::MatrixXd d(2 * l + 1, 2 * l + 1);
  for (int m = -l; m <= l; ++m)
    for (int n = -l; n <= l; ++n) d(m + l, n + l) = wigner_d_entry(l, m, n, beta);
  return d;
}

/// Unitary irrep block D^l(g); rows/cols indexed by m, n in [-l, l].
struct WignerBlock {
  int degree = 0;
  Eigen::MatrixXcd entries;

  cd operator()(int m, int n) const { return entries(m + degree, n + degree); }
};

inline WignerBlock wigner_D(int l, const Rotation3& g) {
  WignerBlock out{l, Eigen::MatrixXcd(2 * l + 1, 2 * l + 1)};
  const Eigen::MatrixXd d = wigner_d(l, g.beta);
  for (int m = -l; m <= l; ++m)
    for (int n = -l; n <= l; ++n)
      out.entries(m + l, n + l) =
          std::polar(1.0, -m * g.alpha) * d(m + l, n + l) * std::polar(1.0, -n * g.gamma);
  return out;
}

/// Single entry D^l_{mn}(alpha, beta, gamma).
inline cd wigner_D_entry(int l, int m, int n, double alpha, double beta, double gamma) {
  return std::polar(1.0, -m * alpha - n * gamma) * wigner_d_entry(l, m, n, beta);
}

/// Spherical harmonic Y^l_m under the library convention (see file header).
inline cd sph_harm(int l, int m, const S2Point& x) {
  if (std::abs(m) > l) throw std::invalid_argument("sph_harm: |m| > l");
  return std::sqrt(2.0 * l + 1.0) * std::polar(1.0, m * x.alpha) * wigner_d_entry(l, m, 0, x.beta);
}

// ---------------------------------------------------------------------------
// Clebsch-Gordan coefficients

namespace detail {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline cpp_int factorial_exact(int n) {
  cpp_int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline bool cg_admissible(int l1, int m1, int l2, int m2, int l, int m) {
  if (l1 < 0 || l2 < 0 || l < 0) return false;
  if (std::abs(m1) > l1 || std::abs(m2) > l2 || std::abs(m) > l) return false;
  if (m != m1 + m2) return false;
  if (l < std::abs(l1 - l2) || l > l1 + l2) return false;
  return true;
}

// Racah's closed form with every factorial as an exact integer. The prefactor
// P and the alternating sum S are exact rationals; only sqrt(P S^2) is rounded.
inline double clebsch_gordan_exact(int l1, int m1, int l2, int m2, int l, int m) {
  const auto f = [](int n) { return factorial_exact(n); };
  cpp_rational pre(cpp_int(2 * l + 1) * f(l + l1 - l2) * f(l - l1 + l2) * f(l1 + l2 - l),
                   f(l1 + l2 + l + 1));
  pre *= cpp_rational(f(l + m) * f(l - m) * f(l1 - m1) * f(l1 + m1) * f(l2 - m2) * f(l2 + m2));
  const int kmin = std::max({0, l2 - l - m1, l1 - l + m2});
  const int kmax = std::min({l1 + l2 - l, l1 - m1, l2 + m2});
  cpp_rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    const cpp_int den = f(k) * f(l1 + l2 - l - k) * f(l1 - m1 - k) * f(l2 + m2 - k) *
                        f(l - l2 + m1 + k) * f(l - l1 - m2 + k);
    cpp_rational term(1, den);
    if (k % 2) sum -= term;
    else sum += term;
  }
  if (sum == 0) return 0.0;
  using big_float = boost::multiprecision::cpp_bin_float_50;
  const cpp_rational sq = pre * sum * sum;
  const big_float v = sqrt(big_float(numerator(sq)) / big_float(denominator(sq)));
  const double out = static_cast<double>(v);
  return sum < 0 ? -out : out;
}

inline double clebsch_gordan_lgamma(int l1, int m1, int l2, int m2, int l, int m) {
  const auto lf = [](int n) { return std::lgamma(n + 1.0); };
  const double lpre =
      0.5 * (std::log(2.0 * l + 1.0) + lf(l + l1 - l2) + lf(l - l1 + l2) + lf(l1 + l2 - l) -
             lf(l1 + l2 + l + 1) + lf(l + m) + lf(l - m) + lf(l1 - m1) + lf(l1 + m1) +
             lf(l2 - m2) + lf(l2 + m2));
  const int kmin = std::max({0, l2 - l - m1, l1 - l + m2});
  const int kmax = std::min({l1 + l2 - l, l1 - m1, l2 + m2});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double lden = lf(k) + lf(l1 + l2 - l - k) + lf(l1 - m1 - k) + lf(l2 + m2 - k) +
                        lf(l - l2 + m1 + k) + lf(l - l1 - m2 + k);
    const double t = std::exp(lpre - lden);
    sum += (k % 2) ? -t : t;
  }
  return sum;
}

}  // namespace detail

/// Degree up to which the exact-integer CG path is used.
inline constexpr int kCgExactMaxDegree = 20;

/// <l1 m1; l2 m2 | l m> in the Condon-Shortley convention. Zero outside the
/// selection rules m = m1 + m2, |l1 - l2| <= l <= l1 + l2.
inline double clebsch_gordan(int l1, int m1, int l2, int m2, int l, int m) {
  if (!detail::cg_admissible(l1, m1, l2, m2, l, m)) return 0.0;
  if (std::max({l1, l2, l}) <= kCgExactMaxDegree)
    return detail::clebsch_gordan_exact(l1, m1, l2, m2, l, m);
  return detail::clebsch_gordan_lgamma(l1, m1, l2, m2, l, m);
}

/// Precomputed CG coefficients for all degrees l1, l2 <= max_degree.
class CGTable {
 public:
  explicit CGTable(int max_degree) : lmax_(max_degree) {
    if (max_degree < 0) throw std::invalid_argument("CGTable: negative degree");
    const int n1 = lmax_ + 1;
    offsets_.resize(static_cast<std::size_t>(n1) * n1 * (2 * lmax_ + 1));
    std::size_t off = 0;
    for (int l1 = 0; l1 <= lmax_; ++l1)
      for (int l2 = 0; l2 <= lmax_; ++l2)
        for (int l = 0; l <= 2 * lmax_; ++l) {
          offsets_[key(l1, l2, l)] = off;
          if (l >= std::abs(l1 - l2) && l <= l1 + l2)
            off += static_cast<std::size_t>(2 * l1 + 1) * (2 * l2 + 1);
        }
    values_.resize(off);
    for (int l1 = 0; l1 <= lmax_; ++l1)
      for (int l2 = 0; l2 <= lmax_; ++l2)
        for (int l = std::abs(l1 - l2); l <= l1 + l2; ++l)
          for (int m1 = -l1; m1 <= l1; ++m1)
            for (int m2 = -l2; m2 <= l2; ++m2)
              values_[offsets_[key(l1, l2, l)] + (m1 + l1) * (2 * l2 + 1) + (m2 + l2)] =
                  clebsch_gordan(l1, m1, l2, m2, l, m1 + m2);
  }

  int max_degree() const { return lmax_; }

  double operator()(int l1, int m1, int l2, int m2, int l, int m) const {
    if (l1 > lmax_ || l2 > lmax_) throw std::out_of_range("CGTable: degree beyond table");
    if (!detail::cg_admissible(l1, m1, l2, m2, l, m)) return 0.0;
    return values_[offsets_[key(l1, l2, l)] + (m1 + l1) * (2 * l2 + 1) + (m2 + l2)];
  }

  /// CSV with header l1,m1,l2,m2,l,m,value; one row per admissible coefficient.
  void write_csv(std::ostream& os) const {
    os << "l1,m1,l2,m2,l,m,value\n";
    os.precision(17);
    for (int l1 = 0; l1 <= lmax_; ++l1)
      for (int l2 = 0; l2 <= lmax_; ++l2)
        for (int l = std::abs(l1 - l2); l <= l1 + l2; ++l)
          for (int m1 = -l1; m1 <= l1; ++m1)
            for (int m2 = -l2; m2 <= l2; ++m2) {
              if (std::abs(m1 + m2) > l) continue;
              os << l1 << ',' << m1 << ',' << l2 << ',' << m2 << ',' << l << ',' << (m1 + m2)
                 << ',' << (*this)(l1, m1, l2, m2, l, m1 + m2) << '\n';
            }
  }

 private:
  std::size_t key(int l1, int l2, int l) const {
    return (static_cast<std::size_t>(l1) * (lmax_ + 1) + l2) * (2 * lmax_ + 1) + l;
  }

  int lmax_;
  std::vector<double> values_;
  std::vector<std::size_t> offsets_;
};

// ---------------------------------------------------------------------------
// Real basis

/// Unitary Q with Q D^l Q^H real for every rotation. Real feature coefficients
/// are Q f; real harmonics are conj(Q) Y, i.e. for m > 0
/// S_m = ((-1)^m Y_m + Y_{-m}) / sqrt(2), S_{-m} = i (Y_{-m} - (-1)^m Y_m) / sqrt(2).
inline Eigen::MatrixXcd real_basis_change(int l) {
  if (l < 0) throw std::invalid_argument("real_basis_change: negative degree");
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2 * l + 1, 2 * l + 1);
  const double h = 1.0 / std::sqrt(2.0);
  for (int m = -l; m <= l; ++m) {
    const double sign = (std::abs(m) % 2) ? -1.0 : 1.0;
    if (m > 0) {
      c(m + l, m + l) = sign * h;
      c(m + l, -m + l) = h;
    } else if (m < 0) {
      c(m + l, m + l) = cd(0.0, h);
      c(m + l, -m + l) = cd(0.0, -sign * h);
    } else {
      c(l, l) = 1.0;
    }
  }
  return c.conjugate();
}

/// Real orthogonal representation Q D^l(g) Q^H.
inline Eigen::MatrixXd real_wigner_D(int l, const Rotation3& g) {
  const Eigen::MatrixXcd q = real_basis_change(l);
  return (q * wigner_D(l, g).entries * q.adjoint()).real();
}

/// Vector of real harmonics conj(Q) Y^l(x), indexed m + l.
inline Eigen::VectorXd real_sph_harm(int l, const S2Point& x) {
  Eigen::VectorXcd y(2 * l + 1);
  for (int m = -l; m <= l; ++m) y(m + l) = sph_harm(l, m, x);
  return (real_basis_change(l).conjugate() * y).real();
}

}  // namespace homharm
