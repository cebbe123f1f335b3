#pragma once

// Lifting and projection between order-k fields on S^2 and Mackey functions on
// SO(3), the induced action on fields and the regular action on functions.
//
// For an order-k field the lift is f_up(alpha, beta, gamma) = exp(-i k gamma) f(alpha, beta),
// so f_up(g Rz(t)) = exp(-i k t) f_up(g) and the induced action reads
// (L_g f)(x) = exp(-i k h(g^-1, x)) f(g^-1 x).

#include "homharm/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace homharm {

namespace detail {

inline void require_so2_field(const TensorField& f, const char* what) {
  if (f.grid.space != Space::S2)
    throw std::invalid_argument(std::string(what) + ": expects a field on the S2 grid");
  if (f.type.stabilizer != Stabilizer::SO2)
    throw std::invalid_argument(std::string(what) + ": expects an SO(2) field type");
  f.validate();
}

}  // namespace detail

/// Mackey function exp(-i k gamma) f(alpha, beta) on the SO(3) grid of the same bandwidth.
inline GroupFunction lift(const TensorField& f) {
  detail::require_so2_field(f, "lift");
  const int b = f.grid.bandwidth;
  const int n = 2 * b;
  const int k = f.type.order;
  GroupFunction out = GroupFunction::zeros(quadrature_grid(Space::SO3, b), f.channels);
  std::vector<cd> phase(n);
  for (int kg = 0; kg < n; ++kg) phase[kg] = std::polar(1.0, -k * out.grid.gamma(kg));
  for (int c = 0; c < f.channels; ++c)
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb) {
        const cd v = f.at(c, f.grid.s2_index(ia, jb));
        for (int kg = 0; kg < n; ++kg) out.at(c, out.grid.so3_index(ia, jb, kg)) = phase[kg] * v;
      }
  return out;
}

/// Restriction to the gamma = 0 slice, tagged with the given field type.
inline TensorField project(const GroupFunction& m, FieldType type) {
  if (m.grid.space != Space::SO3) throw std::invalid_argument("project: expects an SO(3) grid");
  if (type.stabilizer != Stabilizer::SO2 || m.value_dim != 1)
    throw std::invalid_argument("project: only scalar SO(2) field types live on S2");
  const int b = m.grid.bandwidth;
  const int n = 2 * b;
  TensorField out = TensorField::zeros(quadrature_grid(Space::S2, b), type, m.channels);
  for (int c = 0; c < m.channels; ++c)
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb)
        out.at(c, out.grid.s2_index(ia, jb)) = m.at(c, m.grid.so3_index(ia, jb, 0));
  return out;
}

struct MackeyCheck {
  bool ok = false;
  double residual = 0.0;
};

/// max |m(g h) - exp(-i k t) m(g)| over grid nodes g and grid-aligned h = Rz(t).
inline MackeyCheck is_mackey(const GroupFunction& m, FieldType type, double tol) {
  if (m.grid.space != Space::SO3) throw std::invalid_argument("is_mackey: expects an SO(3) grid");
  if (type.stabilizer != Stabilizer::SO2)
    throw std::invalid_argument("is_mackey: only SO(2) field types are supported");
  const int n = m.grid.side();
  const int k = type.order;
  double res = 0.0;
  for (int c = 0; c < m.channels; ++c)
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb)
        for (int s = 1; s < n; ++s) {
          const cd ph = std::polar(1.0, -k * m.grid.gamma(s));
          for (int kg = 0; kg < n; ++kg)
            for (int d = 0; d < m.value_dim; ++d) {
              const cd moved = m.at(c, m.grid.so3_index(ia, jb, (kg + s) % n), d);
              const cd here = m.at(c, m.grid.so3_index(ia, jb, kg), d);
              res = std::max(res, std::abs(moved - ph * here));
            }
        }
  return {res <= tol, res};
}

/// Spectrum after left translation by g: F -> conj(D^l(g)) F.
inline SpectralBlocks rotate_spectrum(const SpectralBlocks& s, const Rotation3& g) {
  SpectralBlocks out = s;
  for (int l = 0; l < s.bandwidth; ++l) {
    const Eigen::MatrixXcd d = wigner_D(l, g).entries.conjugate();
    for (int c = 0; c < s.channels; ++c) out.block(c, l) = d * s.block(c, l);
  }
  return out;
}

/// (L_g f)(x) = exp(-i k h(g^-1, x)) f(g^-1 x), resampled spectrally. Exact for
/// bandlimited fields.
inline TensorField induced_action(const Rotation3& g, const TensorField& f) {
  detail::require_so2_field(f, "induced_action");
  if (std::abs(f.type.order) >= f.grid.bandwidth)
    throw std::invalid_argument("induced_action: field order " + std::to_string(f.type.order) +
                                " needs bandwidth > |order|, got B=" +
                                std::to_string(f.grid.bandwidth));
  return mackey_synthesis(rotate_spectrum(mackey_spectrum(f), g), f.type.order);
}

inline TensorField induced_action(const GroupElement& g, const TensorField& f) {
  if (!std::holds_alternative<Rotation3>(g))
    throw std::invalid_argument("induced_action: fields on S2 need an SO(3) element");
  return induced_action(std::get<Rotation3>(g), f);
}

/// (L_g F)(r) = F(g^-1 r), resampled spectrally.
inline GroupFunction regular_action(const Rotation3& g, const GroupFunction& f) {
  const SpectralBlocks s = rotate_spectrum(so3_ft_forward(f, f.grid.bandwidth), g);
  const GroupFunction flat = so3_ft_inverse(s);
  if (f.value_dim == 1) return flat;
  GroupFunction out = GroupFunction::zeros(f.grid, f.channels, f.value_dim);
  for (int c = 0; c < f.channels; ++c)
    for (int d = 0; d < f.value_dim; ++d)
      for (std::size_t i = 0; i < f.nodes(); ++i) out.at(c, i, d) = flat.at(c * f.value_dim + d, i);
  return out;
}

/// Left translation by Rz(2 pi steps / 2B), an exact index permutation in alpha.
inline GroupFunction rotate_alpha(const GroupFunction& f, int steps) {
  const int n = f.grid.side();
  const int s = ((steps % n) + n) % n;
  GroupFunction out = f;
  for (int c = 0; c < f.channels; ++c)
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb)
        for (int kg = 0; kg < n; ++kg)
          for (int d = 0; d < f.value_dim; ++d)
            out.at(c, f.grid.so3_index((ia + s) % n, jb, kg), d) =
                f.at(c, f.grid.so3_index(ia, jb, kg), d);
  return out;
}

/// Right translation F(r Rz(2 pi steps / 2B)), an exact index permutation in gamma.
inline GroupFunction shift_gamma(const GroupFunction& f, int steps) {
  const int n = f.grid.side();
  const int s = ((steps % n) + n) % n;
  GroupFunction out = f;
  for (int c = 0; c < f.channels; ++c)
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb)
        for (int kg = 0; kg < n; ++kg)
          for (int d = 0; d < f.value_dim; ++d)
            out.at(c, f.grid.so3_index(ia, jb, kg), d) =
                f.at(c, f.grid.so3_index(ia, jb, (kg + s) % n), d);
  return out;
}

/// Induced action of Rz(2 pi steps / 2B) on a field. The twist vanishes for
/// rotations about z, so this is a pure permutation of alpha samples.
inline TensorField rotate_alpha(const TensorField& f, int steps) {
  detail::require_so2_field(f, "rotate_alpha");
  const int n = f.grid.side();
  const int s = ((steps % n) + n) % n;
  TensorField out = f;
  for (int c = 0; c < f.channels; ++c)
    for (int ia = 0; ia < n; ++ia)
      for (int jb = 0; jb < n; ++jb)
        out.at(c, f.grid.s2_index((ia + s) % n, jb)) = f.at(c, f.grid.s2_index(ia, jb));
  return out;
}

/// Random bandlimited order-k field; next_complex() supplies each spectral coefficient.
template <class Rng>
TensorField random_bandlimited_field(int bandwidth, int order, int channels, Rng& next_complex) {
  if (std::abs(order) >= bandwidth)
    throw std::invalid_argument("random_bandlimited_field: |order| must be < bandwidth");
  SpectralBlocks s = SpectralBlocks::zeros(bandwidth, channels);
  s.column = order;
  for (int c = 0; c < channels; ++c)
    for (int l = std::abs(order); l < bandwidth; ++l)
      for (int m = -l; m <= l; ++m) s.block(c, l)(m + l, order + l) = next_complex() / (2.0 * l + 1.0);
  return mackey_synthesis(s, order);
}

}  // namespace homharm
