#pragma once

// Sampled fields on S^2 and sampled functions on SO(3).

#include "homharm/quadrature.hpp"

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace homharm {

using cd = std::complex<double>;

enum class Stabilizer { SO2, SO3 };

/// Field type: an irrep of the stabilizer. SO(2) orders are any integer m
/// (rho(theta) = exp(i m theta), dimension 1); SO(3) orders are l >= 0 with
/// dimension 2l + 1.
struct FieldType {
  Stabilizer stabilizer = Stabilizer::SO2;
  int order = 0;

  static FieldType so2(int m) { return {Stabilizer::SO2, m}; }
  static FieldType so3(int l) {
    if (l < 0) throw std::invalid_argument("FieldType: SO(3) order must be >= 0");
    return {Stabilizer::SO3, l};
  }

  int dimension() const { return stabilizer == Stabilizer::SO2 ? 1 : 2 * order + 1; }

  bool operator==(const FieldType&) const = default;
};

/// Channelled samples of f: G/H -> V on a quadrature grid, layout [channel][node][dim].
struct TensorField {
  QuadratureGrid grid;
  FieldType type;
  int channels = 1;
  std::vector<cd> samples;

  static TensorField zeros(QuadratureGrid grid, FieldType type, int channels) {
    if (channels < 1) throw std::invalid_argument("TensorField: channels must be >= 1");
    TensorField f{std::move(grid), type, channels, {}};
    f.samples.assign(static_cast<std::size_t>(channels) * f.grid.size() * type.dimension(),
                     cd{});
    return f;
  }

  int dim() const { return type.dimension(); }
  std::size_t nodes() const { return grid.size(); }

  cd& at(int c, std::size_t node, int d = 0) {
    return samples[(static_cast<std::size_t>(c) * nodes() + node) * dim() + d];
  }
  const cd& at(int c, std::size_t node, int d = 0) const {
    return samples[(static_cast<std::size_t>(c) * nodes() + node) * dim() + d];
  }

  void validate() const {
    if (samples.size() != static_cast<std::size_t>(channels) * nodes() * dim())
      throw std::invalid_argument("TensorField: sample count does not match shape");
  }
};

/// Channelled samples of a function on the group G (here SO(3)).
struct GroupFunction {
  QuadratureGrid grid;
  int value_dim = 1;
  int channels = 1;
  std::vector<cd> samples;

  static GroupFunction zeros(QuadratureGrid grid, int channels, int value_dim = 1) {
    if (channels < 1) throw std::invalid_argument("GroupFunction: channels must be >= 1");
    GroupFunction f{std::move(grid), value_dim, channels, {}};
    f.samples.assign(static_cast<std::size_t>(channels) * f.grid.size() * value_dim, cd{});
    return f;
  }

  std::size_t nodes() const { return grid.size(); }

  cd& at(int c, std::size_t node, int d = 0) {
    return samples[(static_cast<std::size_t>(c) * nodes() + node) * value_dim + d];
  }
  const cd& at(int c, std::size_t node, int d = 0) const {
    return samples[(static_cast<std::size_t>(c) * nodes() + node) * value_dim + d];
  }
};

}  // namespace homharm
