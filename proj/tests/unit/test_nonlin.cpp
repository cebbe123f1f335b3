#include "homharm/nonlin.hpp"
#include "test_util.hpp"

#include <catch_amalgamated.hpp>

using namespace homharm;
using testutil::random_complex;
using testutil::random_rotation;

namespace {

TensorField random_field(int b, int k, int channels, std::mt19937_64& rng) {
  auto next = [&] { return random_complex(rng); };
  return random_bandlimited_field(b, k, channels, next);
}

double rel_err(const std::vector<cd>& a, const std::vector<cd>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

double sigma_equivariance(const std::vector<TensorField>& fs, const Rotation3& g, ActivationKind kind,
                          double oversample, const std::vector<int>& orders) {
  std::vector<TensorField> moved;
  for (const auto& f : fs) moved.push_back(induced_action(g, f));
  const auto a = nonlinearity(moved, ActivationSpec::of(kind), orders, oversample);
  const auto b = nonlinearity(fs, ActivationSpec::of(kind), orders, oversample);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const TensorField c = induced_action(g, b[j]);
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
      num += std::norm(a[j].samples[i] - c.samples[i]);
      den += std::norm(c.samples[i]);
    }
  }
  return std::sqrt(num / den);
}

PointFeatures random_features(int lmax, int channels, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  PointFeatures f;
  for (int l = 0; l <= lmax; ++l) {
    Eigen::MatrixXd m(2 * l + 1, channels);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    f.push_back(m);
  }
  return f;
}

double feature_err(const PointFeatures& a, const PointFeatures& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    num += (a[l] - b[l]).squaredNorm();
    den += b[l].squaredNorm();
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("activations act elementwise") {
  const auto grid = quadrature_grid(Space::SO3, 3);
  GroupFunction pos = GroupFunction::zeros(grid, 2);
  GroupFunction neg = GroupFunction::zeros(grid, 2);
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (std::size_t i = 0; i < pos.samples.size(); ++i) {
    pos.samples[i] = cd(u(rng), u(rng));
    neg.samples[i] = -pos.samples[i];
  }
  CHECK(activate(pos, ActivationSpec::of(ActivationKind::Relu)).samples == pos.samples);
  for (const auto& v : activate(neg, ActivationSpec::of(ActivationKind::Relu)).samples) CHECK(v == cd{});
  CHECK(activate(pos, ActivationSpec::of(ActivationKind::Identity)).samples == pos.samples);
  CHECK(activate_scalar(ActivationKind::Tanh, 0.5) == std::tanh(0.5));
  CHECK(std::abs(activate_scalar(ActivationKind::Gelu, 1.0) - 0.8413447460685429) <= 1e-15);
  CHECK(activate_scalar(ActivationKind::Gelu, 0.0) == 0.0);
  CHECK(activation_from_string("gelu") == ActivationKind::Gelu);
  CHECK_THROWS_AS(activation_from_string("swish"), std::invalid_argument);
}

TEST_CASE("per-point MLP mixes channels at each node") {
  ActivationSpec spec{ActivationKind::PerPointMlp, {}};
  MlpLayer a{Eigen::MatrixXd(3, 2), Eigen::VectorXd(3)};
  a.weight << 1, -1, 0.5, 2, -1, 0;
  a.bias << 0.1, -0.2, 0.3;
  MlpLayer b{Eigen::MatrixXd(1, 3), Eigen::VectorXd(1)};
  b.weight << 1, 2, -1;
  b.bias << 0.05;
  spec.layers = {a, b};
  CHECK(spec.output_channels(2) == 1);
  CHECK_THROWS_AS(spec.output_channels(3), std::invalid_argument);
  const auto grid = quadrature_grid(Space::SO3, 2);
  GroupFunction f = GroupFunction::zeros(grid, 2);
  f.at(0, 5) = cd(1.0, -2.0);
  f.at(1, 5) = cd(0.5, 3.0);
  const GroupFunction out = activate(f, spec);
  REQUIRE(out.channels == 1);
  auto ref = [&](double x0, double x1) {
    Eigen::Vector3d h = a.weight * Eigen::Vector2d(x0, x1) + a.bias;
    h = h.cwiseMax(0.0);
    return (b.weight * h + b.bias)(0);
  };
  CHECK(std::abs(out.at(0, 5).real() - ref(1.0, 0.5)) <= 1e-15);
  CHECK(std::abs(out.at(0, 5).imag() - ref(-2.0, 3.0)) <= 1e-15);
}

TEST_CASE("activation commutes bitwise with grid-aligned translations") {
  std::mt19937_64 rng(62);
  const int b = 4;
  GroupFunction f = GroupFunction::zeros(quadrature_grid(Space::SO3, b), 2);
  for (auto& v : f.samples) v = random_complex(rng);
  for (auto kind : {ActivationKind::Relu, ActivationKind::Gelu, ActivationKind::Tanh}) {
    const ActivationSpec s = ActivationSpec::of(kind);
    for (int steps : {1, 3, 7}) {
      CHECK(activate(shift_gamma(f, steps), s).samples == shift_gamma(activate(f, s), steps).samples);
      CHECK(activate(rotate_alpha(f, steps), s).samples == rotate_alpha(activate(f, s), steps).samples);
    }
  }
}

TEST_CASE("lift_sum and column projection") {
  std::mt19937_64 rng(63);
  const int b = 5;
  const TensorField f0 = random_field(b, 0, 1, rng), f1 = random_field(b, 1, 1, rng);
  CHECK(lift_sum({f0}).samples == lift(f0).samples);
  const GroupFunction l = lift_sum({f0, f1});
  for (int ia = 0; ia < 2 * b; ia += 3)
    for (int jb = 0; jb < 2 * b; ++jb)
      for (int kg = 0; kg < 2 * b; ++kg) {
        const cd expect = f0.at(0, f0.grid.s2_index(ia, jb)) +
                          std::polar(1.0, -l.grid.gamma(kg)) * f1.at(0, f1.grid.s2_index(ia, jb));
        CHECK(std::abs(l.at(0, l.grid.so3_index(ia, jb, kg)) - expect) <= 1e-14);
      }
  CHECK(rel_err(project_column(l, 1).samples, f1.samples) <= 1e-13);
  CHECK(rel_err(project_column(l, 0).samples, f0.samples) <= 1e-13);
  double off = 0.0;
  for (const auto& v : project_column(lift(f1), 2).samples) off = std::max(off, std::abs(v));
  CHECK(off <= 1e-12);

  const TensorField other = random_field(b + 1, 0, 1, rng);
  CHECK_THROWS_AS(lift_sum({f0, other}), std::invalid_argument);

  const Rotation3 g = random_rotation(rng);
  const GroupFunction lhs = lift_sum({induced_action(g, f0), induced_action(g, f1)});
  const GroupFunction rhs = regular_action(g, l);
  CHECK(rel_err(lhs.samples, rhs.samples) <= 1e-9);
}

TEST_CASE("kernel projection") {
  std::mt19937_64 rng(64);
  const int b = 6;
  const GroupFunction l = lift_sum({random_field(b, 0, 2, rng), random_field(b, -1, 2, rng),
                                    random_field(b, 2, 2, rng)});
  for (int m = -2; m <= 2; ++m) {
    const TensorField a = project_kernel(l, delta_kernel(m, b), m);
    const TensorField c = project_column(l, m);
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      scale = std::max(scale, std::abs(c.samples[i]));
      err = std::max(err, std::abs(a.samples[i] - c.samples[i]));
    }
    CHECK(err <= 1e-10 * std::max(1.0, scale));
  }
  const GroupFunction zero = GroupFunction::zeros(l.grid, 1);
  for (const auto& v : project_kernel(l, zero, 1).samples) CHECK(v == cd{});
  CHECK_THROWS_AS(project_kernel(l, delta_kernel(1, b), 0), std::invalid_argument);

  // equivariance of lift then kernel projection with xi = identity
  // rows 0 and 1 meet the input orders; the column is the output order 1
  GroupFunction kernel = GroupFunction::zeros(quadrature_grid(Space::SO3, 8), 1);
  for (int m1 : {0, 1}) {
    SparseKernelSpec ks = SparseKernelSpec::zeros(m1, 1, 8);
    for (int deg = 1; deg < 8; ++deg) ks.at(0, 0, deg) = random_complex(rng);
    const GroupFunction part = kernel_to_spatial(ks);
    for (std::size_t i = 0; i < kernel.samples.size(); ++i) kernel.samples[i] += part.samples[i];
  }
  const std::vector<TensorField> fs = {random_field(8, 0, 1, rng), random_field(8, 1, 1, rng)};
  for (int t = 0; t < 3; ++t) {
    const Rotation3 g = random_rotation(rng);
    const TensorField lhs =
        project_kernel(lift_sum({induced_action(g, fs[0]), induced_action(g, fs[1])}), kernel, 1);
    const TensorField rhs = induced_action(g, project_kernel(lift_sum(fs), kernel, 1));
    CHECK(rel_err(lhs.samples, rhs.samples) <= 1e-8);
  }
}

TEST_CASE("nonlinearity: identity on positive scalars and exact grid symmetry") {
  std::mt19937_64 rng(65);
  const int b = 4;
  TensorField pos = TensorField::zeros(quadrature_grid(Space::S2, b), FieldType::so2(0), 1);
  ShtCoeffs c = ShtCoeffs::zeros(b, 1);
  c.at(0, 0, 0) = 5.0;
  c.at(0, 1, 0) = 0.3;
  c.at(0, 2, 1) = cd(0.1, 0.2);
  c.at(0, 2, -1) = cd(-0.1, 0.2);  // keeps the field real
  pos.samples = sht_inverse(c).samples;
  const auto out = nonlinearity({pos}, ActivationSpec::of(ActivationKind::Relu), {0});
  CHECK(rel_err(out[0].samples, pos.samples) <= 1e-12);

  const std::vector<TensorField> fs = {random_field(b, 0, 1, rng), random_field(b, 1, 1, rng),
                                       random_field(b, -1, 1, rng)};
  for (int steps : {1, 2, 5}) {
    std::vector<TensorField> moved;
    for (const auto& f : fs) moved.push_back(rotate_alpha(f, steps));
    const auto a = nonlinearity(moved, ActivationSpec::of(ActivationKind::Relu), {-1, 0, 1});
    const auto r = nonlinearity(fs, ActivationSpec::of(ActivationKind::Relu), {-1, 0, 1});
    for (std::size_t j = 0; j < a.size(); ++j) {
      const TensorField rr = rotate_alpha(r[j], steps);
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < rr.samples.size(); ++i) {
        err = std::max(err, std::abs(a[j].samples[i] - rr.samples[i]));
        scale = std::max(scale, std::abs(rr.samples[i]));
      }
      CHECK(err <= 1e-12 * scale);
    }
  }
}

TEST_CASE("nonlinearity equivariance improves with oversampling") {
  std::mt19937_64 rng(66);
  const int b = 4;
  const std::vector<TensorField> fs = {random_field(b, -1, 1, rng), random_field(b, 0, 1, rng),
                                       random_field(b, 1, 1, rng)};
  std::vector<Rotation3> gs;
  for (int t = 0; t < 3; ++t) gs.push_back(random_rotation(rng));
  double prev = 1e300;
  for (double os : {1.0, 2.0, 4.0}) {
    double e = 0.0;
    for (const auto& g : gs) e += sigma_equivariance(fs, g, ActivationKind::Relu, os, {-1, 0, 1});
    CHECK(e < prev);
    prev = e;
  }
  // a linear xi commutes exactly
  for (const auto& g : gs)
    CHECK(sigma_equivariance(fs, g, ActivationKind::Identity, 2.0, {-1, 0, 1}) <= 1e-10);
}

TEST_CASE("sphere nonlinearity matches the SO(3) lift path") {
  std::mt19937_64 rng(67);
  for (auto kind : {ActivationKind::Relu, ActivationKind::Tanh}) {
    const PointFeatures f = random_features(2, 3, rng);
    const PointFeatures a = point_sphere_nonlin(f, ActivationSpec::of(kind), 6);
    const PointFeatures b = point_so3_nonlin(f, ActivationSpec::of(kind), 6);
    CHECK(feature_err(a, b) <= 1e-10);
  }
}

TEST_CASE("sphere nonlinearity with a linear activation") {
  std::mt19937_64 rng(68);
  const PointFeatures f = random_features(2, 2, rng);
  CHECK(feature_err(point_sphere_nonlin(f, ActivationSpec::of(ActivationKind::Identity), 8), f) <= 1e-10);

  PointFeatures s = {Eigen::MatrixXd::Constant(1, 2, 1.7)};
  CHECK(feature_err(point_sphere_nonlin(s, ActivationSpec::of(ActivationKind::Relu), 4), s) <= 1e-10);

  const Rotation3 g = random_rotation(rng);
  PointFeatures fr;
  for (int l = 0; l <= 2; ++l) fr.push_back(real_wigner_D(l, g) * f[l]);
  const PointFeatures a = point_sphere_nonlin(fr, ActivationSpec::of(ActivationKind::Identity), 8);
  const PointFeatures c = point_sphere_nonlin(f, ActivationSpec::of(ActivationKind::Identity), 8);
  PointFeatures cr;
  for (int l = 0; l <= 2; ++l) cr.push_back(real_wigner_D(l, g) * c[l]);
  CHECK(feature_err(a, cr) <= 1e-10);
}

TEST_CASE("sphere nonlinearity aliasing shrinks with sphere bandwidth") {
  std::mt19937_64 rng(69);
  const PointFeatures f = random_features(2, 2, rng);
  const Rotation3 g = random_rotation(rng);
  PointFeatures fr;
  for (int l = 0; l <= 2; ++l) fr.push_back(real_wigner_D(l, g) * f[l]);
  double prev = 1e300;
  for (int sb : {4, 8, 16}) {
    const PointFeatures a = point_sphere_nonlin(fr, ActivationSpec::of(ActivationKind::Gelu), sb);
    const PointFeatures c = point_sphere_nonlin(f, ActivationSpec::of(ActivationKind::Gelu), sb);
    PointFeatures cr;
    for (int l = 0; l <= 2; ++l) cr.push_back(real_wigner_D(l, g) * c[l]);
    const double e = feature_err(a, cr);
    CHECK(e < prev);
    prev = e;
  }
}
