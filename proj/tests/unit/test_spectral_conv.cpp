#include "homharm/spectral_conv.hpp"
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

SparseKernelSpec random_kernel(int m1, int m2, int b, int cin, int cout, std::mt19937_64& rng) {
  SparseKernelSpec k = SparseKernelSpec::zeros(m1, m2, b, cin, cout);
  for (auto& row : k.coeffs)
    for (auto& v : row)
      for (auto& c : v) c = random_complex(rng);
  return k;
}

double rel_err(const std::vector<cd>& a, const std::vector<cd>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

double block_diff(const SpectralBlocks& a, const SpectralBlocks& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.blocks.size(); ++i)
    e = std::max(e, (a.blocks[i] - b.blocks[i]).cwiseAbs().maxCoeff());
  return e;
}

// Group convolution by direct quadrature on SO(3): (kappa * F)(g) = int F(v) kappa(v^-1 g) dv.
GroupFunction group_conv_direct(const GroupFunction& f, const SparseKernelSpec& k) {
  const auto& grid = f.grid;
  GroupFunction out = GroupFunction::zeros(grid, 1);
  std::vector<Rotation3> r(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    r[i] = Rotation3{grid.nodes[i][0], grid.nodes[i][1], grid.nodes[i][2]};
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t v = 0; v < grid.size(); ++v) {
      const Rotation3 rel = compose(r[v].inverse(), r[g]);
      cd kv{};
      for (int l = k.lmin(); l < k.bandwidth; ++l)
        kv += k.c(0, 0, l) * wigner_D_entry(l, k.m_in, k.m_out, rel.alpha, rel.beta, rel.gamma);
      out.at(0, g) += grid.weights[v] * f.at(0, v) * kv;
    }
  return out;
}

}  // namespace

TEST_CASE("kernel spec shape and admissible degrees") {
  const SparseKernelSpec k = SparseKernelSpec::zeros(2, -1, 6, 3, 2);
  CHECK(k.lmin() == 2);
  CHECK(k.dimension() == 4);
  CHECK(k.c(0, 0, 1) == cd{});
  SparseKernelSpec m = k;
  CHECK_THROWS_AS(m.at(0, 0, 1), std::out_of_range);
  m.coeffs[0][0].pop_back();
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("conv_spectral matches direct group convolution of the lift") {
  std::mt19937_64 rng(41);
  const int b = 3;
  for (auto [m1, m2] : {std::pair{0, 0}, std::pair{1, -1}, std::pair{-1, 2}}) {
    const TensorField f = random_field(b, m1, 1, rng);
    const SparseKernelSpec k = random_kernel(m1, m2, b, 1, 1, rng);
    const GroupFunction direct = group_conv_direct(lift(f), k);
    const TensorField spectral = convolve(f, k);
    CHECK(rel_err(lift(spectral).samples, direct.samples) <= 1e-10);
  }
}

TEST_CASE("zero kernel and the spectral identity") {
  std::mt19937_64 rng(42);
  const int b = 6;
  for (int m = -2; m <= 2; ++m) {
    const TensorField f = random_field(b, m, 2, rng);
    const SpectralBlocks s = mackey_spectrum(f);
    const SpectralBlocks z = conv_spectral(s, SparseKernelSpec::zeros(m, m, b, 2, 1));
    CHECK(z.energy() == 0.0);

    // Solve for the coefficients that reproduce the input, one degree at a time:
    // a unit coefficient at degree l maps column m to ratio * column m.
    SparseKernelSpec id = SparseKernelSpec::zeros(m, m, b, 2, 2);
    for (int l = std::abs(m); l < b; ++l) {
      SparseKernelSpec probe = SparseKernelSpec::zeros(m, m, b, 1, 1);
      probe.at(0, 0, l) = 1.0;
      SpectralBlocks one = SpectralBlocks::zeros(b, 1);
      one.column = m;
      one.block(0, l)(l, m + l) = 1.0;
      const cd ratio = conv_spectral(one, probe).block(0, l)(l, m + l);
      for (int c = 0; c < 2; ++c) id.at(c, c, l) = 1.0 / ratio;
      CHECK(std::abs(1.0 / ratio - (2.0 * l + 1.0)) <= 1e-12);
    }
    const SpectralBlocks out = conv_spectral(s, id);
    CHECK(block_diff(out, s) <= 1e-12);
  }
}

TEST_CASE("conv_spectral rejects column mismatch") {
  const int b = 4;
  SpectralBlocks s = SpectralBlocks::zeros(b, 1);
  s.column = 1;
  CHECK_THROWS_AS(conv_spectral(s, SparseKernelSpec::zeros(0, 0, b)), std::invalid_argument);
  s.column.reset();
  CHECK_THROWS_AS(conv_spectral(s, SparseKernelSpec::zeros(0, 0, b)), std::invalid_argument);
  s.column = 0;
  CHECK_THROWS_AS(conv_spectral(s, SparseKernelSpec::zeros(0, 0, b + 1)), std::invalid_argument);
  CHECK_THROWS_AS(conv_spectral(s, SparseKernelSpec::zeros(0, 0, b, 2, 1)), std::invalid_argument);
}

TEST_CASE("scalar kernels are isotropic") {
  std::mt19937_64 rng(43);
  const SparseKernelSpec k = random_kernel(0, 0, 5, 1, 1, rng);
  const GroupFunction kf = kernel_to_spatial(k);
  // kappa depends on beta only
  const int n = kf.grid.side();
  double spread = 0.0;
  for (int jb = 0; jb < n; ++jb) {
    const cd ref = kf.at(0, kf.grid.so3_index(0, jb, 0));
    for (int ia = 0; ia < n; ++ia)
      for (int kg = 0; kg < n; ++kg)
        spread = std::max(spread, std::abs(kf.at(0, kf.grid.so3_index(ia, jb, kg)) - ref));
  }
  CHECK(spread <= 1e-13);
}

TEST_CASE("kernel_to_spatial closed forms and transform round trip") {
  const int b = 5;
  for (int l = 0; l <= 3; ++l) {
    SparseKernelSpec k = SparseKernelSpec::zeros(0, 0, b);
    k.at(0, 0, l) = 1.0;
    const GroupFunction f = kernel_to_spatial(k);
    for (std::size_t i = 0; i < f.nodes(); ++i) {
      const double x = std::cos(f.grid.nodes[i][1]);
      const double p[] = {1.0, x, 0.5 * (3 * x * x - 1), 0.5 * (5 * x * x * x - 3 * x)};
      CHECK(std::abs(f.at(0, i) - p[l]) <= 1e-13);
    }
  }
  for (const auto& v : kernel_to_spatial(SparseKernelSpec::zeros(1, 2, 4)).samples) CHECK(v == cd{});

  std::mt19937_64 rng(44);
  const SparseKernelSpec k = random_kernel(-1, 2, b, 1, 1, rng);
  const SpectralBlocks s = so3_ft_forward(kernel_to_spatial(k), b);
  CHECK(block_diff(s, kernel_spectrum(k)) <= 1e-12);
  CHECK(block_diff(restrict_entry(s, -1, 2), s) <= 1e-12);
}

TEST_CASE("twisted kernel evaluation agrees with the Wigner sum") {
  std::mt19937_64 rng(45);
  const SparseKernelSpec k = random_kernel(2, -1, 5, 1, 1, rng);
  for (int t = 0; t < 50; ++t) {
    const Rotation3 g = random_rotation(rng);
    cd direct{};
    for (int l = k.lmin(); l < k.bandwidth; ++l)
      direct += k.c(0, 0, l) * wigner_D_entry(l, 2, -1, g.alpha, g.beta, g.gamma);
    CHECK(std::abs(kernel_eval_twisted(k, 0, 0, g) - direct) <= 1e-12);
  }
}

TEST_CASE("spectral and spatial convolution agree") {
  std::mt19937_64 rng(46);
  const int b = 4;
  for (auto [m1, m2] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{0, -2}, std::pair{2, 1}}) {
    const TensorField f = random_field(b, m1, 2, rng);
    const SparseKernelSpec k = random_kernel(m1, m2, b, 2, 3, rng);
    const TensorField a = convolve(f, k);
    const TensorField o = conv_spatial_oracle(f, k);
    CHECK(a.type == o.type);
    CHECK(rel_err(o.samples, a.samples) <= 1e-10);
  }
  const TensorField zero = TensorField::zeros(quadrature_grid(Space::S2, 3), FieldType::so2(0), 1);
  for (const auto& v : conv_spatial_oracle(zero, random_kernel(0, 1, 3, 1, 1, rng)).samples)
    CHECK(v == cd{});
}

TEST_CASE("convolution is equivariant") {
  std::mt19937_64 rng(47);
  const int b = 8;
  for (auto [m1, m2] : {std::pair{0, 0}, std::pair{-2, 1}, std::pair{1, 2}}) {
    const TensorField f = random_field(b, m1, 2, rng);
    const SparseKernelSpec k = random_kernel(m1, m2, b, 2, 2, rng);
    for (int t = 0; t < 3; ++t) {
      const Rotation3 g = random_rotation(rng);
      const TensorField lhs = induced_action(g, convolve(f, k));
      const TensorField rhs = convolve(induced_action(g, f), k);
      CHECK(rel_err(lhs.samples, rhs.samples) <= 1e-8);
    }
  }
}

TEST_CASE("sparse kernels lose nothing on Mackey inputs") {
  std::mt19937_64 rng(48);
  const int b = 6;
  for (auto [m1, m2] : {std::pair{0, 0}, std::pair{1, -2}, std::pair{-2, 2}}) {
    const SpectralBlocks f = mackey_spectrum(random_field(b, m1, 2, rng));
    SpectralBlocks dense = SpectralBlocks::zeros(b, 2 * 2);
    for (auto& blk : dense.blocks)
      for (Eigen::Index i = 0; i < blk.size(); ++i) blk.data()[i] = random_complex(rng);
    const SpectralBlocks full = restrict_column(conv_dense(f, dense, 2), m2);
    const SpectralBlocks sparse = conv_dense(f, restrict_entry(dense, m1, m2), 2);
    CHECK(block_diff(full, sparse) <= 1e-12);
  }
}

TEST_CASE("single-coefficient kernels give independent outputs") {
  std::mt19937_64 rng(49);
  const int b = 8;
  for (auto [m1, m2] : {std::pair{0, 0}, std::pair{2, -1}}) {
    const TensorField f = random_field(b, m1, 1, rng);
    SparseKernelSpec proto = SparseKernelSpec::zeros(m1, m2, b);
    Eigen::MatrixXcd stack(f.nodes(), proto.dimension());
    for (int j = 0; j < proto.dimension(); ++j) {
      SparseKernelSpec k = proto;
      k.at(0, 0, proto.lmin() + j) = 1.0;
      const TensorField out = convolve(f, k);
      for (std::size_t i = 0; i < out.nodes(); ++i) stack(i, j) = out.at(0, i);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stack);
    CHECK(svd.singularValues().minCoeff() > 1e-8);
  }
}

TEST_CASE("conjugate partner keeps real pairs real") {
  std::mt19937_64 rng(50);
  const int b = 6;
  const TensorField f = random_field(b, 1, 1, rng);
  TensorField fc = f;
  fc.type = FieldType::so2(-1);
  for (auto& v : fc.samples) v = std::conj(v);
  const SparseKernelSpec k = random_kernel(1, 2, b, 1, 1, rng);
  const TensorField a = convolve(f, k);
  const TensorField c = convolve(fc, conjugate_partner(k));
  double err = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) err = std::max(err, std::abs(c.samples[i] - std::conj(a.samples[i])));
  CHECK(err <= 1e-12);
}

TEST_CASE("conv_vjp is the adjoint and matches finite differences") {
  std::mt19937_64 rng(51);
  const int b = 6;
  const SpectralBlocks f = mackey_spectrum(random_field(b, 1, 2, rng));
  const SparseKernelSpec k = random_kernel(1, -1, b, 2, 3, rng);
  SpectralBlocks u = SpectralBlocks::zeros(b, 3);
  for (auto& blk : u.blocks)
    for (Eigen::Index i = 0; i < blk.size(); ++i) blk.data()[i] = random_complex(rng);

  const ConvGradients g = conv_vjp(f, k, u);
  const double lhs = real_inner(u, conv_spectral(f, k));
  CHECK(std::abs(lhs - real_inner(g.input, f)) <= 1e-12 * std::abs(lhs));
  double kern = 0.0;
  for (int o = 0; o < 3; ++o)
    for (int i = 0; i < 2; ++i)
      for (int l = k.lmin(); l < b; ++l) kern += (std::conj(g.kernel.c(o, i, l)) * k.c(o, i, l)).real();
  CHECK(std::abs(lhs - kern) <= 1e-12 * std::abs(lhs));

  const ConvGradients zero = conv_vjp(f, k, SpectralBlocks::zeros(b, 3));
  CHECK(zero.input.energy() == 0.0);

  // loss = 0.5 |conv|^2; gradient = vjp at the output
  auto loss = [&](const SpectralBlocks& ff, const SparseKernelSpec& kk) {
    const SpectralBlocks o = conv_spectral(ff, kk);
    return 0.5 * real_inner(o, o);
  };
  const ConvGradients grad = conv_vjp(f, k, conv_spectral(f, k));
  SpectralBlocks dir = SpectralBlocks::zeros(b, 2);
  dir.column = 1;
  for (int c = 0; c < 2; ++c)
    for (int l = 1; l < b; ++l)
      for (int m = -l; m <= l; ++m) dir.block(c, l)(m + l, 1 + l) = random_complex(rng);
  const double h = 1e-5;
  SpectralBlocks fp = f, fm = f;
  for (std::size_t i = 0; i < f.blocks.size(); ++i) {
    fp.blocks[i] += h * dir.blocks[i];
    fm.blocks[i] -= h * dir.blocks[i];
  }
  const double fd = (loss(fp, k) - loss(fm, k)) / (2 * h);
  const double an = real_inner(grad.input, dir);
  CHECK(std::abs(fd - an) <= 1e-8 * std::abs(an));

  SparseKernelSpec kd = random_kernel(1, -1, b, 2, 3, rng), kp = k, km = k;
  double an_k = 0.0;
  for (int o = 0; o < 3; ++o)
    for (int i = 0; i < 2; ++i)
      for (int l = k.lmin(); l < b; ++l) {
        kp.at(o, i, l) += h * kd.c(o, i, l);
        km.at(o, i, l) -= h * kd.c(o, i, l);
        an_k += (std::conj(grad.kernel.c(o, i, l)) * kd.c(o, i, l)).real();
      }
  const double fd_k = (loss(f, kp) - loss(f, km)) / (2 * h);
  CHECK(std::abs(fd_k - an_k) <= 1e-8 * std::abs(an_k));
}
