#include "homharm/homharm.hpp"
#include "test_util.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace homharm;
using testutil::random_complex;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("homharm_io_" + name)).string();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

FieldFile random_s2(int b, int channels, std::mt19937_64& rng) {
  TensorField f = TensorField::zeros(quadrature_grid(Space::S2, b), FieldType::so2(1), channels);
  for (auto& v : f.samples) v = random_complex(rng);
  return to_field_file(f);
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("field file JSON round trip is lossless") {
  std::mt19937_64 rng(81);
  FieldFile f = random_s2(3, 2, rng);
  f.data[0] = cd(0.1 + 0.2, 1.0 / 3.0);
  f.data[1] = cd(5e-324, -1.7976931348623157e308);
  const std::string path = temp_path("s2.json");
  write_field_json(f, path);
  const FieldFile back = read_field_json(path);
  CHECK(back == f);
  const TensorField t = to_tensor_field(back);
  CHECK(t.type == FieldType::so2(1));
  CHECK(t.channels == 2);

  GroupFunction g = GroupFunction::zeros(quadrature_grid(Space::SO3, 2), 1, 3);
  for (auto& v : g.samples) v = random_complex(rng);
  write_field_json(to_field_file(g), path);
  const GroupFunction gb = to_group_function(read_field_json(path));
  CHECK(gb.samples == g.samples);
  CHECK(gb.value_dim == 3);
}

TEST_CASE("field file CSV round trip and row count") {
  std::mt19937_64 rng(82);
  const int b = 4;
  const FieldFile f = random_s2(b, 1, rng);
  const std::string csv = field_to_csv(f);
  std::size_t rows = 0;
  bool header_seen = false;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++rows;
  }
  CHECK(rows == static_cast<std::size_t>(4 * b * b));
  CHECK(field_from_csv(csv) == f);

  const std::string jp = temp_path("conv.json"), cp = temp_path("conv.csv"), jp2 = temp_path("conv2.json");
  write_field_json(f, jp);
  convert_field(jp, cp);
  convert_field(cp, jp2);
  CHECK(read_field_json(jp2) == f);
  CHECK_THROWS_AS(convert_field(jp, temp_path("x.txt")), std::invalid_argument);
}

TEST_CASE("point clouds round trip through the field file") {
  std::mt19937_64 rng(83);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixX3d pos(5, 3);
  for (Eigen::Index i = 0; i < pos.size(); ++i) pos.data()[i] = n(rng);
  PointCloud p = PointCloud::zeros(pos, 2, 2);
  for (auto& f : p.features)
    for (auto& blk : f)
      for (Eigen::Index i = 0; i < blk.size(); ++i) blk.data()[i] = n(rng);
  const FieldFile f = to_field_file(p);
  CHECK(f.space == "R3points");
  CHECK(f.dim == 9);
  const json j = to_json(f);
  CHECK(j["positions"].size() == 5);
  const PointCloud back = to_point_cloud(field_file_from_json(j));
  CHECK(back.positions == p.positions);
  for (int i = 0; i < 5; ++i)
    for (int l = 0; l <= 2; ++l) CHECK(back.features[i][l] == p.features[i][l]);
  CHECK(field_from_csv(field_to_csv(f)) == f);
}

TEST_CASE("malformed field files are rejected with locations") {
  std::mt19937_64 rng(84);
  json j = to_json(random_s2(2, 1, rng));
  j["format_version"] = 2;
  CHECK_THAT(error_of([&] { field_file_from_json(j); }),
             Catch::Matchers::ContainsSubstring("format_version") &&
                 Catch::Matchers::ContainsSubstring("unsupported version 2"));
  j["format_version"] = 1;
  j["data"][0][3] = json::array({json::array({1.0})});
  CHECK_THAT(error_of([&] { field_file_from_json(j); }),
             Catch::Matchers::ContainsSubstring("data[0][3][0]"));
  j.erase("space");
  CHECK_THAT(error_of([&] { field_file_from_json(j); }), Catch::Matchers::ContainsSubstring("'space'"));

  const std::string path = temp_path("bad.json");
  write(path, "{\n  \"format_version\": 1,\n  \"space\": ,\n}");
  CHECK_THAT(error_of([&] { read_field_json(path); }), Catch::Matchers::ContainsSubstring(":3:"));
  CHECK_THROWS_AS(read_field_json(temp_path("missing.json")), IoError);

  std::string csv = field_to_csv(random_s2(2, 1, rng));
  const auto pos = csv.find("\n0,5,0,");
  REQUIRE(pos != std::string::npos);
  std::string bad = csv;
  bad.replace(bad.find(',', bad.find(',', bad.find(',', bad.find(',', bad.find(',', bad.find(',', pos + 1) + 1) + 1) + 1) + 1) + 1), 1, ",x");
  CHECK_THAT(error_of([&] { field_from_csv(bad); }), Catch::Matchers::ContainsSubstring("line 13"));
  std::string v2 = csv;
  v2.replace(0, 17, "#format_version=7");
  CHECK_THAT(error_of([&] { field_from_csv(v2); }), Catch::Matchers::ContainsSubstring("unsupported version 7"));
  CHECK_THROWS_AS(field_from_csv(csv.substr(0, csv.size() - 40)), FormatError);
}

TEST_CASE("xyz import") {
  const Eigen::MatrixX3d p = read_xyz_text("3\nwater\nO 0 0 0.1\nH 0.75 0 -0.5\n# comment\nH -0.75 0 -0.5\n");
  REQUIRE(p.rows() == 3);
  CHECK(p(1, 0) == 0.75);
  CHECK(p(2, 2) == -0.5);
  const Eigen::MatrixX3d q = read_xyz_text("1 2 3\n4 5 6\n");
  CHECK(q.rows() == 2);
  CHECK(q(1, 2) == 6.0);
  CHECK_THAT(error_of([] { read_xyz_text("1 2 3\n4 five 6\n"); }), Catch::Matchers::ContainsSubstring("line 2"));
}

TEST_CASE("JSON forms of spectra, kernels, activations and grids") {
  std::mt19937_64 rng(85);
  SpectralBlocks s = SpectralBlocks::zeros(3, 2);
  s.column = -1;
  for (auto& blk : s.blocks)
    for (Eigen::Index i = 0; i < blk.size(); ++i) blk.data()[i] = random_complex(rng);
  const SpectralBlocks sb = spectral_from_json(json::parse(to_json(s).dump()));
  CHECK(sb.column == s.column);
  for (std::size_t i = 0; i < s.blocks.size(); ++i) CHECK(sb.blocks[i] == s.blocks[i]);

  SparseKernelSpec k = SparseKernelSpec::zeros(1, -2, 5, 2, 3);
  for (auto& row : k.coeffs)
    for (auto& v : row)
      for (auto& c : v) c = random_complex(rng);
  const json kj = to_json(k);
  CHECK(kj["B"] == 5);
  CHECK(kj["coeffs"].size() == 6);
  CHECK(kj["coeffs"][0].size() == 3);
  const SparseKernelSpec kb = kernel_from_json(json::parse(kj.dump()));
  CHECK(kb.coeffs == k.coeffs);
  json bad = kj;
  bad["coeffs"][2].erase(0);
  CHECK_THROWS_AS(kernel_from_json(bad), FormatError);

  ActivationSpec a{ActivationKind::PerPointMlp, {}};
  a.layers.push_back({Eigen::MatrixXd::Random(3, 2), Eigen::VectorXd::Random(3)});
  a.layers.push_back({Eigen::MatrixXd::Random(1, 3), Eigen::VectorXd::Random(1)});
  const ActivationSpec ab = activation_from_json(json::parse(to_json(a).dump()));
  CHECK(ab.kind == a.kind);
  REQUIRE(ab.layers.size() == 2);
  CHECK(ab.layers[0].weight == a.layers[0].weight);
  CHECK(ab.layers[1].bias == a.layers[1].bias);
  CHECK(activation_from_json(json{{"kind", "gelu"}}).kind == ActivationKind::Gelu);
  CHECK_THROWS_AS(activation_from_json(json{{"kind", "swish"}}), FormatError);

  const QuadratureGrid g = quadrature_grid(Space::SO3, 2);
  const json gj = to_json(g);
  CHECK(gj["side"] == 4);
  CHECK(gj["nodes"].size() == 64);
  CHECK(grid_from_json(gj) == g);
}

TEST_CASE("CG table export") {
  const std::string csv = cg_table_csv(2);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "l1,m1,l2,m2,l,m,value");
  int rows = 0;
  double norm = 0.0;
  while (std::getline(in, line)) {
    int l1, m1, l2, m2, l, m;
    double v;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%d,%d,%d,%d,%lf", &l1, &m1, &l2, &m2, &l, &m, &v) == 7);
    CHECK(v == clebsch_gordan(l1, m1, l2, m2, l, m));
    if (l1 == 1 && l2 == 1 && l == 2 && m == 0) norm += v * v;
    ++rows;
  }
  CHECK(rows > 0);
  CHECK(norm == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(csv.find("0,0,0,0,0,0,1\n") != std::string::npos);
}
