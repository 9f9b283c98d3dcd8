#include "tbsd/config.hpp"
#include "tbsd/io.hpp"

#include "oracles.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

using namespace tbsd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("tbsd_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("8-bit images round-trip exactly on the 1/255 grid") {
  TempDir dir;
  Matrix img(7, 11);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 11; ++c) img(r, c) = ((r * 11 + c) * 3 % 256) / 255.0;
  io::write_image(dir.path / "a.png", img);
  const Matrix back = io::read_image(dir.path / "a.png");
  CHECK(back.rows() == 7);
  CHECK(back.cols() == 11);
  CHECK((back - img).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("writing clamps to [0, 1]") {
  TempDir dir;
  const Matrix img = (Matrix(1, 3) << -0.5, 0.5, 1.7).finished();
  io::write_image(dir.path / "c.png", img);
  const Matrix back = io::read_image(dir.path / "c.png");
  CHECK(back(0, 0) == 0.0);
  CHECK(back(0, 1) == doctest::Approx(128.0 / 255).epsilon(1e-12));
  CHECK(back(0, 2) == 1.0);
}

TEST_CASE("masks round-trip") {
  TempDir dir;
  oracle::Gen gen(1);
  Mask m(9, 13);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 13; ++c) m(r, c) = gen.uniform(0, 1) < 0.4;
  io::write_mask(dir.path / "m.png", m);
  CHECK((io::read_mask(dir.path / "m.png") == m).all());
  // Masks are stored as 0 / 255.
  CHECK(io::read_image(dir.path / "m.png").maxCoeff() == 1.0);
}

TEST_CASE("unreadable images raise IoError") {
  TempDir dir;
  CHECK_THROWS_AS(io::read_image(dir.path / "missing.png"), IoError);
  io::write_text_atomic(dir.path / "fake.png", "not an image");
  CHECK_THROWS_AS(io::read_image(dir.path / "fake.png"), IoError);
  CHECK_THROWS_AS(io::write_image(dir.path / "no" / "such" / "dir.png", Matrix::Zero(2, 2)),
                  IoError);
}

TEST_CASE("atomic text write replaces the file") {
  TempDir dir;
  io::write_text_atomic(dir.path / "t.txt", "one");
  io::write_text_atomic(dir.path / "t.txt", "two");
  CHECK(io::read_text(dir.path / "t.txt") == "two");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
  CHECK(files == 1);
}

TEST_CASE("basis files round-trip bit for bit") {
  TempDir dir;
  oracle::Gen gen(2);
  TextureBasis b;
  b.patch_rows = 5;
  b.patch_cols = 7;
  b.atoms = gen.orthonormal(35, 4);
  b.atoms(3, 1) = 1.0 / 3.0;
  b.atoms(4, 2) = 5e-324;  // smallest subnormal
  b.directions_deg = {45.0, 135.0};
  b.source = "unit test";
  io::save_basis(dir.path / "b.tbsd.json", b);
  const TextureBasis back = io::load_basis(dir.path / "b.tbsd.json");
  CHECK(back.patch_rows == 5);
  CHECK(back.patch_cols == 7);
  CHECK(bitwise_equal(back.atoms, b.atoms));
  CHECK(back.directions_deg == b.directions_deg);
  CHECK(back.source == "unit test");
}

TEST_CASE("basis JSON layout") {
  TextureBasis b;
  b.patch_rows = 1;
  b.patch_cols = 2;
  b.atoms = (Matrix(2, 2) << 1.0, 0.0, 0.0, -1.0).finished();
  const auto j = nlohmann::json::parse(io::basis_to_json(b));
  CHECK(j["version"] == io::kBasisFormatVersion);
  CHECK(j["patch_shape"] == nlohmann::json::array({1, 2}));
  // One array per atom.
  CHECK(j["atoms"] == nlohmann::json::parse("[[1.0, 0.0], [0.0, -1.0]]"));
}

TEST_CASE("malformed basis files raise IoError") {
  CHECK_THROWS_AS(io::basis_from_json("{"), IoError);
  CHECK_THROWS_AS(io::basis_from_json(R"({"version": 2, "patch_shape": [1, 1], "atoms": [[1]]})"),
                  IoError);
  CHECK_THROWS_AS(
      io::basis_from_json(R"({"version": 1, "patch_shape": [2, 2], "atoms": [[1, 0, 0]]})"),
      IoError);
  CHECK_THROWS_AS(io::basis_from_json(R"({"version": 1, "patch_shape": [0, 2], "atoms": []})"),
                  IoError);
}

TEST_CASE("config defaults and key table") {
  const RunConfig c;
  CHECK(c.detection.lambda == 0.1);
  CHECK(c.detection.eta == 0.05);
  CHECK(c.learn.decompose.gamma == 0.2);
  CHECK(c.learn.basis.method == Orthonormalization::principal);
  CHECK(RunConfig::keys().size() == 27);
  for (const std::string& k : RunConfig::keys()) CHECK_FALSE(RunConfig::help(k).empty());
}

TEST_CASE("shared keys drive training and detection together") {
  RunConfig c;
  c.set("lambda", "0.3");
  c.set("gamma", "0.25");
  c.set("iter_times", "4");
  CHECK(c.detection.lambda == 0.3);
  CHECK(c.learn.decompose.lambda == 0.3);
  CHECK(c.learn.decompose.gamma == 0.25);
  CHECK(c.learn.decompose.iter_times == 4);
}

TEST_CASE("config text: comments, whitespace and precedence") {
  RunConfig c;
  c.load_text("# header\n  eta = 0.07  # trailing\n\nbasis_method=gram_schmidt\ninvert_criterion = true\n");
  CHECK(c.detection.eta == 0.07);
  CHECK(c.learn.basis.method == Orthonormalization::gram_schmidt);
  CHECK(c.learn.detect.invert_criterion);
  // Overrides applied after the file win.
  c.set("eta", "0.09");
  CHECK(c.detection.eta == 0.09);
}

TEST_CASE("config JSON round-trips through to_json") {
  RunConfig a;
  a.set("phi_bt", "0.75");
  a.set("patch_rows", "13");
  a.set("energy", "0.95");
  a.set("close_dmax", "8");
  a.set("basis_method", "gram_schmidt");
  RunConfig b;
  b.load_text(a.to_json().dump(2));
  CHECK(b.to_json() == a.to_json());
  CHECK(b.detection.phi_bt == 0.75);
  CHECK(b.learn.patch_rows == 13);
  CHECK(b.close_dmax == 8);
}

TEST_CASE("config errors") {
  RunConfig c;
  CHECK_THROWS_AS(c.set("lamda", "0.1"), InvalidArgument);
  CHECK_THROWS_AS(c.set("iter_times", "2.5"), InvalidArgument);
  CHECK_THROWS_AS(c.set("lambda", "abc"), InvalidArgument);
  CHECK_THROWS_AS(c.set("lambda", ""), InvalidArgument);
  CHECK_THROWS_AS(c.set("invert_criterion", "maybe"), InvalidArgument);
  CHECK_THROWS_AS(c.set("basis_method", "qr"), InvalidArgument);
  CHECK_THROWS_AS(c.load_text("lambda 0.1\n"), InvalidArgument);
  CHECK_THROWS_AS(c.load_text("{\"lambda\": }"), InvalidArgument);
  CHECK_THROWS_AS(c.load_file("/nonexistent/tbsd.cfg"), IoError);
}
