#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "fvkit/errors.hpp"
#include "fvkit/io.hpp"
#include "oracles.hpp"

using namespace fvkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("fvkit_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const std::string& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Feature file built by hand from the documented layout.
std::string feature_bytes(std::uint64_t T, std::uint64_t d, const std::vector<float>& payload,
                          std::uint32_t version = 1) {
  std::string b = "FVK1";
  auto put = [&](const void* p, std::size_t n) { b.append(static_cast<const char*>(p), n); };
  put(&version, 4);
  put(&T, 8);
  put(&d, 8);
  put(payload.data(), payload.size() * 4);
  return b;
}

}  // namespace

TEST_CASE("core types validate their invariants") {
  CHECK_THROWS_AS(FeatureSet(RowMatrix(0, 3)), DataError);
  RowMatrix nan = RowMatrix::Zero(2, 2);
  nan(1, 1) = std::nan("");
  CHECK_THROWS_AS(FeatureSet{nan}, DataError);
  RowMatrix inf = RowMatrix::Zero(2, 2);
  inf(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(FeatureSet{inf}, DataError);

  CHECK_THROWS_AS(Dictionary(Matrix::Constant(2, 2, 1.0)), DataError);  // column norm sqrt(2)
  CHECK_NOTHROW(Dictionary(Matrix::Identity(3, 2)));

  Vector w(2);
  w << 0.3, 0.6;
  CHECK_THROWS_AS(GmmModel(w, RowMatrix::Zero(2, 2), RowMatrix::Ones(2, 2), 1e-6), DataError);
  w << 0.4, 0.6;
  CHECK_NOTHROW(GmmModel(w, RowMatrix::Zero(2, 2), RowMatrix::Ones(2, 2), 1e-6));
  CHECK_THROWS_AS(GmmModel(w, RowMatrix::Zero(2, 2), RowMatrix::Constant(2, 2, 1e-7), 1e-6), DataError);
  CHECK_THROWS_AS(GmmModel(w, RowMatrix::Zero(2, 3), RowMatrix::Ones(2, 2), 1e-6), DimensionError);
  w << 0.0, 1.0;
  CHECK_THROWS_AS(GmmModel(w, RowMatrix::Zero(2, 2), RowMatrix::Ones(2, 2), 1e-6), DataError);

  CHECK(FisherLayout{EncodingKind::Scfvc, 5, 7, false}.length() == 35);
  CHECK(FisherLayout{EncodingKind::GmmFvc, 5, 7, false}.length() == 70);
  CHECK(FisherLayout{EncodingKind::GmmFvc, 5, 7, true}.length() == 35);
  CHECK_THROWS_AS(FisherVector(Vector::Zero(34), FisherLayout{EncodingKind::Scfvc, 5, 7, false}), DimensionError);

  Vector u(4);
  u << 0.0, -1.0, 0.0, 2.0;
  CHECK(SparseCode::from(u).nnz == 2);
}

TEST_CASE("feature sets slice, select and concatenate") {
  std::mt19937_64 rng(1);
  const FeatureSet X(oracle::gaussian(rng, 6, 3));
  CHECK(X.slice(2, 3).data() == X.data().middleRows(2, 3));
  CHECK(X.select({5, 0}).row(1) == X.row(0));
  CHECK(FeatureSet::concat(X.slice(0, 2), X.slice(2, 4)) == X);
  CHECK_THROWS_AS(X.slice(5, 2), InvalidArgument);
  CHECK_THROWS_AS(FeatureSet::concat(X, FeatureSet(oracle::gaussian(rng, 1, 2))), DimensionError);
}

TEST_CASE("feature files") {
  TempDir dir;
  SUBCASE("hand-written 2x3 file reads back") {
    spit(dir / "a.fvk", feature_bytes(2, 3, {1, 2, 3, 4, 5, 6.5f}));
    const FeatureSet X = read_features(dir / "a.fvk");
    CHECK(X.size() == 2);
    CHECK(X.dim() == 3);
    CHECK(X.row(1)[2] == 6.5);
    write_features(X, dir / "b.fvk");
    CHECK(slurp(dir / "a.fvk") == slurp(dir / "b.fvk"));
  }
  SUBCASE("a single zero feature is header plus zeros") {
    write_features(FeatureSet(RowMatrix::Zero(1, 4)), dir / "z.fvk");
    CHECK(slurp(dir / "z.fvk") == feature_bytes(1, 4, {0, 0, 0, 0}));
  }
  SUBCASE("1000x2000 file size") {
    write_features(FeatureSet(RowMatrix::Ones(1000, 2000)), dir / "big.fvk");
    CHECK(fs::file_size(dir / "big.fvk") == 24 + 1000ull * 2000ull * 4ull);
  }
  SUBCASE("round trip of f32 values is exact") {
    std::mt19937_64 rng(2);
    const FeatureSet X(RowMatrix(oracle::gaussian(rng, 17, 9).cast<float>().cast<double>()));
    write_features(X, dir / "r.fvk");
    CHECK(read_features(dir / "r.fvk") == X);
  }
  SUBCASE("empty set") {
    spit(dir / "e.fvk", feature_bytes(0, 3, {}));
    try {
      (void)read_features(dir / "e.fvk");
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("empty feature set") != std::string::npos);
    }
  }
  SUBCASE("payload length mismatch") {
    spit(dir / "t.fvk", feature_bytes(2, 3, {1, 2, 3, 4, 5}));
    CHECK_THROWS_AS(read_features(dir / "t.fvk"), IoError);
    spit(dir / "t.fvk", feature_bytes(2, 3, {1, 2, 3, 4, 5, 6, 7}));
    CHECK_THROWS_AS(read_features(dir / "t.fvk"), IoError);
  }
  SUBCASE("bad magic, version and values") {
    std::string b = feature_bytes(1, 1, {1});
    b[1] = 'Q';
    spit(dir / "m.fvk", b);
    CHECK_THROWS_AS(read_features(dir / "m.fvk"), FormatError);
    spit(dir / "v.fvk", feature_bytes(1, 1, {1}, 2));
    CHECK_THROWS_AS(read_features(dir / "v.fvk"), VersionError);
    spit(dir / "n.fvk", feature_bytes(1, 2, {1, std::numeric_limits<float>::quiet_NaN()}));
    CHECK_THROWS_AS(read_features(dir / "n.fvk"), DataError);
  }
  SUBCASE("missing file") {
    try {
      (void)read_features(dir / "nope.fvk");
      FAIL("expected an error");
    } catch (const NotFoundError& e) {
      CHECK(std::string(e.category()) == "input-not-found");
    }
  }
  SUBCASE("CSV import") {
    spit(dir / "c.csv", "1,2.5,-3\n\n4,5e-1,6\n");
    const FeatureSet X = read_features_csv(dir / "c.csv");
    CHECK(X.size() == 2);
    CHECK(X.row(0)[1] == 2.5);
    CHECK(X.row(1)[1] == 0.5);
    spit(dir / "c.csv", "1,2\n3\n");
    CHECK_THROWS_AS(read_features_csv(dir / "c.csv"), FormatError);
    spit(dir / "c.csv", "1,x\n");
    CHECK_THROWS_AS(read_features_csv(dir / "c.csv"), FormatError);
  }
}

TEST_CASE("model files round trip") {
  TempDir dir;
  std::mt19937_64 rng(3);

  const Dictionary dict(oracle::random_bases(rng, 5, 8));
  save_model(dict, dir / "d.fvkm");
  CHECK(load_dictionary(dir / "d.fvkm") == dict);
  CHECK(peek_model_type(dir / "d.fvkm") == ModelType::Dictionary);

  Vector w(3);
  w << 0.2, 0.3, 0.5;
  const GmmModel g(w, oracle::gaussian(rng, 3, 4), RowMatrix::Constant(3, 4, 0.7), 1e-5);
  save_model(g, dir / "g.fvkm");
  const GmmModel g2 = load_gmm(dir / "g.fvkm");
  CHECK(g2 == g);
  CHECK(std::abs(g2.weights().sum() - 1.0) <= 1e-9);

  CHECK_THROWS_AS(load_gmm(dir / "d.fvkm"), FormatError);
  try {
    (void)load_dictionary(dir / "missing.fvkm");
    FAIL("expected an error");
  } catch (const NotFoundError& e) {
    CHECK(std::string(e.category()) == "model-not-found");
  }

  std::string b = slurp(dir / "d.fvkm");
  b[0] = 'X';
  spit(dir / "bad.fvkm", b);
  CHECK_THROWS_AS(load_dictionary(dir / "bad.fvkm"), FormatError);
  b = slurp(dir / "d.fvkm");
  b[4] = 7;
  spit(dir / "bad.fvkm", b);
  CHECK_THROWS_AS(load_dictionary(dir / "bad.fvkm"), VersionError);

  // A payload that decodes to an invalid dictionary is a format error.
  Matrix big = Matrix::Identity(2, 2) * 3.0;
  b = slurp(dir / "d.fvkm").substr(0, 12);
  const std::uint64_t rows = 2, cols = 2;
  b.append(reinterpret_cast<const char*>(&rows), 8);
  b.append(reinterpret_cast<const char*>(&cols), 8);
  const RowMatrix rm = big;
  b.append(reinterpret_cast<const char*>(rm.data()), 4 * 8);
  spit(dir / "bad.fvkm", b);
  CHECK_THROWS_AS(load_dictionary(dir / "bad.fvkm"), FormatError);
}
