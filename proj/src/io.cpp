#include "fvkit/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "fvkit/errors.hpp"

namespace fvkit {

namespace {

constexpr char kFeatureMagic[4] = {'F', 'V', 'K', '1'};
constexpr char kModelMagic[4] = {'F', 'V', 'K', 'M'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class Writer {
 public:
  template <typename T>
  void put(T v) {
    v = to_little(v);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  void string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  template <typename Derived>
  void matrix(const Eigen::MatrixBase<Derived>& m) {
    put<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(m(i, j));
  }
  void vector(const Vector& v) {
    put<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) put<double>(v[i]);
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    out.close();
    if (!out) throw IoError("write to '" + path + "' failed");
  }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

  std::size_t remaining() const { return data_.size() - pos_; }

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(v);
  }
  void bytes(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  std::string string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  // Guards against element counts larger than the remaining payload.
  std::uint64_t count(std::uint64_t n, std::size_t elem_size) {
    if (elem_size != 0 && n > remaining() / elem_size) throw IoError("truncated payload in '" + path_ + "'");
    return n;
  }
  RowMatrix matrix() {
    const auto rows = get<std::uint64_t>();
    const auto cols = get<std::uint64_t>();
    if (cols != 0 && rows > std::numeric_limits<std::uint64_t>::max() / cols)
      throw FormatError("matrix size overflow in '" + path_ + "'");
    count(rows * cols, sizeof(double));
    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = get<double>();
    return m;
  }
  Vector vector() {
    const auto n = count(get<std::uint64_t>(), sizeof(double));
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = get<double>();
    return v;
  }
  void finish() const {
    if (remaining() != 0) throw FormatError("trailing bytes in '" + path_ + "'");
  }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) throw IoError("truncated payload in '" + path_ + "'");
  }

  std::string data_;
  std::size_t pos_ = 0;
  std::string path_;
};

std::string slurp(const std::string& path, const char* missing_category) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw NotFoundError("no such file: '" + path + "'", missing_category);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  return ss.str();
}

Writer model_header(ModelType type) {
  Writer w;
  w.bytes(kModelMagic, 4);
  w.put<std::uint32_t>(kModelFileVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(type));
  return w;
}

const char* type_name(ModelType t) {
  switch (t) {
    case ModelType::Dictionary: return "dictionary";
    case ModelType::Gmm: return "gmm";
    case ModelType::Pca: return "pca";
    case ModelType::Svm: return "svm";
    case ModelType::EncodedSet: return "encoded set";
  }
  return "unknown";
}

Reader open_model(const std::string& path, ModelType* type_out) {
  Reader r(slurp(path, "model-not-found"), path);
  char magic[4];
  try {
    r.bytes(magic, 4);
  } catch (const IoError&) {
    throw FormatError("'" + path + "' is too short to be a model file");
  }
  if (std::memcmp(magic, kModelMagic, 4) != 0) throw FormatError("'" + path + "' is not a model file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFileVersion)
    throw VersionError("'" + path + "' has model format version " + std::to_string(version) + ", expected " +
                       std::to_string(kModelFileVersion));
  const auto tag = r.get<std::uint32_t>();
  if (tag < 1 || tag > 5) throw FormatError("'" + path + "' has unknown model type " + std::to_string(tag));
  *type_out = static_cast<ModelType>(tag);
  return r;
}

Reader open_model_as(const std::string& path, ModelType expected) {
  ModelType t;
  Reader r = open_model(path, &t);
  if (t != expected)
    throw FormatError("'" + path + "' holds a " + type_name(t) + " model, expected " + type_name(expected));
  return r;
}

// Decoding errors from the typed constructors mean a corrupt payload.
template <typename F>
auto decode(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const IoError&) {
    throw;
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError("corrupt payload in '" + path + "': " + e.what());
  }
}

}  // namespace

RowMatrix EncodedSet::split_rows(bool test_split) const {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (test[i] == test_split) idx.push_back(static_cast<Eigen::Index>(i));
  RowMatrix out(static_cast<Eigen::Index>(idx.size()), values.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = values.row(idx[i]);
  return out;
}

std::vector<int> EncodedSet::split_labels(bool test_split) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (test[i] == test_split) out.push_back(labels[i]);
  return out;
}

FeatureSet read_features(const std::string& path) {
  Reader r(slurp(path, "input-not-found"), path);
  char magic[4];
  try {
    r.bytes(magic, 4);
  } catch (const IoError&) {
    throw FormatError("'" + path + "' is too short to be a feature file");
  }
  if (std::memcmp(magic, kFeatureMagic, 4) != 0) throw FormatError("'" + path + "' is not a feature file (bad magic)");
  std::uint32_t version;
  std::uint64_t T, d;
  try {
    version = r.get<std::uint32_t>();
    T = r.get<std::uint64_t>();
    d = r.get<std::uint64_t>();
  } catch (const IoError&) {
    throw FormatError("'" + path + "' has a truncated header");
  }
  if (version != kFeatureFileVersion)
    throw VersionError("'" + path + "' has feature format version " + std::to_string(version));
  if (T == 0) throw DataError("empty feature set in '" + path + "'");
  if (d == 0) throw FormatError("'" + path + "' declares feature dimension 0");
  if (d > std::numeric_limits<std::uint64_t>::max() / T) throw FormatError("'" + path + "' header size overflow");
  const std::uint64_t n = T * d;
  if (n > r.remaining() / sizeof(float) || r.remaining() != n * sizeof(float))
    throw IoError("'" + path + "' payload length does not match T*d = " + std::to_string(n));

  RowMatrix X(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const float v = r.get<float>();
      if (!std::isfinite(v)) throw DataError("non-finite value in '" + path + "'");
      X(i, j) = static_cast<double>(v);
    }
  return FeatureSet(std::move(X));
}

void write_features(const FeatureSet& features, const std::string& path) {
  Writer w;
  w.bytes(kFeatureMagic, 4);
  w.put<std::uint32_t>(kFeatureFileVersion);
  w.put<std::uint64_t>(features.size());
  w.put<std::uint64_t>(features.dim());
  const RowMatrix& X = features.data();
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const float v = static_cast<float>(X(i, j));
      if (!std::isfinite(v)) throw DataError("value does not fit in f32");
      w.put<float>(v);
    }
  w.save(path);
}

FeatureSet read_features_csv(const std::string& path) {
  const std::string text = slurp(path, "input-not-found");
  std::istringstream in(text);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto end = line.find(',', start);
      std::string cell = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
      const auto a = cell.find_first_not_of(" \t");
      const auto b = cell.find_last_not_of(" \t");
      cell = a == std::string::npos ? std::string() : cell.substr(a, b - a + 1);
      double v;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw FormatError(path + ":" + std::to_string(lineno) + ": cannot parse '" + cell + "'");
      if (!std::isfinite(v)) throw DataError(path + ":" + std::to_string(lineno) + ": non-finite value");
      row.push_back(v);
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                        " values, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("empty feature set in '" + path + "'");
  RowMatrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return FeatureSet(std::move(X));
}

void save_model(const Dictionary& dict, const std::string& path) {
  Writer w = model_header(ModelType::Dictionary);
  w.matrix(dict.bases());
  w.save(path);
}

void save_model(const GmmModel& gmm, const std::string& path) {
  Writer w = model_header(ModelType::Gmm);
  w.put<double>(gmm.variance_floor());
  w.vector(gmm.weights());
  w.matrix(gmm.means());
  w.matrix(gmm.variances());
  w.save(path);
}

void save_model(const PcaModel& pca, const std::string& path) {
  Writer w = model_header(ModelType::Pca);
  w.put<std::uint8_t>(pca.whiten ? 1 : 0);
  w.put<std::uint64_t>(pca.effective_rank);
  w.vector(pca.mean);
  w.matrix(pca.projection);
  w.vector(pca.eigenvalues);
  w.save(path);
}

void save_model(const SvmModel& svm, const std::string& path) {
  Writer w = model_header(ModelType::Svm);
  w.put<std::uint64_t>(svm.class_ids.size());
  for (int id : svm.class_ids) w.put<std::int32_t>(id);
  w.matrix(svm.weights);
  w.save(path);
}

void save_model(const EncodedSet& set, const std::string& path) {
  if (set.labels.size() != set.size() || set.test.size() != set.size() ||
      static_cast<std::size_t>(set.values.rows()) != set.size())
    throw DimensionError("encoded set: inconsistent sizes");
  Writer w = model_header(ModelType::EncodedSet);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(set.layout.kind));
  w.put<std::uint64_t>(set.layout.dim);
  w.put<std::uint64_t>(set.layout.units);
  w.put<std::uint8_t>(set.layout.mean_only ? 1 : 0);
  w.put<std::uint64_t>(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    w.string(set.names[i]);
    w.put<std::int32_t>(set.labels[i]);
    w.put<std::uint8_t>(set.test[i] ? 1 : 0);
  }
  w.matrix(set.values);
  w.save(path);
}

Dictionary load_dictionary(const std::string& path) {
  Reader r = open_model_as(path, ModelType::Dictionary);
  return decode(path, [&] {
    Matrix B = r.matrix();
    r.finish();
    return Dictionary(std::move(B));
  });
}

GmmModel load_gmm(const std::string& path) {
  Reader r = open_model_as(path, ModelType::Gmm);
  return decode(path, [&] {
    const double floor = r.get<double>();
    Vector w = r.vector();
    RowMatrix means = r.matrix();
    RowMatrix vars = r.matrix();
    r.finish();
    return GmmModel(std::move(w), std::move(means), std::move(vars), floor);
  });
}

PcaModel load_pca(const std::string& path) {
  Reader r = open_model_as(path, ModelType::Pca);
  return decode(path, [&] {
    PcaModel m;
    m.whiten = r.get<std::uint8_t>() != 0;
    m.effective_rank = r.get<std::uint64_t>();
    m.mean = r.vector();
    m.projection = r.matrix();
    m.eigenvalues = r.vector();
    r.finish();
    if (m.mean.size() != m.projection.rows() || m.eigenvalues.size() != m.projection.cols() ||
        m.projection.size() == 0)
      throw FormatError("corrupt payload in '" + path + "': PCA shapes disagree");
    if (!m.mean.allFinite() || !m.projection.allFinite() || !m.eigenvalues.allFinite())
      throw FormatError("corrupt payload in '" + path + "': non-finite PCA values");
    return m;
  });
}

SvmModel load_svm(const std::string& path) {
  Reader r = open_model_as(path, ModelType::Svm);
  return decode(path, [&] {
    SvmModel m;
    const auto n = r.count(r.get<std::uint64_t>(), sizeof(std::int32_t));
    for (std::uint64_t i = 0; i < n; ++i) m.class_ids.push_back(r.get<std::int32_t>());
    m.weights = r.matrix();
    r.finish();
    if (static_cast<std::uint64_t>(m.weights.rows()) != n || m.weights.cols() < 2 || n < 2)
      throw FormatError("corrupt payload in '" + path + "': SVM shapes disagree");
    return m;
  });
}

EncodedSet load_encoded(const std::string& path) {
  Reader r = open_model_as(path, ModelType::EncodedSet);
  return decode(path, [&] {
    EncodedSet s;
    const auto kind = r.get<std::uint32_t>();
    if (kind != 1 && kind != 2) throw FormatError("corrupt payload in '" + path + "': unknown encoding kind");
    s.layout.kind = static_cast<EncodingKind>(kind);
    s.layout.dim = r.get<std::uint64_t>();
    s.layout.units = r.get<std::uint64_t>();
    s.layout.mean_only = r.get<std::uint8_t>() != 0;
    const auto n = r.count(r.get<std::uint64_t>(), 9);
    for (std::uint64_t i = 0; i < n; ++i) {
      s.names.push_back(r.string());
      s.labels.push_back(r.get<std::int32_t>());
      s.test.push_back(r.get<std::uint8_t>() != 0);
    }
    s.values = r.matrix();
    r.finish();
    if (static_cast<std::uint64_t>(s.values.rows()) != n ||
        static_cast<std::size_t>(s.values.cols()) != s.layout.length())
      throw FormatError("corrupt payload in '" + path + "': encoded shapes disagree");
    return s;
  });
}

ModelType peek_model_type(const std::string& path) {
  ModelType t;
  open_model(path, &t);
  return t;
}

}  // namespace fvkit
