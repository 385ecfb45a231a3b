#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fvkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// T local features of dimension d, one feature per row. Values are held in
// double precision; on-disk storage is f32.
class FeatureSet {
 public:
  explicit FeatureSet(RowMatrix data);

  std::size_t size() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(data_.cols()); }
  const RowMatrix& data() const { return data_; }
  auto row(std::size_t i) const { return data_.row(static_cast<Eigen::Index>(i)); }

  // Rows [first, first+count) as a new set.
  FeatureSet slice(std::size_t first, std::size_t count) const;
  // Rows listed in `order`, in that order.
  FeatureSet select(const std::vector<std::size_t>& order) const;
  // Vertical concatenation; dimensions must agree.
  static FeatureSet concat(const FeatureSet& a, const FeatureSet& b);

  friend bool operator==(const FeatureSet& a, const FeatureSet& b);

 private:
  RowMatrix data_;
};

// d x K basis matrix. Columns are the bases; each has Euclidean norm <= 1.
class Dictionary {
 public:
  static constexpr double kNormSlack = 1e-9;

  explicit Dictionary(Matrix bases);

  std::size_t dim() const { return static_cast<std::size_t>(bases_.rows()); }
  std::size_t atoms() const { return static_cast<std::size_t>(bases_.cols()); }
  const Matrix& bases() const { return bases_; }

  friend bool operator==(const Dictionary& a, const Dictionary& b) { return a.bases_ == b.bases_; }

 private:
  Matrix bases_;
};

// Latent code u of one feature together with its solver certificate.
struct SparseCode {
  Vector u;
  std::size_t nnz = 0;
  // Lasso KKT residual at u (0 for codes not produced by a lasso solver).
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  // Set by OMP when the selected columns were rank deficient and a
  // least-norm solution was used.
  bool rank_deficient = false;

  static SparseCode from(Vector u);
};

// Diagonal-covariance Gaussian mixture.
class GmmModel {
 public:
  GmmModel(Vector weights, RowMatrix means, RowMatrix variances, double variance_floor);

  std::size_t components() const { return static_cast<std::size_t>(weights_.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(means_.cols()); }
  const Vector& weights() const { return weights_; }
  const RowMatrix& means() const { return means_; }
  const RowMatrix& variances() const { return variances_; }
  double variance_floor() const { return variance_floor_; }

  friend bool operator==(const GmmModel& a, const GmmModel& b);

 private:
  Vector weights_;
  RowMatrix means_;
  RowMatrix variances_;
  double variance_floor_;
};

enum class EncodingKind : std::uint32_t { Scfvc = 1, GmmFvc = 2 };

struct FisherLayout {
  EncodingKind kind = EncodingKind::Scfvc;
  std::size_t dim = 0;   // local feature dimension d
  std::size_t units = 0; // K bases or m components
  bool mean_only = false; // GMM only: variance block omitted

  std::size_t length() const;
  std::size_t subvectors() const { return length() / dim; }
  std::string describe() const;

  friend bool operator==(const FisherLayout&, const FisherLayout&) = default;
};

// Flat image representation. SCFVC: K contiguous sub-vectors of length d.
// GMMFVC: m mean sub-vectors followed by m variance sub-vectors.
struct FisherVector {
  Vector values;
  FisherLayout layout;

  FisherVector(Vector v, FisherLayout l);
};

bool all_finite(const Eigen::Ref<const Matrix>& m);

}  // namespace fvkit
