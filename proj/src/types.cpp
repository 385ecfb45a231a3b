#include "fvkit/types.hpp"

#include <cmath>
#include <sstream>

#include "fvkit/errors.hpp"

namespace fvkit {

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

FeatureSet::FeatureSet(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() < 1) throw DataError("empty feature set");
  if (data_.cols() < 1) throw DataError("feature dimension must be >= 1");
  if (!data_.allFinite()) throw DataError("feature set contains non-finite values");
}

FeatureSet FeatureSet::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw InvalidArgument("slice out of range");
  return FeatureSet(data_.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)));
}

FeatureSet FeatureSet::select(const std::vector<std::size_t>& order) const {
  RowMatrix out(static_cast<Eigen::Index>(order.size()), data_.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] >= size()) throw InvalidArgument("row index out of range");
    out.row(static_cast<Eigen::Index>(i)) = data_.row(static_cast<Eigen::Index>(order[i]));
  }
  return FeatureSet(std::move(out));
}

FeatureSet FeatureSet::concat(const FeatureSet& a, const FeatureSet& b) {
  if (a.dim() != b.dim()) throw DimensionError("cannot concatenate feature sets of different dimension");
  RowMatrix out(a.data_.rows() + b.data_.rows(), a.data_.cols());
  out << a.data_, b.data_;
  return FeatureSet(std::move(out));
}

bool operator==(const FeatureSet& a, const FeatureSet& b) {
  return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() && a.data_ == b.data_;
}

Dictionary::Dictionary(Matrix bases) : bases_(std::move(bases)) {
  if (bases_.rows() < 1 || bases_.cols() < 1) throw DataError("dictionary must be non-empty");
  if (!bases_.allFinite()) throw DataError("dictionary contains non-finite values");
  for (Eigen::Index k = 0; k < bases_.cols(); ++k) {
    if (bases_.col(k).norm() > 1.0 + kNormSlack) {
      std::ostringstream os;
      os << "dictionary column " << k << " has norm " << bases_.col(k).norm() << " > 1";
      throw DataError(os.str());
    }
  }
}

SparseCode SparseCode::from(Vector u) {
  SparseCode c;
  c.nnz = static_cast<std::size_t>((u.array() != 0.0).count());
  c.u = std::move(u);
  return c;
}

GmmModel::GmmModel(Vector weights, RowMatrix means, RowMatrix variances, double variance_floor)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      variances_(std::move(variances)),
      variance_floor_(variance_floor) {
  const auto m = weights_.size();
  if (m < 1) throw DataError("GMM needs at least one component");
  if (means_.rows() != m || variances_.rows() != m || means_.cols() != variances_.cols() || means_.cols() < 1)
    throw DimensionError("GMM parameter shapes disagree");
  if (!weights_.allFinite() || !means_.allFinite() || !variances_.allFinite())
    throw DataError("GMM contains non-finite values");
  if (!(variance_floor_ > 0.0) || !std::isfinite(variance_floor_)) throw DataError("GMM variance floor must be positive");
  if ((weights_.array() <= 0.0).any()) throw DataError("GMM weights must be positive");
  if (std::abs(weights_.sum() - 1.0) > 1e-9) throw DataError("GMM weights must sum to 1");
  if ((variances_.array() < variance_floor_).any()) throw DataError("GMM variance below floor");
}

bool operator==(const GmmModel& a, const GmmModel& b) {
  return a.weights_ == b.weights_ && a.means_ == b.means_ && a.variances_ == b.variances_ &&
         a.variance_floor_ == b.variance_floor_;
}

std::size_t FisherLayout::length() const {
  if (kind == EncodingKind::Scfvc || mean_only) return dim * units;
  return 2 * dim * units;
}

std::string FisherLayout::describe() const {
  std::ostringstream os;
  if (kind == EncodingKind::Scfvc) {
    os << "SCFVC(d=" << dim << ",K=" << units << ")";
  } else {
    os << "GMMFVC(d=" << dim << ",m=" << units << (mean_only ? ",mean-only" : "") << ")";
  }
  return os.str();
}

FisherVector::FisherVector(Vector v, FisherLayout l) : values(std::move(v)), layout(l) {
  if (layout.dim == 0 || layout.units == 0) throw InvalidArgument("Fisher layout must have positive dims");
  if (static_cast<std::size_t>(values.size()) != layout.length())
    throw DimensionError("Fisher vector length " + std::to_string(values.size()) + " does not match layout " +
                         layout.describe());
}

}  // namespace fvkit
