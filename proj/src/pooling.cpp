#include "fvkit/pooling.hpp"

#include <cmath>

#include "fvkit/errors.hpp"

namespace fvkit {

void NormalizationSpec::validate() const {
  if (!(power_alpha > 0.0 && power_alpha <= 1.0)) throw InvalidArgument("power_alpha must be in (0, 1]");
}

Vector sum_pool(std::span<const Vector> per_feature) {
  if (per_feature.empty()) throw InvalidArgument("sum_pool: empty list");
  Vector out = per_feature.front();
  for (std::size_t i = 1; i < per_feature.size(); ++i) {
    if (per_feature[i].size() != out.size()) throw DimensionError("sum_pool: vectors of different length");
    out += per_feature[i];
  }
  return out;
}

Vector power_normalize(const Vector& v, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("power_normalize: alpha must be in (0, 1]");
  if (alpha == 1.0) return v;
  return v.unaryExpr([alpha](double z) {
    const double m = std::pow(std::abs(z), alpha);
    return z < 0.0 ? -m : m;
  });
}

Vector intra_normalize(const Vector& v, std::size_t subvector_len) {
  if (subvector_len == 0 || static_cast<std::size_t>(v.size()) % subvector_len != 0)
    throw DimensionError("intra_normalize: length " + std::to_string(v.size()) + " not divisible by " +
                         std::to_string(subvector_len));
  Vector out = v;
  const auto len = static_cast<Eigen::Index>(subvector_len);
  for (Eigen::Index start = 0; start < out.size(); start += len) {
    auto block = out.segment(start, len);
    const double n = block.norm();
    if (n > 0.0) block /= n;
  }
  return out;
}

Vector l2_normalize(const Vector& v) {
  const double n = v.norm();
  return n > 0.0 ? Vector(v / n) : v;
}

Vector normalize(const Vector& v, const NormalizationSpec& spec) {
  spec.validate();
  Vector out = v;
  const bool intra = spec.apply_intra;
  if (intra && spec.subvector_len == 0) throw InvalidArgument("normalize: subvector_len not set");
  if (spec.order == NormOrder::PowerThenIntra) {
    if (spec.apply_power) out = power_normalize(out, spec.power_alpha);
    if (intra) out = intra_normalize(out, spec.subvector_len);
  } else {
    if (intra) out = intra_normalize(out, spec.subvector_len);
    if (spec.apply_power) out = power_normalize(out, spec.power_alpha);
  }
  if (spec.global_l2) out = l2_normalize(out);
  return out;
}

FisherVector normalize(const FisherVector& fv, const NormalizationSpec& spec) {
  NormalizationSpec s = spec;
  if (s.subvector_len == 0) s.subvector_len = fv.layout.dim;
  return FisherVector(normalize(fv.values, s), fv.layout);
}

}  // namespace fvkit
