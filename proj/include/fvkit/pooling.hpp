#pragma once

#include <cstddef>
#include <span>

#include "fvkit/types.hpp"

namespace fvkit {

enum class NormOrder { PowerThenIntra, IntraThenPower };

struct NormalizationSpec {
  double power_alpha = 0.5;
  bool apply_power = true;
  bool apply_intra = true;
  // Sub-vector length for intra-normalization; 0 means "the layout's d".
  std::size_t subvector_len = 0;
  NormOrder order = NormOrder::PowerThenIntra;
  // Final l2 normalization of the whole vector.
  bool global_l2 = false;

  void validate() const;

  static NormalizationSpec none() {
    NormalizationSpec s;
    s.apply_power = false;
    s.apply_intra = false;
    return s;
  }
};

// Elementwise sum in list order.
Vector sum_pool(std::span<const Vector> per_feature);

// sign(z) * |z|^alpha, alpha in (0, 1].
Vector power_normalize(const Vector& v, double alpha);

// Divides each contiguous block of `subvector_len` entries by its l2 norm.
// All-zero blocks are left as they are.
Vector intra_normalize(const Vector& v, std::size_t subvector_len);

Vector l2_normalize(const Vector& v);

Vector normalize(const Vector& v, const NormalizationSpec& spec);
FisherVector normalize(const FisherVector& fv, const NormalizationSpec& spec);

}  // namespace fvkit
