#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "fvkit/sparse_coding.hpp"
#include "lasso_detail.hpp"

namespace fvkit {

void SparseCodingParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be >= 0");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("sigma2 must be > 0");
  if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
  if (max_iter == 0) throw InvalidArgument("max_iter must be positive");
}

namespace detail {

double kkt_residual(const Vector& u, const Vector& grad, double lambda) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    double v;
    if (u[k] != 0.0) {
      v = std::abs(grad[k] + lambda * (u[k] > 0.0 ? 1.0 : -1.0));
    } else {
      v = std::max(0.0, std::abs(grad[k]) - lambda);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

double objective_from_gram(double xx, const Vector& c, const Matrix& gram, const Vector& u,
                           const SparseCodingParams& p) {
  const double sq = std::max(0.0, xx - 2.0 * c.dot(u) + u.dot(gram * u));
  return sq / p.sigma2 + p.lambda * u.lpNorm<1>();
}

}  // namespace detail

double lasso_objective(const Eigen::Ref<const Vector>& x, const Dictionary& dict, const Eigen::Ref<const Vector>& u,
                       const SparseCodingParams& p) {
  if (static_cast<std::size_t>(x.size()) != dict.dim() || static_cast<std::size_t>(u.size()) != dict.atoms())
    throw DimensionError("lasso_objective: dimensions disagree");
  return (x - dict.bases() * u).squaredNorm() / p.sigma2 + p.lambda * u.lpNorm<1>();
}

double lasso_kkt_residual(const Eigen::Ref<const Vector>& x, const Dictionary& dict,
                          const Eigen::Ref<const Vector>& u, const SparseCodingParams& p) {
  if (static_cast<std::size_t>(x.size()) != dict.dim() || static_cast<std::size_t>(u.size()) != dict.atoms())
    throw DimensionError("lasso_kkt_residual: dimensions disagree");
  const Vector grad = (2.0 / p.sigma2) * (dict.bases().transpose() * (dict.bases() * u - x));
  return detail::kkt_residual(u, grad, p.lambda);
}

double default_lambda(const FeatureSet& features) {
  const double mean_norm = features.data().rowwise().norm().mean();
  return 0.15 * mean_norm / std::sqrt(static_cast<double>(features.dim()));
}

LassoSolver::LassoSolver(const Dictionary& dict, SparseCodingParams params)
    : bases_(dict.bases()), gram_(dict.bases().transpose() * dict.bases()), params_(params) {
  params_.validate();
}

SparseCode LassoSolver::solve(const Eigen::Ref<const Vector>& x) const {
  Outcome out = try_solve(x);
  if (!out.converged) {
    std::ostringstream os;
    os << "lasso did not converge in " << params_.max_iter << " iterations (KKT residual "
       << out.code.kkt_residual << ", tol " << params_.tol << ")";
    throw ConvergenceError(os.str(), std::move(out.code));
  }
  return std::move(out.code);
}

LassoSolver::Outcome LassoSolver::try_solve(const Eigen::Ref<const Vector>& x, const Vector* warm) const {
  if (x.size() != bases_.rows()) throw DimensionError("lasso: feature dimension does not match dictionary");
  if (!x.allFinite()) throw DataError("lasso: non-finite input");
  if (warm && warm->size() != bases_.cols()) throw DimensionError("lasso: warm start has wrong length");
  const Vector xv = x;
  const Vector c = bases_.transpose() * xv;
  if (params_.method == LassoMethod::FeatureSign) return feature_sign(xv, c);
  return coordinate_descent(xv, c, warm);
}

namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

// Cyclic coordinate descent with covariance updates. Once the support looks
// settled, the equality-constrained quadratic on the active face is solved
// directly; the result is kept only if it stays on the same orthant face,
// where it is the exact minimizer.
LassoSolver::Outcome LassoSolver::coordinate_descent(const Vector& x, const Vector& c, const Vector* warm) const {
  const auto K = bases_.cols();
  const double thresh = 0.5 * params_.lambda * params_.sigma2;
  const double scale = 2.0 / params_.sigma2;
  const double xx = x.squaredNorm();

  Vector u = warm ? *warm : Vector::Zero(K);
  for (Eigen::Index k = 0; k < K; ++k)
    if (gram_(k, k) <= 0.0) u[k] = 0.0;
  Vector q = gram_ * u;

  auto residual_of = [&](const Vector& uu, const Vector& qq) {
    return detail::kkt_residual(uu, scale * (qq - c), params_.lambda);
  };

  Outcome out;
  double kkt = residual_of(u, q);
  std::size_t sweep = 0;
  std::size_t stable_sweeps = 0;
  while (kkt > params_.tol && sweep < params_.max_iter) {
    ++sweep;
    bool support_changed = false;
    for (Eigen::Index k = 0; k < K; ++k) {
      const double gkk = gram_(k, k);
      if (gkk <= 0.0) continue;
      const double rho = c[k] - q[k] + gkk * u[k];
      const double next = soft_threshold(rho, thresh) / gkk;
      const double delta = next - u[k];
      if (delta != 0.0) {
        if ((next == 0.0) != (u[k] == 0.0) || (next > 0.0) != (u[k] > 0.0)) support_changed = true;
        q.noalias() += delta * gram_.col(k);
        u[k] = next;
      }
    }
    q.noalias() = gram_ * u;
    kkt = residual_of(u, q);
    stable_sweeps = support_changed ? 0 : stable_sweeps + 1;

    if (kkt > params_.tol && stable_sweeps >= 2) {
      Vector moved;
      const auto kind = detail::face_step(gram_, c, u, thresh, moved);
      if (kind != detail::FaceStep::None) {
        const Vector qm = gram_ * moved;
        const double km = residual_of(moved, qm);
        const bool lower = detail::objective_from_gram(xx, c, gram_, moved, params_) <=
                           detail::objective_from_gram(xx, c, gram_, u, params_) + 1e-15 * std::max(1.0, xx);
        if (lower && (kind == detail::FaceStep::Reduced || km < kkt)) {
          u = std::move(moved);
          q = qm;
          kkt = km;
        }
      }
      stable_sweeps = 0;
    }
  }

  out.converged = kkt <= params_.tol;
  out.code = SparseCode::from(std::move(u));
  out.code.kkt_residual = kkt;
  out.code.iterations = sweep;
  return out;
}

SparseCode lasso_solve(const Eigen::Ref<const Vector>& x, const Dictionary& dict, const SparseCodingParams& p) {
  return LassoSolver(dict, p).solve(x);
}

std::vector<SparseCode> lasso_solve_batch(const FeatureSet& features, const Dictionary& dict,
                                          const SparseCodingParams& p) {
  if (features.dim() != dict.dim()) throw DimensionError("lasso batch: feature dimension does not match dictionary");
  const LassoSolver solver(dict, p);
  std::vector<SparseCode> codes;
  codes.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Vector x = features.row(i).transpose();
    auto out = solver.try_solve(x);
    if (!out.converged) {
      std::ostringstream os;
      os << "lasso did not converge on row " << i << " (KKT residual " << out.code.kkt_residual << ")";
      throw ConvergenceError(os.str(), std::move(out.code), i);
    }
    codes.push_back(std::move(out.code));
  }
  return codes;
}

}  // namespace fvkit
