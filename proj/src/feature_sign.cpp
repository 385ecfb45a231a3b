// Feature-sign search: an active-set lasso solver that guesses the sign of
// each active coefficient, solves the resulting unconstrained quadratic and
// line-searches back along the segment to the first sign change.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "fvkit/sparse_coding.hpp"
#include "lasso_detail.hpp"

namespace fvkit {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// 0.5 u'Gu - c'u + t ||u||_1, i.e. sigma2/2 times the lasso objective minus a constant.
double half_objective(const Matrix& gram, const Vector& c, const Vector& u, double t) {
  return 0.5 * u.dot(gram * u) - c.dot(u) + t * u.lpNorm<1>();
}

// Moves the active coefficients `cur` along a null direction of the active
// Gram matrix `ga`, oriented downhill for the face objective, up to the first
// coefficient that reaches zero. Returns false when no such step exists or it
// would give a newly activated coefficient the wrong sign.
bool null_direction_step(const Matrix& ga, const Vector& rhs, const Vector& cur, const Vector& theta,
                         const std::vector<Eigen::Index>& idx, Vector& u) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(ga);
  if (es.info() != Eigen::Success) return false;
  const auto n = ga.rows();
  if (es.eigenvalues()[0] > 1e-10 * std::max(es.eigenvalues()[n - 1], 1e-300)) return false;
  Vector dir = es.eigenvectors().col(0);
  const double slope = (ga * cur - rhs).dot(dir);
  if (slope == 0.0) return false;
  if (slope > 0.0) dir = -dir;

  double tau = std::numeric_limits<double>::infinity();
  Eigen::Index hit = -1;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (cur[a] == 0.0) {
      if (dir[a] * theta[idx[a]] < 0.0) return false;
      continue;
    }
    if (dir[a] * cur[a] < 0.0 && -cur[a] / dir[a] < tau) {
      tau = -cur[a] / dir[a];
      hit = a;
    }
  }
  if (hit < 0) return false;
  for (Eigen::Index a = 0; a < n; ++a) {
    const double v = a == hit ? 0.0 : cur[a] + tau * dir[a];
    const double s = cur[a] != 0.0 ? sgn(cur[a]) : theta[idx[a]];
    u[idx[a]] = sgn(v) == s ? v : 0.0;
  }
  return true;
}

}  // namespace

LassoSolver::Outcome LassoSolver::feature_sign(const Vector& x, const Vector& c) const {
  const auto K = bases_.cols();
  const double t = 0.5 * params_.lambda * params_.sigma2;
  const double tol_h = 0.5 * params_.tol * params_.sigma2;

  Vector u = Vector::Zero(K);
  Vector theta = Vector::Zero(K);
  std::vector<bool> active(static_cast<std::size_t>(K), false);
  std::size_t iter = 0;
  bool optimal = false;
  bool stalled = false;

  auto nonzero_optimal = [&](const Vector& g) {
    for (Eigen::Index j = 0; j < K; ++j)
      if (u[j] != 0.0 && std::abs(g[j] + t * sgn(u[j])) > tol_h) return false;
    return true;
  };

  while (iter < params_.max_iter && !stalled) {
    Vector g = gram_ * u - c;

    // Activate the most violating zero coefficient.
    Eigen::Index pick = -1;
    double best = t;
    for (Eigen::Index j = 0; j < K; ++j) {
      if (u[j] != 0.0 || gram_(j, j) <= 0.0) continue;
      if (std::abs(g[j]) > best + tol_h) {
        best = std::abs(g[j]);
        pick = j;
      }
    }
    if (pick >= 0) {
      active[static_cast<std::size_t>(pick)] = true;
      theta[pick] = -sgn(g[pick]);
    } else if (nonzero_optimal(g)) {
      optimal = true;
      break;
    }

    // Feature-sign steps until the nonzero coefficients are optimal.
    while (iter < params_.max_iter) {
      ++iter;
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < K; ++j)
        if (active[static_cast<std::size_t>(j)]) idx.push_back(j);
      if (idx.empty()) break;
      const auto n = static_cast<Eigen::Index>(idx.size());
      Matrix ga(n, n);
      Vector rhs(n), cur(n);
      for (Eigen::Index a = 0; a < n; ++a) {
        rhs[a] = c[idx[a]] - t * theta[idx[a]];
        cur[a] = u[idx[a]];
        for (Eigen::Index b = 0; b < n; ++b) ga(a, b) = gram_(idx[a], idx[b]);
      }
      Vector target;
      Eigen::LDLT<Matrix> ldlt(ga);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-12) {
        target = ldlt.solve(rhs);
      } else {
        // A singular active set (more atoms than the span needs) has no
        // minimizer on its face; the objective falls along a null direction
        // until some coefficient reaches zero, which swaps that atom out.
        if (null_direction_step(ga, rhs, cur, theta, idx, u)) {
          for (Eigen::Index j = 0; j < K; ++j) {
            active[static_cast<std::size_t>(j)] = u[j] != 0.0;
            theta[j] = sgn(u[j]);
          }
          g = gram_ * u - c;
          if (nonzero_optimal(g)) break;
          continue;
        }
        target = ga.completeOrthogonalDecomposition().solve(rhs);
      }

      // Candidate points: the target itself and every zero crossing on the way.
      auto point_at = [&](double tau, Eigen::Index zero_at) {
        Vector p = u;
        for (Eigen::Index a = 0; a < n; ++a) p[idx[a]] = cur[a] + tau * (target[a] - cur[a]);
        if (zero_at >= 0) p[idx[zero_at]] = 0.0;
        return p;
      };
      Vector best_point = point_at(1.0, -1);
      double best_value = half_objective(gram_, c, best_point, t);
      for (Eigen::Index a = 0; a < n; ++a) {
        if (cur[a] == 0.0 || sgn(target[a]) == sgn(cur[a])) continue;
        const double tau = cur[a] / (cur[a] - target[a]);
        if (!(tau > 0.0 && tau < 1.0)) continue;
        Vector p = point_at(tau, a);
        const double v = half_objective(gram_, c, p, t);
        if (v < best_value) {
          best_value = v;
          best_point = std::move(p);
        }
      }
      if (best_value >= half_objective(gram_, c, u, t)) {
        stalled = true;
        break;
      }
      u = std::move(best_point);
      for (Eigen::Index j = 0; j < K; ++j) {
        active[static_cast<std::size_t>(j)] = u[j] != 0.0;
        theta[j] = sgn(u[j]);
      }
      g = gram_ * u - c;
      if (nonzero_optimal(g)) break;
    }
  }

  // Degenerate active sets can make the sign-guided step go uphill. Coordinate
  // descent from the current point finishes the job without that failure mode.
  if (stalled) {
    Outcome out = coordinate_descent(x, c, &u);
    out.code.iterations += iter;
    return out;
  }

  const Vector grad = (2.0 / params_.sigma2) * (gram_ * u - c);
  Outcome out;
  const double kkt = detail::kkt_residual(u, grad, params_.lambda);
  out.converged = optimal || kkt <= params_.tol;
  out.code = SparseCode::from(std::move(u));
  out.code.kkt_residual = kkt;
  out.code.iterations = iter;
  return out;
}

}  // namespace fvkit
