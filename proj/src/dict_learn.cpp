#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fvkit/sparse_coding.hpp"

namespace fvkit {

namespace {

constexpr int kColumnSweeps = 20;

Matrix initial_bases(const FeatureSet& features, std::size_t atoms, std::mt19937_64& rng) {
  const auto d = static_cast<Eigen::Index>(features.dim());
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Matrix B(d, static_cast<Eigen::Index>(atoms));
  Eigen::Index filled = 0;
  for (std::size_t i : order) {
    if (filled == B.cols()) break;
    const Vector x = features.row(i).transpose();
    const double n = x.norm();
    if (n == 0.0) continue;
    B.col(filled++) = x / n;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (; filled < B.cols(); ++filled) {
    Vector v(d);
    for (Eigen::Index j = 0; j < d; ++j) v[j] = normal(rng);
    B.col(filled) = v / v.norm();
  }
  return B;
}

// Replaces unused columns by the worst reconstructed features, normalized.
// Columns with all-zero codes do not contribute to the objective, so the
// replacement leaves it unchanged.
std::size_t reset_dead_atoms(const RowMatrix& X, const Matrix& codes, Matrix& B, const Vector& usage) {
  std::vector<Eigen::Index> dead;
  for (Eigen::Index k = 0; k < B.cols(); ++k)
    if (usage[k] <= 0.0) dead.push_back(k);
  if (dead.empty()) return 0;

  const Vector err = (X.transpose() - B * codes).colwise().norm().transpose();
  std::vector<Eigen::Index> worst(static_cast<std::size_t>(err.size()));
  std::iota(worst.begin(), worst.end(), Eigen::Index{0});
  std::stable_sort(worst.begin(), worst.end(), [&](Eigen::Index a, Eigen::Index b) { return err[a] > err[b]; });

  std::size_t next = 0;
  std::size_t resets = 0;
  for (Eigen::Index k : dead) {
    while (next < worst.size() && X.row(worst[next]).norm() == 0.0) ++next;
    if (next >= worst.size()) break;
    const Vector x = X.row(worst[next++]).transpose();
    B.col(k) = x / x.norm();
    ++resets;
  }
  return resets;
}

}  // namespace

DictLearnResult dict_learn(const FeatureSet& features, std::size_t atoms, const SparseCodingParams& p,
                           std::size_t outer_iters, std::uint64_t seed) {
  p.validate();
  if (atoms == 0) throw InvalidArgument("dict_learn: number of atoms must be positive");
  if (outer_iters == 0) throw InvalidArgument("dict_learn: outer_iters must be positive");

  std::mt19937_64 rng(seed);
  const RowMatrix& X = features.data();
  const auto T = X.rows();
  const auto K = static_cast<Eigen::Index>(atoms);

  Matrix B = initial_bases(features, atoms, rng);
  Matrix U = Matrix::Zero(K, T);
  std::vector<double> trace;
  std::size_t resets = 0;
  std::size_t unconverged = 0;

  for (std::size_t it = 0; it < outer_iters; ++it) {
    // Codes, warm started from the previous iterate.
    const LassoSolver solver{Dictionary(B), p};
    for (Eigen::Index i = 0; i < T; ++i) {
      const Vector warm = U.col(i);
      auto out = solver.try_solve(X.row(i).transpose(), &warm);
      if (!out.converged) ++unconverged;
      U.col(i) = out.code.u;
    }

    // Each column sees an isotropic quadratic A_kk ||b||^2 - 2 b'(...), so
    // projecting its unconstrained minimizer onto the unit ball is exact.
    const Matrix A = U * U.transpose();
    const Matrix E = X.transpose() * U.transpose();
    for (int sweep = 0; sweep < kColumnSweeps; ++sweep) {
      for (Eigen::Index k = 0; k < K; ++k) {
        const double akk = A(k, k);
        if (akk <= 0.0) continue;
        Vector b = B.col(k) + (E.col(k) - B * A.col(k)) / akk;
        const double n = b.norm();
        if (n > 1.0) b /= n;
        B.col(k) = b;
      }
    }
    resets += reset_dead_atoms(X, U, B, A.diagonal());

    const double fit = (X.transpose() - B * U).colwise().squaredNorm().sum() / p.sigma2;
    const double penalty = p.lambda * U.cwiseAbs().sum();
    trace.push_back(fit + penalty);
  }

  // Zero columns can only survive if there were no nonzero features to copy.
  for (Eigen::Index k = 0; k < K; ++k) {
    if (B.col(k).norm() == 0.0) {
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector v(B.rows());
      for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = normal(rng);
      B.col(k) = v / v.norm();
    }
  }

  DictLearnResult result{Dictionary(std::move(B)), std::move(trace), resets, unconverged,
                         static_cast<std::size_t>(T) < atoms};
  return result;
}

}  // namespace fvkit
