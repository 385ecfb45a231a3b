#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fvkit/errors.hpp"
#include "fvkit/types.hpp"

namespace fvkit {

enum class LassoMethod { CoordinateDescent, FeatureSign };

// Parameters of  F(u) = (1/sigma2) * ||x - B u||^2 + lambda * ||u||_1.
struct SparseCodingParams {
  double lambda = 0.1;
  double sigma2 = 1.0;
  std::size_t max_iter = 20000;
  // Bound on the KKT residual (in units of dF/du) accepted as converged.
  double tol = 1e-9;
  LassoMethod method = LassoMethod::CoordinateDescent;

  void validate() const;
};

// Thrown when a solver exhausts max_iter. Carries the last iterate so callers
// may still use it.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, SparseCode last, std::size_t row = kNoRow)
      : NumericalError(what), last_(std::move(last)), row_(row) {}
  const char* category() const noexcept override { return "convergence"; }

  static constexpr std::size_t kNoRow = static_cast<std::size_t>(-1);
  const SparseCode& last_iterate() const { return last_; }
  double kkt_residual() const { return last_.kkt_residual; }
  std::size_t row() const { return row_; }

 private:
  SparseCode last_;
  std::size_t row_;
};

double lasso_objective(const Eigen::Ref<const Vector>& x, const Dictionary& dict, const Eigen::Ref<const Vector>& u,
                       const SparseCodingParams& p);

// Largest violation of the lasso optimality conditions at u.
double lasso_kkt_residual(const Eigen::Ref<const Vector>& x, const Dictionary& dict,
                          const Eigen::Ref<const Vector>& u, const SparseCodingParams& p);

// Default sparsity weight: 0.15 * mean(||x||_2) / sqrt(d).
double default_lambda(const FeatureSet& features);

// Lasso inference against a fixed dictionary. Caches the Gram matrix so that
// many features can be coded against the same bases.
class LassoSolver {
 public:
  LassoSolver(const Dictionary& dict, SparseCodingParams params);

  struct Outcome {
    SparseCode code;
    bool converged = false;
  };

  // Throws ConvergenceError when max_iter is exhausted.
  SparseCode solve(const Eigen::Ref<const Vector>& x) const;
  // Never throws on non-convergence. `warm` (coordinate descent only) seeds
  // the iterate; the returned objective is never above the warm start's.
  Outcome try_solve(const Eigen::Ref<const Vector>& x, const Vector* warm = nullptr) const;

  const SparseCodingParams& params() const { return params_; }
  const Matrix& bases() const { return bases_; }
  const Matrix& gram() const { return gram_; }

 private:
  Outcome coordinate_descent(const Vector& x, const Vector& c, const Vector* warm) const;
  Outcome feature_sign(const Vector& x, const Vector& c) const;

  Matrix bases_;
  Matrix gram_;
  SparseCodingParams params_;
};

SparseCode lasso_solve(const Eigen::Ref<const Vector>& x, const Dictionary& dict, const SparseCodingParams& p);

// One code per row of X. The first failing row is reported through
// ConvergenceError::row().
std::vector<SparseCode> lasso_solve_batch(const FeatureSet& features, const Dictionary& dict,
                                          const SparseCodingParams& p);

// Greedy orthogonal matching pursuit with at most k_max atoms. Atoms are
// ranked by |b_k^T r| / ||b_k||; the lowest index wins ties.
SparseCode omp_solve(const Eigen::Ref<const Vector>& x, const Dictionary& dict, std::size_t k_max);

struct DictLearnResult {
  Dictionary dictionary;
  // Sum over features of F(u_i; B) after every outer iteration.
  std::vector<double> objective_trace;
  std::size_t dead_atom_resets = 0;
  std::size_t unconverged_codes = 0;
  bool undersampled = false;  // T < K
};

// Alternating minimization: lasso codes (warm started), then a projected
// block-coordinate update of each column on the unit ball.
DictLearnResult dict_learn(const FeatureSet& features, std::size_t atoms, const SparseCodingParams& p,
                           std::size_t outer_iters, std::uint64_t seed);

}  // namespace fvkit
