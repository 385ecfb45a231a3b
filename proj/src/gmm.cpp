#include "fvkit/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fvkit/errors.hpp"

namespace fvkit {

namespace {

constexpr double kCollapseWeight = 1e-8;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// exp(v - lse) with subnormal results flushed to zero. Responsibilities that
// small carry no weight, and subnormal operands slow the matrix products
// downstream by an order of magnitude.
template <typename Row>
void normalize_log_row(Row&& row, double lse) {
  row = (row.array() - lse).exp().unaryExpr([](double v) { return v < std::numeric_limits<double>::min() ? 0.0 : v; });
}

double log_sum_exp(const Eigen::Ref<const Vector>& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

// log P(k) + log N(x_i; mu_k, Sigma_k) for every row and component. Data and
// means are shifted by a common center before the expanded quadratic form.
RowMatrix log_joint(const RowMatrix& X, const Vector& weights, const RowMatrix& means, const RowMatrix& vars) {
  const Eigen::RowVectorXd center = means.colwise().mean();
  const RowMatrix Xc = X.rowwise() - center;
  const RowMatrix Mc = means.rowwise() - center;
  const RowMatrix prec = vars.cwiseInverse();

  const Vector const_k = weights.array().log() - 0.5 * (X.cols() * kLog2Pi + vars.array().log().rowwise().sum()) -
                         0.5 * (Mc.array().square() * prec.array()).rowwise().sum();
  RowMatrix out = -0.5 * (Xc.array().square().matrix() * prec.transpose());
  out.noalias() += Xc * (Mc.cwiseProduct(prec)).transpose();
  out.rowwise() += const_k.transpose();
  return out;
}

struct Moments {
  Vector count;   // m
  RowMatrix sum;  // m x d, weighted means
  RowMatrix sq;   // m x d, weighted squared deviations from those means
};

}  // namespace

double variance_floor_for(const FeatureSet& features) {
  const RowMatrix& X = features.data();
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const double mean_var = (X.rowwise() - mean).array().square().colwise().mean().mean();
  return std::max(1e-6 * mean_var, 1e-12);
}

Vector gmm_posteriors(const Eigen::Ref<const Vector>& x, const GmmModel& gmm) {
  if (static_cast<std::size_t>(x.size()) != gmm.dim()) throw DimensionError("gmm_posteriors: dimension mismatch");
  const auto m = static_cast<Eigen::Index>(gmm.components());
  Vector lj(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto mu = gmm.means().row(k).transpose();
    const auto var = gmm.variances().row(k).transpose();
    lj[k] = std::log(gmm.weights()[k]) -
            0.5 * (x.size() * kLog2Pi + var.array().log().sum() + ((x - mu).array().square() / var.array()).sum());
  }
  const double lse = log_sum_exp(lj);
  return (lj.array() - lse).exp();
}

RowMatrix gmm_posteriors_batch(const FeatureSet& features, const GmmModel& gmm, Vector* loglik) {
  if (features.dim() != gmm.dim()) throw DimensionError("gmm_posteriors: dimension mismatch");
  RowMatrix lj = log_joint(features.data(), gmm.weights(), gmm.means(), gmm.variances());
  if (loglik) loglik->resize(lj.rows());
  for (Eigen::Index i = 0; i < lj.rows(); ++i) {
    const double lse = log_sum_exp(lj.row(i).transpose());
    if (!std::isfinite(lse)) throw NumericalError("gmm: non-finite log-likelihood");
    normalize_log_row(lj.row(i), lse);
    if (loglik) (*loglik)[i] = lse;
  }
  return lj;
}

double gmm_log_likelihood(const FeatureSet& features, const GmmModel& gmm) {
  Vector ll;
  gmm_posteriors_batch(features, gmm, &ll);
  return ll.sum();
}

namespace {

RowMatrix kmeans_init(const RowMatrix& X, std::size_t m, std::size_t iters, std::mt19937_64& rng,
                      std::vector<Eigen::Index>& assign) {
  const auto T = X.rows();
  const auto M = static_cast<Eigen::Index>(m);
  RowMatrix C(M, X.cols());

  // k-means++ seeding: D^2 sampling.
  std::uniform_int_distribution<Eigen::Index> first(0, T - 1);
  C.row(0) = X.row(first(rng));
  Vector d2 = (X.rowwise() - C.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Eigen::Index k = 1; k < M; ++k) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double r = unif(rng) * total;
      pick = T - 1;
      for (Eigen::Index i = 0; i < T; ++i) {
        r -= d2[i];
        if (r <= 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    C.row(k) = X.row(pick);
    d2 = d2.cwiseMin((X.rowwise() - C.row(k)).rowwise().squaredNorm());
  }

  assign.assign(static_cast<std::size_t>(T), 0);
  const Vector xsq = X.rowwise().squaredNorm();
  for (std::size_t it = 0; it <= iters; ++it) {
    const Vector csq = C.rowwise().squaredNorm();
    RowMatrix dist = -2.0 * (X * C.transpose());
    dist.colwise() += xsq;
    dist.rowwise() += csq.transpose();
    Vector best(T);
    for (Eigen::Index i = 0; i < T; ++i) {
      Eigen::Index k;
      best[i] = dist.row(i).minCoeff(&k);
      assign[static_cast<std::size_t>(i)] = k;
    }
    if (it == iters) break;

    RowMatrix sum = RowMatrix::Zero(M, X.cols());
    Vector count = Vector::Zero(M);
    for (Eigen::Index i = 0; i < T; ++i) {
      sum.row(assign[static_cast<std::size_t>(i)]) += X.row(i);
      count[assign[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (Eigen::Index k = 0; k < M; ++k) {
      if (count[k] > 0.0) {
        C.row(k) = sum.row(k) / count[k];
      } else {
        // Empty cluster: move it to the point farthest from its centre.
        Eigen::Index far;
        best.maxCoeff(&far);
        C.row(k) = X.row(far);
        best[far] = 0.0;
      }
    }
  }
  return C;
}

// Per-component weighted sums. Second moments come from the expanded form on
// globally centred data: sum g (x - mu)^2 = sum g x^2 - (sum g x)^2 / sum g.
Moments moments(const RowMatrix& X, const RowMatrix& resp) {
  const Eigen::RowVectorXd center = X.colwise().mean();
  const RowMatrix Xc = X.rowwise() - center;
  Moments mo;
  mo.count = resp.colwise().sum().transpose();
  const Vector safe = mo.count.array().max(std::numeric_limits<double>::min());
  const RowMatrix s1 = resp.transpose() * Xc;
  mo.sq = (resp.transpose() * Xc.array().square().matrix()).array() - s1.array().square().colwise() / safe.array();
  mo.sum = (s1.array().colwise() / safe.array()).rowwise() + center.array();
  return mo;
}

}  // namespace

GmmFitResult gmm_fit_em(const FeatureSet& features, std::size_t components, const GmmFitOptions& options) {
  if (components == 0) throw InvalidArgument("gmm: number of components must be positive");
  if (features.size() < components) throw InvalidArgument("gmm: need at least as many features as components");
  if (options.max_iter == 0) throw InvalidArgument("gmm: max_iter must be positive");

  const RowMatrix& X = features.data();
  const auto T = X.rows();
  const auto d = X.cols();
  const auto M = static_cast<Eigen::Index>(components);
  const double floor = variance_floor_for(features);
  const Eigen::RowVectorXd global_mean = X.colwise().mean();
  const Eigen::RowVectorXd global_var =
      ((X.rowwise() - global_mean).array().square().colwise().mean()).max(floor).matrix();

  std::mt19937_64 rng(options.seed);
  std::vector<Eigen::Index> assign;
  RowMatrix means = kmeans_init(X, components, options.kmeans_iters, rng, assign);

  Vector weights = Vector::Zero(M);
  RowMatrix vars = RowMatrix::Zero(M, d);
  for (Eigen::Index i = 0; i < T; ++i) {
    const auto k = assign[static_cast<std::size_t>(i)];
    weights[k] += 1.0;
    vars.row(k) += (X.row(i) - means.row(k)).array().square().matrix();
  }
  for (Eigen::Index k = 0; k < M; ++k) {
    if (weights[k] >= 2.0) {
      vars.row(k) = (vars.row(k) / weights[k]).cwiseMax(floor);
    } else {
      vars.row(k) = global_var;
    }
    weights[k] = std::max(weights[k], 1.0);
  }
  weights /= weights.sum();

  auto e_step = [&](const Vector& w, const RowMatrix& mu, const RowMatrix& var, Vector& ll) {
    RowMatrix lj = log_joint(X, w, mu, var);
    ll.resize(T);
    for (Eigen::Index i = 0; i < T; ++i) {
      const double lse = log_sum_exp(lj.row(i).transpose());
      if (!std::isfinite(lse)) throw NumericalError("gmm: non-finite log-likelihood during EM");
      ll[i] = lse;
      normalize_log_row(lj.row(i), lse);
    }
    return lj;
  };

  GmmFitResult result{GmmModel(weights, means, vars, floor), {}, {}, false};
  Vector ll;
  RowMatrix resp = e_step(weights, means, vars, ll);
  result.loglik_trace.push_back(ll.mean());

  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    // M-step.
    const Moments mo = moments(X, resp);
    const Vector& count = mo.count;
    means = mo.sum;
    bool collapsed = false;
    for (Eigen::Index k = 0; k < M; ++k) {
      if (count[k] / static_cast<double>(T) < kCollapseWeight) {
        // Reseed at the worst explained feature.
        Eigen::Index worst;
        ll.minCoeff(&worst);
        means.row(k) = X.row(worst);
        vars.row(k) = global_var;
        weights[k] = 1.0 / static_cast<double>(T);
        ll[worst] = std::numeric_limits<double>::infinity();
        collapsed = true;
      } else {
        vars.row(k) = (mo.sq.row(k) / count[k]).cwiseMax(floor);
        weights[k] = count[k];
      }
    }
    weights /= weights.sum();
    if (collapsed) result.collapse_events.push_back(it);

    resp = e_step(weights, means, vars, ll);
    const double mean_ll = ll.mean();
    const double prev = result.loglik_trace.back();
    result.loglik_trace.push_back(mean_ll);
    if (!collapsed && mean_ll - prev < options.tol) {
      result.converged = true;
      break;
    }
  }
  result.model = GmmModel(std::move(weights), std::move(means), std::move(vars), floor);
  return result;
}

FisherVector gmmfv_pool(const FeatureSet& features, const GmmModel& gmm, bool mean_only) {
  if (features.dim() != gmm.dim()) throw DimensionError("gmmfv: feature dimension does not match GMM");
  const auto m = static_cast<Eigen::Index>(gmm.components());
  const auto d = static_cast<Eigen::Index>(gmm.dim());
  const RowMatrix resp = gmm_posteriors_batch(features, gmm);
  const RowMatrix sigma = gmm.variances().cwiseSqrt();

  FisherLayout layout{EncodingKind::GmmFvc, gmm.dim(), gmm.components(), mean_only};
  Vector out = Vector::Zero(static_cast<Eigen::Index>(layout.length()));
  for (Eigen::Index i = 0; i < resp.rows(); ++i) {
    const auto x = features.data().row(i);
    for (Eigen::Index k = 0; k < m; ++k) {
      const double g = resp(i, k);
      if (g == 0.0) continue;
      const Eigen::ArrayXd z = ((x - gmm.means().row(k)).array() / sigma.row(k).array()).transpose();
      out.segment(k * d, d).array() += g * z;
      if (!mean_only) out.segment((m + k) * d, d).array() += g * (z.square() - 1.0);
    }
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    const double w = gmm.weights()[k];
    out.segment(k * d, d) /= std::sqrt(w);
    if (!mean_only) out.segment((m + k) * d, d) /= std::sqrt(2.0 * w);
  }
  return FisherVector(std::move(out), layout);
}

FisherVector gmmfv_encode(const FeatureSet& features, const GmmModel& gmm, const NormalizationSpec& norm,
                          bool mean_only) {
  return normalize(gmmfv_pool(features, gmm, mean_only), norm);
}

}  // namespace fvkit
