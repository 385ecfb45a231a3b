#include "fvkit/partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "fvkit/gmm.hpp"
#include "fvkit/io.hpp"
#include "fvkit/pca.hpp"
#include "fvkit/synthetic.hpp"

namespace fvkit {

double partition_resolution_gmm(const FeatureSet& features, const GmmModel& gmm) {
  if (features.dim() != gmm.dim()) throw DimensionError("partition: feature dimension does not match GMM");
  const RowMatrix& X = features.data();
  const RowMatrix& M = gmm.means();

  // Expanded distances locate the nearest mean; the reported distance is
  // recomputed directly.
  RowMatrix dist = -2.0 * (X * M.transpose());
  dist.colwise() += X.rowwise().squaredNorm();
  dist.rowwise() += M.rowwise().squaredNorm().transpose();

  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::Index k;
    dist.row(i).minCoeff(&k);
    double best = (X.row(i) - M.row(k)).norm();
    // Near-ties may be misordered by the expansion.
    for (Eigen::Index j = 0; j < M.rows(); ++j) {
      if (j != k && dist(i, j) <= dist(i, k) + 1e-9 * (1.0 + std::abs(dist(i, k))))
        best = std::min(best, (X.row(i) - M.row(j)).norm());
    }
    total += best;
  }
  return total / static_cast<double>(X.rows());
}

double partition_resolution_sc(const FeatureSet& features, const Dictionary& dict, const SparseCodingParams& p) {
  if (features.dim() != dict.dim()) throw DimensionError("partition: feature dimension does not match dictionary");
  const LassoSolver solver(dict, p);
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const Vector x = features.row(i).transpose();
    auto out = solver.try_solve(x);
    if (!out.converged) {
      throw ConvergenceError("partition: lasso did not converge on row " + std::to_string(i), std::move(out.code),
                             i);
    }
    total += (x - dict.bases() * out.code.u).norm();
  }
  return total / static_cast<double>(features.size());
}

void ResolutionConfig::validate() const {
  if (dims.empty() || component_sweep.empty()) throw InvalidArgument("resolution: empty sweep");
  if (fixed_components == 0 || dictionary_atoms == 0 || sweep_dim == 0)
    throw InvalidArgument("resolution: sizes must be positive");
  if (feature_file.empty() && (samples == 0 || latent_atoms == 0))
    throw InvalidArgument("resolution: synthetic source needs samples and latent atoms");
  if (lambda < 0.0) throw InvalidArgument("resolution: lambda must be >= 0");
}

std::vector<ResolutionRow> resolution_experiment(const ResolutionConfig& config, std::ostream* log) {
  config.validate();
  std::vector<std::size_t> all_dims = config.dims;
  all_dims.push_back(config.sweep_dim);
  const std::size_t max_dim = *std::max_element(all_dims.begin(), all_dims.end());

  const FeatureSet source =
      config.feature_file.empty()
          ? generate_features(config.samples, max_dim, config.latent_atoms, config.atoms_per_feature, config.noise,
                              config.seed)
          : read_features(config.feature_file);
  if (source.dim() < max_dim)
    throw InvalidArgument("resolution: source features have dimension " + std::to_string(source.dim()) +
                          " < requested " + std::to_string(max_dim));

  const PcaModel pca = pca_fit(source, max_dim);
  auto reduce = [&](std::size_t dim) {
    PcaModel sub = pca;
    sub.projection = pca.projection.leftCols(static_cast<Eigen::Index>(dim));
    sub.eigenvalues = pca.eigenvalues.head(static_cast<Eigen::Index>(dim));
    return pca_transform(source, sub);
  };

  GmmFitOptions gopt;
  gopt.max_iter = config.gmm_iters;
  gopt.seed = config.seed;

  std::vector<ResolutionRow> rows;
  auto add_gmm = [&](const FeatureSet& X, std::size_t m, std::size_t dim) {
    for (const auto& r : rows)
      if (r.model == "gmm" && r.param == m && r.dim == dim) return;
    const auto fit = gmm_fit_em(X, m, gopt);
    const double d = partition_resolution_gmm(X, fit.model);
    rows.push_back({"gmm", m, dim, d});
    if (log) *log << "gmm m=" << m << " dim=" << dim << " d=" << d << '\n';
  };

  for (std::size_t dim : config.dims) add_gmm(reduce(dim), config.fixed_components, dim);

  const FeatureSet X = reduce(config.sweep_dim);
  for (std::size_t m : config.component_sweep) add_gmm(X, m, config.sweep_dim);

  SparseCodingParams sp;
  sp.lambda = config.lambda > 0.0 ? config.lambda : default_lambda(X);
  const auto learned = dict_learn(X, config.dictionary_atoms, sp, config.dict_iters, config.seed);
  const double dsc = partition_resolution_sc(X, learned.dictionary, sp);
  rows.push_back({"sc", config.dictionary_atoms, config.sweep_dim, dsc});
  if (log) *log << "sc K=" << config.dictionary_atoms << " dim=" << config.sweep_dim << " d=" << dsc << '\n';
  return rows;
}

void write_resolution_csv(const std::vector<ResolutionRow>& rows, std::ostream& out) {
  out << "model,param,dim,d\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.d);
    out << r.model << ',' << r.param << ',' << r.dim << ',' << buf << '\n';
  }
}

std::vector<ResolutionRow> read_resolution_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "model,param,dim,d") throw FormatError("resolution csv: bad header");
  std::vector<ResolutionRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string model, param, dim, d;
    if (!std::getline(ls, model, ',') || !std::getline(ls, param, ',') || !std::getline(ls, dim, ',') ||
        !std::getline(ls, d))
      throw FormatError("resolution csv: malformed row '" + line + "'");
    try {
      rows.push_back({model, std::stoul(param), std::stoul(dim), std::stod(d)});
    } catch (const std::exception&) {
      throw FormatError("resolution csv: malformed row '" + line + "'");
    }
  }
  return rows;
}

}  // namespace fvkit
