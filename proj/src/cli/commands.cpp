#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "fvkit/classifier.hpp"
#include "fvkit/errors.hpp"
#include "fvkit/gmm.hpp"
#include "fvkit/io.hpp"
#include "fvkit/pca.hpp"
#include "fvkit/scfvc.hpp"
#include "fvkit/sparse_coding.hpp"

namespace fs = std::filesystem;

namespace fvkit::cli {

namespace {

struct ListEntry {
  std::string name;  // as written in the list
  std::string path;  // resolved against the list's directory
  int label = 0;
  bool test = false;
};

std::vector<ListEntry> read_list(const std::string& path) {
  std::ifstream in(path);
  if (!fs::is_regular_file(path) || !in) throw NotFoundError("no such image list: '" + path + "'", "input-not-found");
  const fs::path base = fs::path(path).parent_path();
  std::string line;
  if (!std::getline(in, line) || line.rfind("file,label,split", 0) != 0)
    throw FormatError("'" + path + "': expected header 'file,label,split'");
  std::vector<ListEntry> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string file, label, split;
    if (!std::getline(ls, file, ',') || !std::getline(ls, label, ',') || !std::getline(ls, split))
      throw FormatError(path + ":" + std::to_string(lineno) + ": malformed entry");
    if (split != "train" && split != "test")
      throw FormatError(path + ":" + std::to_string(lineno) + ": split must be 'train' or 'test'");
    ListEntry e;
    e.name = file;
    e.path = (base / file).string();
    try {
      e.label = std::stoi(label);
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": bad label '" + label + "'");
    }
    e.test = split == "test";
    out.push_back(std::move(e));
  }
  if (out.empty()) throw DataError("'" + path + "' lists no images");
  return out;
}

FeatureSet load_image(const ListEntry& e, const PcaModel* pca) {
  FeatureSet x = read_features(e.path);
  return pca ? pca_transform(x, *pca) : x;
}

// Training-split features, subsampled (seeded, order preserving) to at most
// max_features rows.
FeatureSet training_sample(const ListInput& in, std::ostream& log) {
  const auto entries = read_list(in.list);
  std::optional<PcaModel> pca;
  if (!in.pca.empty()) pca = load_pca(in.pca);

  std::vector<RowMatrix> blocks;
  Eigen::Index rows = 0, cols = -1;
  for (const auto& e : entries) {
    if (e.test) continue;
    FeatureSet x = load_image(e, pca ? &*pca : nullptr);
    if (cols >= 0 && static_cast<Eigen::Index>(x.dim()) != cols)
      throw DimensionError("'" + e.path + "' has dimension " + std::to_string(x.dim()) + ", expected " +
                           std::to_string(cols));
    cols = static_cast<Eigen::Index>(x.dim());
    rows += static_cast<Eigen::Index>(x.size());
    blocks.push_back(x.data());
  }
  if (blocks.empty()) throw DataError("'" + in.list + "' has no training images");

  RowMatrix all(rows, cols);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    all.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  FeatureSet sample(std::move(all));
  if (in.max_features > 0 && sample.size() > in.max_features) {
    std::vector<std::size_t> idx(sample.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(in.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(in.max_features);
    std::sort(idx.begin(), idx.end());
    sample = sample.select(idx);
  }
  log << "training sample: " << sample.size() << " features of dimension " << sample.dim() << '\n';
  return sample;
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

}  // namespace

void gen_synthetic(const GenOptions& o, std::ostream& log) {
  const SyntheticCorpus corpus = generate_corpus(o.spec);
  const fs::path root(o.out_dir);
  fs::create_directories(root / "features");

  std::ofstream list(root / "labels.csv", std::ios::trunc);
  if (!list) throw IoError("cannot write '" + (root / "labels.csv").string() + "'");
  list << "file,label,split\n";
  for (std::size_t i = 0; i < corpus.images.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "features/img_%05zu.fvk", i);
    const auto& img = corpus.images[i];
    write_features(img.features, (root / name).string());
    list << name << ',' << img.label << ',' << (img.test ? "test" : "train") << '\n';
  }
  list.close();
  if (!list) throw IoError("write to labels.csv failed");
  save_model(Dictionary(corpus.atoms), (root / "atoms.fvkm").string());
  log << "wrote " << corpus.images.size() << " images to " << root.string() << '\n';
}

namespace {

double resolve_lambda(double requested, const FeatureSet& sample) {
  return requested > 0.0 ? requested : default_lambda(sample);
}

}  // namespace

void train_dict(const TrainOptions& o, std::ostream& log) {
  const FeatureSet sample = training_sample(o.input, log);
  SparseCodingParams p;
  p.lambda = resolve_lambda(o.lambda, sample);
  p.sigma2 = o.sigma2;
  const auto result = dict_learn(sample, o.codebook_size, p, o.iters ? o.iters : 10, o.input.seed);
  ensure_parent(o.out);
  save_model(result.dictionary, o.out);
  log << "dictionary: K=" << o.codebook_size << " lambda=" << fmt(p.lambda, "%.9g")
      << " objective=" << fmt(result.objective_trace.back(), "%.9g") << " dead-atom resets=" << result.dead_atom_resets
      << " unconverged codes=" << result.unconverged_codes << '\n';
  if (result.undersampled) log << "warning: fewer training features than atoms\n";
}

void train_gmm(const TrainOptions& o, std::ostream& log) {
  const FeatureSet sample = training_sample(o.input, log);
  GmmFitOptions g;
  g.seed = o.input.seed;
  g.max_iter = o.iters ? o.iters : 100;
  const auto fit = gmm_fit_em(sample, o.components, g);
  ensure_parent(o.out);
  save_model(fit.model, o.out);
  log << "gmm: m=" << o.components << " mean log-likelihood=" << fmt(fit.loglik_trace.back(), "%.9g")
      << " iterations=" << fit.loglik_trace.size() - 1 << " collapse events=" << fit.collapse_events.size() << '\n';
}

void train_pca(const TrainOptions& o, std::ostream& log) {
  const FeatureSet sample = training_sample(o.input, log);
  const PcaModel model = pca_fit(sample, o.pca_dim, o.whiten);
  ensure_parent(o.out);
  save_model(model, o.out);
  log << "pca: " << model.in_dim() << " -> " << model.out_dim() << " effective rank " << model.effective_rank << '\n';
}

void encode(const EncodeOptions& o, std::ostream& log) {
  if (o.method != "scfvc" && o.method != "gmmfvc") throw InvalidArgument("unknown method '" + o.method + "'");
  const auto entries = read_list(o.input.list);
  std::optional<PcaModel> pca;
  if (!o.input.pca.empty()) pca = load_pca(o.input.pca);

  EncodedSet set;
  std::vector<Vector> rows;
  std::size_t unconverged = 0;

  auto collect = [&](const ListEntry& e, FisherVector fv) {
    set.layout = fv.layout;
    set.names.push_back(e.name);
    set.labels.push_back(e.label);
    set.test.push_back(e.test);
    rows.push_back(std::move(fv.values));
  };

  if (o.method == "scfvc") {
    const Dictionary dict = load_dictionary(o.model);
    SparseCodingParams p;
    p.sigma2 = o.sigma2;
    p.lambda = o.lambda > 0.0 ? o.lambda : default_lambda(training_sample(o.input, log));
    const LassoSolver solver(dict, p);
    for (const auto& e : entries) {
      const FeatureSet x = load_image(e, pca ? &*pca : nullptr);
      ScfvStats stats;
      collect(e, normalize(scfv_pool(x, solver, &stats), o.norm));
      unconverged += stats.unconverged;
    }
    log << "scfvc: lambda=" << fmt(p.lambda, "%.9g") << " unconverged codes=" << unconverged << '\n';
  } else {
    const GmmModel gmm = load_gmm(o.model);
    for (const auto& e : entries) collect(e, gmmfv_encode(load_image(e, pca ? &*pca : nullptr), gmm, o.norm, o.mean_only));
  }

  set.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(set.layout.length()));
  for (std::size_t i = 0; i < rows.size(); ++i) set.values.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  ensure_parent(o.out);
  save_model(set, o.out);
  log << "encoded " << set.size() << " images as " << set.layout.describe() << '\n';
}

void classify(const ClassifyOptions& o, std::ostream& log) {
  if (o.inputs.empty()) throw InvalidArgument("classify: no --input given");
  if (!o.svm_out.empty() && o.inputs.size() != 1)
    throw InvalidArgument("classify: --svm-out needs exactly one --input");

  std::ostringstream csv;
  csv << "input,method,dim,units,length,train,test,accuracy,map\n";
  for (const auto& path : o.inputs) {
    const EncodedSet set = load_encoded(path);
    const RowMatrix train = set.split_rows(false);
    const RowMatrix test = set.split_rows(true);
    const auto train_labels = set.split_labels(false);
    const auto test_labels = set.split_labels(true);
    if (train.rows() == 0 || test.rows() == 0) throw DataError("'" + path + "' needs both train and test images");

    SvmOptions so;
    so.C = o.C;
    so.max_epochs = o.epochs;
    so.seed = o.seed;
    const auto trained = svm_train(train, train_labels, so);
    const Prediction pred = svm_predict(trained.model, test);
    const double acc = evaluate(pred, trained.model.class_ids, test_labels, Metric::Accuracy);
    const double map = evaluate(pred, trained.model.class_ids, test_labels, Metric::MeanAveragePrecision);
    const char* method = set.layout.kind == EncodingKind::Scfvc ? "scfvc" : "gmmfvc";
    csv << fs::path(path).filename().string() << ',' << method << ',' << set.layout.dim << ',' << set.layout.units
        << ',' << set.layout.length() << ',' << train.rows() << ',' << test.rows() << ',' << fmt(acc) << ','
        << fmt(map) << '\n';
    log << path << ": " << method << " accuracy=" << fmt(acc) << " mAP=" << fmt(map) << '\n';
    if (!o.svm_out.empty()) {
      ensure_parent(o.svm_out);
      save_model(trained.model, o.svm_out);
    }
  }
  ensure_parent(o.out);
  std::ofstream out(o.out, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + o.out + "'");
  out << csv.str();
  out.close();
  if (!out) throw IoError("write to '" + o.out + "' failed");
}

void resolution(const ResolutionOptions& o, std::ostream& log) {
  const auto rows = resolution_experiment(o.config, &log);
  ensure_parent(o.out_csv);
  {
    std::ofstream out(o.out_csv, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + o.out_csv + "'");
    write_resolution_csv(rows, out);
    if (!out) throw IoError("write to '" + o.out_csv + "' failed");
  }
  if (!o.out_svg.empty()) {
    ensure_parent(o.out_svg);
    std::ofstream out(o.out_svg, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + o.out_svg + "'");
    out << resolution_svg(rows, o.config);
    if (!out) throw IoError("write to '" + o.out_svg + "' failed");
  }
}

}  // namespace fvkit::cli
