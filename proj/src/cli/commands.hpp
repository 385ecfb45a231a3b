#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fvkit/classifier.hpp"
#include "fvkit/partition.hpp"
#include "fvkit/pooling.hpp"
#include "fvkit/synthetic.hpp"

namespace fvkit::cli {

struct GenOptions {
  SyntheticSpec spec;
  std::string out_dir;
};

// Options shared by every command that reads an image list.
struct ListInput {
  std::string list;
  std::string pca;  // optional PCA model applied to every feature
  std::size_t max_features = 20000;
  std::uint64_t seed = 0;
};

struct TrainOptions {
  ListInput input;
  std::string out;
  std::size_t codebook_size = 100;
  std::size_t components = 100;
  std::size_t pca_dim = 64;
  bool whiten = false;
  double lambda = 0.0;  // 0: default_lambda of the training sample
  double sigma2 = 1.0;
  std::size_t iters = 0;  // 0: per-model default
};

struct EncodeOptions {
  ListInput input;
  std::string method;  // scfvc | gmmfvc
  std::string model;
  std::string out;
  double lambda = 0.0;
  double sigma2 = 1.0;
  NormalizationSpec norm;
  bool mean_only = false;
};

struct ClassifyOptions {
  std::vector<std::string> inputs;
  std::string out;
  std::string svm_out;
  double C = 1.0;
  std::size_t epochs = SvmOptions{}.max_epochs;
  std::uint64_t seed = 0;
};

struct ResolutionOptions {
  ResolutionConfig config;
  std::string out_csv;
  std::string out_svg;
};

void gen_synthetic(const GenOptions& o, std::ostream& log);
void train_dict(const TrainOptions& o, std::ostream& log);
void train_gmm(const TrainOptions& o, std::ostream& log);
void train_pca(const TrainOptions& o, std::ostream& log);
void encode(const EncodeOptions& o, std::ostream& log);
void classify(const ClassifyOptions& o, std::ostream& log);
void resolution(const ResolutionOptions& o, std::ostream& log);

std::string resolution_svg(const std::vector<ResolutionRow>& rows, const ResolutionConfig& config);

}  // namespace fvkit::cli
