#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fvkit/classifier.hpp"
#include "fvkit/pca.hpp"
#include "fvkit/types.hpp"

namespace fvkit {

// Binary feature file, little endian:
//   "FVK1" | u32 version | u64 T | u64 d | T*d f32, row major
inline constexpr std::uint32_t kFeatureFileVersion = 1;

// Model files share one header:
//   "FVKM" | u32 version | u32 type tag | payload (f64 for real values)
inline constexpr std::uint32_t kModelFileVersion = 1;

enum class ModelType : std::uint32_t {
  Dictionary = 1,
  Gmm = 2,
  Pca = 3,
  Svm = 4,
  EncodedSet = 5,
};

// Encoded images of one run, with their labels and split.
struct EncodedSet {
  FisherLayout layout;
  std::vector<std::string> names;
  std::vector<int> labels;
  std::vector<bool> test;
  RowMatrix values;  // one encoded image per row

  std::size_t size() const { return names.size(); }
  // Rows (and labels) of the train or test split.
  RowMatrix split_rows(bool test_split) const;
  std::vector<int> split_labels(bool test_split) const;

  friend bool operator==(const EncodedSet&, const EncodedSet&) = default;
};

FeatureSet read_features(const std::string& path);
// Values are stored as f32; values not representable in f32 are rounded.
void write_features(const FeatureSet& features, const std::string& path);
// One feature per line, comma separated. Blank lines are skipped.
FeatureSet read_features_csv(const std::string& path);

void save_model(const Dictionary& dict, const std::string& path);
void save_model(const GmmModel& gmm, const std::string& path);
void save_model(const PcaModel& pca, const std::string& path);
void save_model(const SvmModel& svm, const std::string& path);
void save_model(const EncodedSet& set, const std::string& path);

Dictionary load_dictionary(const std::string& path);
GmmModel load_gmm(const std::string& path);
PcaModel load_pca(const std::string& path);
SvmModel load_svm(const std::string& path);
EncodedSet load_encoded(const std::string& path);

// Type tag of a model file, after checking magic and version.
ModelType peek_model_type(const std::string& path);

}  // namespace fvkit
