#include "fvkit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "fvkit/errors.hpp"
#include "fvkit/sparse_coding.hpp"

namespace fvkit {

namespace {

const std::set<std::string> kFlagKeys = {"whiten", "no-power", "no-intra", "intra-first", "global-l2", "mean-only"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Turns a flat key=value file into "--key=value" arguments.
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream in(path);
  if (!std::filesystem::is_regular_file(path) || !in)
    throw NotFoundError("no such config file: '" + path + "'", "input-not-found");
  std::vector<std::string> args;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (kFlagKeys.count(key)) {
      if (value == "1" || value == "true" || value == "yes" || value == "on") args.push_back("--" + key);
    } else {
      args.push_back("--" + key + "=" + value);
    }
  }
  return args;
}

// Config values go right after the verb so that explicit flags, which come
// later, take precedence. Keys the chosen verb does not know are skipped, so
// one config file can serve every verb.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app) {
  std::string config;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config.empty() || rest.empty()) return rest;
  std::vector<std::string> out{rest.front()};
  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(rest.front());
  } catch (const CLI::OptionNotFound&) {
    return rest;
  }
  for (auto& a : config_args(config)) {
    const std::string name = a.substr(0, a.find('='));
    if (sub->get_option_no_throw(name) != nullptr) out.push_back(std::move(a));
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

std::vector<std::size_t> parse_list(const std::string& s, const char* what) {
  std::vector<std::size_t> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("bad value in --") + what + ": '" + item + "'");
    }
  }
  if (out.empty()) throw InvalidArgument(std::string("--") + what + " is empty");
  return out;
}

void add_list_input(CLI::App* cmd, cli::ListInput& in) {
  cmd->add_option("--list", in.list, "image list CSV (file,label,split)")->required();
  cmd->add_option("--pca", in.pca, "PCA model applied to every feature");
  cmd->add_option("--max-features", in.max_features, "cap on sampled training features (0: all)");
  cmd->add_option("--seed", in.seed, "random seed");
}

void report(std::ostream& err, const std::string& category, const std::string& message) {
  nlohmann::json j;
  j["error"] = category;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fvkit: sparse-coding and GMM Fisher vector toolkit", "fvkit"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value file; explicit flags win");

  cli::GenOptions gen;
  auto* g = app.add_subcommand("gen-synthetic", "generate a seeded synthetic image corpus");
  g->add_option("--out", gen.out_dir, "output directory")->required();
  g->add_option("--classes", gen.spec.classes);
  g->add_option("--train-per-class", gen.spec.train_per_class);
  g->add_option("--test-per-class", gen.spec.test_per_class);
  g->add_option("--features-per-image", gen.spec.features_per_image);
  g->add_option("--dim", gen.spec.dim);
  g->add_option("--latent-atoms", gen.spec.latent_atoms);
  g->add_option("--atoms-per-feature", gen.spec.atoms_per_feature);
  g->add_option("--class-atoms", gen.spec.class_atoms);
  g->add_option("--class-bias", gen.spec.class_bias);
  g->add_option("--noise", gen.spec.noise);
  g->add_option("--seed", gen.spec.seed);
  g->add_option("--config", config_path);

  cli::TrainOptions td, tg, tp;
  auto* d = app.add_subcommand("train-dict", "learn a sparse-coding dictionary");
  add_list_input(d, td.input);
  d->add_option("--out", td.out)->required();
  d->add_option("--codebook-size", td.codebook_size, "number of bases K");
  d->add_option("--lambda", td.lambda, "sparsity weight (default 0.15 mean||x||/sqrt(d))");
  d->add_option("--sigma2", td.sigma2);
  d->add_option("--iters", td.iters, "outer iterations (default 10)");
  d->add_option("--config", config_path);

  auto* gm = app.add_subcommand("train-gmm", "fit a diagonal GMM with EM");
  add_list_input(gm, tg.input);
  gm->add_option("--out", tg.out)->required();
  gm->add_option("--components", tg.components, "number of Gaussians m");
  gm->add_option("--iters", tg.iters, "maximum EM iterations (default 100)");
  gm->add_option("--config", config_path);

  auto* pc = app.add_subcommand("train-pca", "fit a PCA projection");
  add_list_input(pc, tp.input);
  pc->add_option("--out", tp.out)->required();
  pc->add_option("--pca-dim", tp.pca_dim, "output dimension");
  pc->add_flag("--whiten", tp.whiten);
  pc->add_option("--config", config_path);

  cli::EncodeOptions enc;
  bool no_power = false, no_intra = false, intra_first = false;
  auto* e = app.add_subcommand("encode", "encode every listed image");
  add_list_input(e, enc.input);
  e->add_option("--method", enc.method)->required()->check(CLI::IsMember({"scfvc", "gmmfvc"}));
  e->add_option("--model", enc.model, "dictionary or GMM model file")->required();
  e->add_option("--out", enc.out)->required();
  e->add_option("--lambda", enc.lambda);
  e->add_option("--sigma2", enc.sigma2);
  e->add_option("--alpha", enc.norm.power_alpha, "power normalization exponent");
  e->add_flag("--no-power", no_power);
  e->add_flag("--no-intra", no_intra);
  e->add_flag("--intra-first", intra_first, "intra-normalize before the power step");
  e->add_flag("--global-l2", enc.norm.global_l2);
  e->add_flag("--mean-only", enc.mean_only, "GMM: drop the variance block");
  e->add_option("--config", config_path);

  cli::ClassifyOptions cls;
  auto* c = app.add_subcommand("classify", "train one-vs-rest linear SVMs and report test metrics");
  c->add_option("--input", cls.inputs, "encoded set (repeatable)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  c->add_option("--out", cls.out, "metrics CSV")->required();
  c->add_option("--svm-out", cls.svm_out);
  c->add_option("-C,--C", cls.C);
  c->add_option("--epochs", cls.epochs);
  c->add_option("--seed", cls.seed);
  c->add_option("--config", config_path);

  cli::ResolutionOptions res;
  std::string dims = "100,200,500,1000", sweep = "100,200,500,1000";
  auto* r = app.add_subcommand("resolution", "partition-resolution experiment");
  r->add_option("--out", res.out_csv, "CSV output")->required();
  r->add_option("--svg", res.out_svg, "SVG plot output");
  r->add_option("--features", res.config.feature_file, "feature file (default: synthetic)");
  r->add_option("--samples", res.config.samples);
  r->add_option("--latent-atoms", res.config.latent_atoms);
  r->add_option("--atoms-per-feature", res.config.atoms_per_feature);
  r->add_option("--noise", res.config.noise);
  r->add_option("--dims", dims, "comma-separated dimensions");
  r->add_option("--components", res.config.fixed_components, "GMM size for the dimension sweep");
  r->add_option("--component-sweep", sweep, "comma-separated GMM sizes");
  r->add_option("--sweep-dim", res.config.sweep_dim);
  r->add_option("--codebook-size", res.config.dictionary_atoms);
  r->add_option("--lambda", res.config.lambda);
  r->add_option("--dict-iters", res.config.dict_iters);
  r->add_option("--gmm-iters", res.config.gmm_iters);
  r->add_option("--seed", res.config.seed);
  r->add_option("--config", config_path);

  try {
    std::vector<std::string> args = expand_config(raw_args, app);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp& ex) {
      app.exit(ex, out, err);
      return kExitOk;
    } catch (const CLI::CallForAllHelp& ex) {
      app.exit(ex, out, err);
      return kExitOk;
    } catch (const CLI::ParseError& ex) {
      report(err, "usage", ex.what());
      return kExitUsage;
    }

    if (g->parsed()) {
      cli::gen_synthetic(gen, out);
    } else if (d->parsed()) {
      cli::train_dict(td, out);
    } else if (gm->parsed()) {
      cli::train_gmm(tg, out);
    } else if (pc->parsed()) {
      cli::train_pca(tp, out);
    } else if (e->parsed()) {
      enc.norm.apply_power = !no_power;
      enc.norm.apply_intra = !no_intra;
      enc.norm.order = intra_first ? NormOrder::IntraThenPower : NormOrder::PowerThenIntra;
      enc.norm.validate();
      cli::encode(enc, out);
    } else if (c->parsed()) {
      cli::classify(cls, out);
    } else if (r->parsed()) {
      res.config.dims = parse_list(dims, "dims");
      res.config.component_sweep = parse_list(sweep, "component-sweep");
      cli::resolution(res, out);
    }
  } catch (const NotFoundError& ex) {
    report(err, ex.category(), ex.what());
    return kExitMissingInput;
  } catch (const NumericalError& ex) {
    report(err, ex.category(), ex.what());
    return kExitNumerical;
  } catch (const InvalidArgument& ex) {
    report(err, ex.category(), ex.what());
    return kExitUsage;
  } catch (const Error& ex) {
    report(err, ex.category(), ex.what());
    return kExitMissingInput;
  } catch (const std::filesystem::filesystem_error& ex) {
    report(err, "io", ex.what());
    return kExitMissingInput;
  } catch (const std::exception& ex) {
    report(err, "internal", ex.what());
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace fvkit
