// Command-line front end: dataset generation, training, attack evaluation,
// defense experiments, invariance and fragmentation reports.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "treesym/datagen.hpp"
#include "treesym/dataset.hpp"
#include "treesym/defense.hpp"
#include "treesym/gbdt.hpp"
#include "treesym/harness.hpp"
#include "treesym/model_io.hpp"

namespace {

using namespace treesym;

struct CommonOpts {
  std::string data_path;
  std::string test_path;
  int n_features = 0;
  std::string image_shape;  // "HxW"
  std::string mode = "default";
  std::string attacks;
  std::string norm = "linf";
  int n_samples = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::string config_path;
  int n_threads = 0;
  long max_queries = 20000;
  bool no_inversion = false;
  std::string trace_path;
  // training knobs
  int n_rounds = 4;
  int max_depth = 6;
  double eta = 0.3;
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
};

std::optional<ImageShape> parse_shape(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto x = s.find('x');
  if (x == std::string::npos) {
    throw CLI::ValidationError("--image-shape", "expected HxW, e.g. 28x28");
  }
  ImageShape shape{std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  if (shape.height <= 0 || shape.width <= 0) {
    throw CLI::ValidationError("--image-shape", "dimensions must be positive");
  }
  return shape;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// --config files are structured text whose values override flags.
void apply_config_file(CommonOpts& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw std::runtime_error("cannot open config '" + o.config_path + "'");
  nlohmann::json j;
  in >> j;
  o.data_path = j.value("data", o.data_path);
  o.test_path = j.value("test", o.test_path);
  o.n_features = j.value("n_features", o.n_features);
  o.image_shape = j.value("image_shape", o.image_shape);
  o.mode = j.value("mode", o.mode);
  o.attacks = j.value("attacks", o.attacks);
  o.norm = j.value("norm", o.norm);
  o.n_samples = j.value("n_samples", o.n_samples);
  o.seed = j.value("seed", o.seed);
  o.out = j.value("out", o.out);
  o.format = j.value("format", o.format);
  o.n_threads = j.value("threads", o.n_threads);
  o.max_queries = j.value("max_queries", o.max_queries);
  o.n_rounds = j.value("n_rounds", o.n_rounds);
  o.max_depth = j.value("max_depth", o.max_depth);
  o.eta = j.value("eta", o.eta);
  o.lambda = j.value("lambda", o.lambda);
  o.gamma = j.value("gamma", o.gamma);
  o.min_child_weight = j.value("min_child_weight", o.min_child_weight);
}

void add_common_flags(CLI::App* cmd, CommonOpts& o, bool with_training) {
  cmd->add_option("--data", o.data_path, "train data file, or train,test pair");
  cmd->add_option("--test", o.test_path, "test data file");
  cmd->add_option("--n-features", o.n_features, "feature count of the data files");
  cmd->add_option("--image-shape", o.image_shape, "HxW when rows are images");
  cmd->add_option("--attack", o.attacks, "comma list: cube,lt,opt,signopt,hsja,oracle");
  cmd->add_option("--norm", o.norm, "l2|linf")->check(CLI::IsMember({"l2", "linf"}));
  cmd->add_option("--n-samples", o.n_samples, "evaluation prefix size");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--out", o.out, "output path");
  cmd->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--config", o.config_path, "JSON config overriding flags");
  cmd->add_option("--threads", o.n_threads, "attack worker pool size (0 = auto)");
  cmd->add_option("--max-queries", o.max_queries, "per-sample attack query budget");
  if (with_training) {
    cmd->add_option("--mode", o.mode, "default|zk-single|zk-two|pk-group")
        ->check(CLI::IsMember({"default", "zk-single", "zk-two", "pk-group"}));
    cmd->add_option("--n-rounds", o.n_rounds, "boosting rounds (trees per class)");
    cmd->add_option("--max-depth", o.max_depth, "tree depth limit");
    cmd->add_option("--eta", o.eta, "learning rate");
    cmd->add_option("--lambda", o.lambda, "L2 leaf regularization");
    cmd->add_option("--gamma", o.gamma, "minimum split gain");
    cmd->add_option("--min-child-weight", o.min_child_weight, "minimum child hessian");
  }
}

TrainConfig train_config(const CommonOpts& o) {
  TrainConfig cfg;
  cfg.n_rounds = o.n_rounds;
  cfg.max_depth = o.max_depth;
  cfg.eta = o.eta;
  cfg.lambda = o.lambda;
  cfg.gamma = o.gamma;
  cfg.min_child_weight = o.min_child_weight;
  cfg.seed = o.seed;
  return cfg;
}

attack::AttackConfig attack_config(const CommonOpts& o) {
  attack::AttackConfig cfg;
  cfg.norm = o.norm == "l2" ? attack::Norm::L2 : attack::Norm::Linf;
  cfg.max_queries = o.max_queries;
  cfg.seed = o.seed;
  return cfg;
}

struct LoadedPair {
  Dataset train;
  Dataset test;
};

// Resolves --data/--test (or a comma pair) into raw datasets with a shared
// label map inferred from the train file.
LoadedPair load_pair(const CommonOpts& o) {
  std::string train_path = o.data_path;
  std::string test_path = o.test_path;
  const auto comma = train_path.find(',');
  if (comma != std::string::npos && test_path.empty()) {
    test_path = train_path.substr(comma + 1);
    train_path = train_path.substr(0, comma);
  }
  if (train_path.empty() || test_path.empty()) {
    throw std::runtime_error("need --data <train> and --test <test> (or --data train,test)");
  }
  if (o.n_features <= 0) throw std::runtime_error("need --n-features");
  const auto shape = parse_shape(o.image_shape);
  const auto label_map = infer_label_map(train_path);
  LoadedPair pair;
  pair.train = load_libsvm(train_path, o.n_features, label_map, shape);
  pair.test = load_libsvm(test_path, o.n_features, label_map, shape);
  return pair;
}

void require_known_attacks(const std::vector<std::string>& names) {
  const auto& known = implemented_attacks();
  for (const std::string& name : names) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw std::runtime_error("unknown attack '" + name + "'");
    }
  }
}

ExperimentConfig experiment_config(const CommonOpts& o, const std::string& dataset_name) {
  ExperimentConfig cfg;
  cfg.dataset_name = dataset_name;
  cfg.train_cfg = train_config(o);
  cfg.mode = o.mode;
  cfg.attacks = split_list(o.attacks);
  require_known_attacks(cfg.attacks);
  cfg.attack_cfg = attack_config(o);
  cfg.n_eval_samples = o.n_samples;
  cfg.seed = o.seed;
  cfg.n_threads = o.n_threads;
  return cfg;
}

void write_reports(const CommonOpts& o, const std::vector<ExperimentReport>& reports) {
  if (o.out.empty()) {
    std::cout << reports_to_csv_text(reports);
  } else {
    emit_report(reports, o.format, o.out);
    std::cout << "wrote " << o.format << " report to " << o.out << "\n";
  }
}

std::string dataset_label(const CommonOpts& o) {
  std::filesystem::path p(o.data_path.substr(0, o.data_path.find(',')));
  return p.stem().string();
}

int cmd_gen_data(const std::string& name, std::uint64_t seed, const std::string& out_dir) {
  const SyntheticData data = make_synthetic(name, seed);
  std::filesystem::create_directories(out_dir);
  const std::string train_path = out_dir + "/" + name + "_train.libsvm";
  const std::string test_path = out_dir + "/" + name + "_test.libsvm";
  write_libsvm(data.train, data.class_to_raw, train_path);
  write_libsvm(data.test, data.class_to_raw, test_path);
  std::cout << "wrote " << train_path << " (" << data.train.n_rows() << " rows), "
            << test_path << " (" << data.test.n_rows() << " rows), "
            << data.train.n_features << " features\n";
  return 0;
}

int cmd_train(const CommonOpts& o) {
  LoadedPair pair = load_pair(o);
  const NormalizationSpec spec = fit_normalizer(pair.train);
  const Dataset train_n = apply_normalizer(spec, pair.train);
  const TrainConfig cfg = train_config(o);

  DefendedClassifier defended;
  if (o.mode == "default") {
    defended.model = train(train_n, cfg);
    defended.policy = ZeroKnowledgeInvert{};  // placeholder; saved without tag
  } else if (o.mode == "zk-single") {
    defended = train_zero_knowledge(train_n, cfg, ZkVariant::Single);
  } else if (o.mode == "zk-two") {
    defended = train_zero_knowledge(train_n, cfg, ZkVariant::TwoModels);
  } else {
    defended = train_perfect_knowledge(train_n, cfg);
  }
  defended.model.normalizer = spec;
  if (auto* two = std::get_if<ZeroKnowledgeTwoModels>(&defended.policy)) {
    two->inverted_model.normalizer = spec;
  }

  if (o.out.empty()) throw std::runtime_error("need --out <model.json>");
  std::ofstream out(o.out);
  if (!out) throw std::runtime_error("cannot write '" + o.out + "'");
  if (o.mode == "default") {
    out << serialize(defended.model);
  } else {
    out << defended_to_json(defended).dump(2) << "\n";
  }

  const Dataset test_n = apply_normalizer(spec, pair.test);
  const double acc = eval_default_accuracy(
      [&](const std::vector<double>& x) {
        if (o.mode == "default") return predict_label(defended.model, x);
        if (o.mode == "pk-group") return classify_perfect_knowledge(defended, x).decided;
        return classify_zero_knowledge(defended, x);
      },
      test_n, static_cast<int>(test_n.n_rows()));
  std::cout << "wrote model to " << o.out << "; test accuracy "
            << acc << " over " << test_n.n_rows() << " samples; "
            << count_split_conditions(defended.model) << " split conditions\n";
  return 0;
}

int cmd_attack(const CommonOpts& o, const std::string& model_path) {
  std::ifstream in(model_path);
  if (!in) throw std::runtime_error("cannot open model '" + model_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const nlohmann::json j = nlohmann::json::parse(buf.str());
  const DefendedClassifier defended = defended_from_json(j);
  const Ensemble& model = defended.model;

  if (o.test_path.empty() && o.data_path.empty()) {
    throw std::runtime_error("need --data/--test with samples to attack");
  }
  const std::string path = o.test_path.empty() ? o.data_path : o.test_path;
  const auto label_map = infer_label_map(path);
  Dataset test = load_libsvm(path, model.n_features, label_map,
                             defended.image_shape);
  if (model.normalizer.n_features() == model.n_features) {
    test = apply_normalizer(model.normalizer, test);
  }

  const int n = std::min<int>(o.n_samples, static_cast<int>(test.n_rows()));
  LabelFn fn = attack::ensemble_label_fn(model);
  ExperimentReport rep;
  rep.dataset = std::filesystem::path(path).stem().string();
  rep.classifier = "raw-model";
  rep.n_eval = n;
  rep.default_accuracy = eval_default_accuracy(fn, test, n);
  rep.split_count = count_split_conditions(model);

  require_known_attacks(split_list(o.attacks));
  attack::AttackConfig acfg = attack_config(o);
  std::ofstream trace_out;
  std::mutex trace_mutex;
  if (!o.trace_path.empty()) {
    trace_out.open(o.trace_path);
    if (!trace_out) throw std::runtime_error("cannot write trace '" + o.trace_path + "'");
    acfg.trace = [&](const attack::TraceRecord& rec) {
      std::lock_guard<std::mutex> lock(trace_mutex);
      trace_out << "{\"sample_id\":" << rec.sample_id << ",\"attack\":\""
                << rec.attack << "\",\"iteration\":" << rec.iteration
                << ",\"best_norm\":" << rec.best_norm << ",\"queries\":"
                << rec.queries << "}\n";
    };
  }
  for (const std::string& name : split_list(o.attacks)) {
    rep.attacks.push_back(eval_adversarial(
        fn, make_attack_runner(name, acfg, fn, &model), test, n, o.seed,
        o.n_threads));
  }
  write_reports(o, {rep});
  return 0;
}

int cmd_defend_eval(const CommonOpts& o) {
  LoadedPair pair = load_pair(o);
  const NormalizationSpec spec = fit_normalizer(pair.train);
  const Dataset train_n = apply_normalizer(spec, pair.train);
  const Dataset test_n = apply_normalizer(spec, pair.test);
  ExperimentConfig cfg = experiment_config(o, dataset_label(o));

  std::vector<ExperimentReport> reports;
  if (o.no_inversion) {
    reports.push_back(run_no_inversion_experiment(cfg, train_n, test_n));
  } else if (o.mode == "pk-group") {
    reports = run_perfect_knowledge_experiment(cfg, train_n, test_n);
  } else {
    if (cfg.mode == "default") cfg.mode = "zk-single";
    reports = run_zero_knowledge_experiment(cfg, train_n, test_n);
  }
  write_reports(o, reports);
  return 0;
}

int cmd_invariance(const CommonOpts& o) {
  LoadedPair pair = load_pair(o);
  const NormalizationSpec spec = fit_normalizer(pair.train);
  const Dataset train_n = apply_normalizer(spec, pair.train);
  const Dataset test_n = apply_normalizer(spec, pair.test);
  const Ensemble model =
      train(augment(train_n, {Symmetry::Id, Symmetry::Invert}), train_config(o));
  const InvarianceReport rep = invariance_report(model, test_n);
  std::cout << "agree " << rep.agree << " disagree " << rep.disagree << " of "
            << test_n.n_rows() << " test samples\n";
  return 0;
}

int cmd_fragmentation(const CommonOpts& o) {
  LoadedPair pair = load_pair(o);
  const NormalizationSpec spec = fit_normalizer(pair.train);
  const Dataset train_n = apply_normalizer(spec, pair.train);
  const TrainConfig cfg = train_config(o);
  const Ensemble dflt = train(train_n, cfg);
  const Ensemble aug =
      train(augment(train_n, {Symmetry::Id, Symmetry::Invert}), cfg);
  const auto [d, a] = run_fragmentation_report(dflt, aug);
  std::cout << "split conditions: default " << d << ", augmented " << a << "\n";
  return 0;
}

int cmd_report(const std::string& in_path, const CommonOpts& o) {
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("cannot open report '" + in_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto reports = reports_from_json_text(buf.str());
  write_reports(o, reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient-boosted tree training, adversarial attacks, and symmetry defenses"};
  app.require_subcommand(1);

  CommonOpts opts;

  std::string gen_name = "bc10";
  std::string gen_out_dir = ".";
  auto* gen = app.add_subcommand("gen-data", "write a synthetic benchmark dataset");
  gen->add_option("--dataset", gen_name, "bc10|dia8|fmnist4")
      ->check(CLI::IsMember({"bc10", "dia8", "fmnist4"}));
  gen->add_option("--seed", opts.seed, "generator seed");
  gen->add_option("--out-dir", gen_out_dir, "output directory");

  auto* train_cmd = app.add_subcommand("train", "train a model and write it to disk");
  add_common_flags(train_cmd, opts, true);

  std::string model_path;
  auto* attack_cmd =
      app.add_subcommand("attack", "attack a saved model's raw ensemble");
  attack_cmd->add_option("--model", model_path, "model file")->required();
  attack_cmd->add_option("--trace", opts.trace_path,
                         "write per-iteration attack records (JSON lines)");
  add_common_flags(attack_cmd, opts, false);

  auto* defend_cmd =
      app.add_subcommand("defend-eval", "train and evaluate a defense end to end");
  add_common_flags(defend_cmd, opts, true);
  defend_cmd->add_flag("--no-inversion", opts.no_inversion,
                       "attack and score the raw augmented model");

  auto* inv_cmd = app.add_subcommand("invariance", "agree/disagree counts of original vs inverted test samples");
  add_common_flags(inv_cmd, opts, true);

  auto* frag_cmd = app.add_subcommand("fragmentation", "split-condition counts, default vs augmented");
  add_common_flags(frag_cmd, opts, true);

  std::string report_in;
  auto* report_cmd = app.add_subcommand("report", "convert a JSON report to csv/json");
  report_cmd->add_option("--in", report_in, "JSON report file")->required();
  report_cmd->add_option("--out", opts.out, "output path");
  report_cmd->add_option("--format", opts.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    apply_config_file(opts);
    if (gen->parsed()) return cmd_gen_data(gen_name, opts.seed, gen_out_dir);
    if (train_cmd->parsed()) return cmd_train(opts);
    if (attack_cmd->parsed()) return cmd_attack(opts, model_path);
    if (defend_cmd->parsed()) return cmd_defend_eval(opts);
    if (inv_cmd->parsed()) return cmd_invariance(opts);
    if (frag_cmd->parsed()) return cmd_fragmentation(opts);
    if (report_cmd->parsed()) return cmd_report(report_in, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
