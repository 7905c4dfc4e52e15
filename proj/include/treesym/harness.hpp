#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "treesym/attack/common.hpp"
#include "treesym/attack/cube.hpp"
#include "treesym/attack/hsja.hpp"
#include "treesym/attack/lt.hpp"
#include "treesym/attack/opt.hpp"
#include "treesym/attack/oracle.hpp"
#include "treesym/dataset.hpp"
#include "treesym/defense.hpp"
#include "treesym/gbdt.hpp"

namespace treesym {

inline const std::vector<std::string>& implemented_attacks() {
  static const std::vector<std::string> names = {"cube", "lt", "opt",
                                                 "signopt", "hsja", "oracle"};
  return names;
}

/// Per-attack evaluation block. `adversarial_accuracy` counts survivors
/// (attack failed, errored, or produced a point the evaluated classifier
/// still gets right) over the correctly classified originals; perturbation
/// means cover only points that genuinely misclassify after the re-check.
struct AttackEval {
  std::string attack;
  double adversarial_accuracy = 1.0;
  std::optional<double> mean_l2;
  std::optional<double> mean_linf;
  int n_attacked = 0;
  int n_success = 0;  // genuinely misclassifying after re-check
  int n_invalid = 0;  // claimed successful but re-check classifies correctly
  int n_failed = 0;
  int n_errors = 0;

  bool operator==(const AttackEval&) const = default;
};

struct ExperimentReport {
  std::string dataset;
  std::string classifier;
  double default_accuracy = 0.0;
  int n_eval = 0;
  std::vector<AttackEval> attacks;
  std::optional<std::pair<long, long>> invariance;  // (agree, disagree)
  std::optional<long long> split_count;
  std::optional<double> agreed_fraction;  // group vote only
  std::map<std::string, double> wall_time_s;

  bool operator==(const ExperimentReport&) const = default;
};

struct ExperimentConfig {
  std::string dataset_name;
  std::string train_path;
  std::string test_path;
  int n_features = 0;
  std::map<long, int> label_map;  // empty -> inferred from the train file
  std::optional<ImageShape> image_shape;
  TrainConfig train_cfg;
  std::string mode = "default";  // default | zk-single | zk-two | pk-group
  std::vector<std::string> attacks;
  attack::AttackConfig attack_cfg;
  int n_eval_samples = 100;
  std::uint64_t seed = 0;
  int n_threads = 0;  // 0 -> hardware concurrency, capped at 20
};

using LabelFn = attack::LabelFn;

/// Fraction of the first n test samples the classifier labels correctly.
inline double eval_default_accuracy(const LabelFn& classify, const Dataset& test,
                                    int n) {
  if (n <= 0 || static_cast<std::size_t>(n) > test.n_rows()) {
    throw std::invalid_argument("eval_default_accuracy: n out of range");
  }
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    if (classify(test.row_vec(i)) == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / n;
}

/// A named attack bound to its target classifier; the harness supplies the
/// start point, label, a per-sample seed, and the sample index (echoed into
/// trace records).
struct AttackRunner {
  std::string name;
  std::function<attack::AttackResult(const std::vector<double>&, int,
                                     std::uint64_t, int)>
      run;
};

/// Builds a runner for one of the implemented attacks. White-box attacks
/// (lt, oracle, cube's margin mode) need the target ensemble; the rest run
/// against the label function alone.
inline AttackRunner make_attack_runner(const std::string& name,
                                       const attack::AttackConfig& base,
                                       LabelFn target,
                                       const Ensemble* white_box = nullptr) {
  using attack::AttackConfig;
  using attack::AttackResult;
  AttackRunner runner;
  runner.name = name;
  auto with_seed = [base](std::uint64_t seed, int sample) {
    AttackConfig c = base;
    c.seed = seed;
    c.sample_id = sample;
    return c;
  };
  if (name == "cube") {
    runner.run = [=](const std::vector<double>& x0, int y0, std::uint64_t seed,
                     int sample) {
      return attack::cube_attack(target, x0, y0, with_seed(seed, sample), white_box);
    };
  } else if (name == "lt") {
    if (!white_box) throw std::invalid_argument("lt attack needs the ensemble");
    runner.run = [=](const std::vector<double>& x0, int y0, std::uint64_t seed,
                     int sample) {
      return attack::lt_attack(*white_box, x0, y0, with_seed(seed, sample));
    };
  } else if (name == "opt") {
    runner.run = [=](const std::vector<double>& x0, int y0, std::uint64_t seed,
                     int sample) {
      return attack::opt_attack(target, x0, y0, with_seed(seed, sample));
    };
  } else if (name == "signopt") {
    runner.run = [=](const std::vector<double>& x0, int y0, std::uint64_t seed,
                     int sample) {
      return attack::signopt_attack(target, x0, y0, with_seed(seed, sample));
    };
  } else if (name == "hsja") {
    runner.run = [=](const std::vector<double>& x0, int y0, std::uint64_t seed,
                     int sample) {
      return attack::hsja_attack(target, x0, y0, with_seed(seed, sample));
    };
  } else if (name == "oracle") {
    if (!white_box) throw std::invalid_argument("oracle needs the ensemble");
    runner.run = [=](const std::vector<double>& x0, int y0, std::uint64_t seed,
                     int sample) {
      return attack::exact_oracle(*white_box, x0, y0, with_seed(seed, sample));
    };
  } else {
    throw std::invalid_argument("unknown attack '" + name + "'");
  }
  return runner;
}

namespace detail {

inline std::uint64_t per_sample_seed(std::uint64_t base, int sample) {
  // splitmix64 step keeps per-sample streams decorrelated and scheduling
  // independent.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (sample + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(20u, hw == 0 ? 1u : hw));
}

}  // namespace detail

/// Runs one attack over the first n test samples. Samples the evaluated
/// classifier gets wrong are skipped; each attacked sample is re-checked
/// through the same evaluated classifier before its norm can enter a mean.
/// `start_transform`, when set, maps a test row to the attack's start point
/// (used for symmetry-transformed starts); accuracy bookkeeping follows the
/// transformed point.
inline AttackEval eval_adversarial(
    const LabelFn& eval_classify, const AttackRunner& attack,
    const Dataset& test, int n, std::uint64_t seed, int n_threads = 0,
    const std::function<std::vector<double>(const std::vector<double>&)>&
        start_transform = nullptr) {
  if (n <= 0 || static_cast<std::size_t>(n) > test.n_rows()) {
    throw std::invalid_argument("eval_adversarial: n out of range");
  }

  enum class Outcome { Skipped, Survived, Invalid, Misclassified, Failed, Error };
  struct PerSample {
    Outcome outcome = Outcome::Skipped;
    double l2 = 0.0;
    double linf = 0.0;
  };
  std::vector<PerSample> results(n);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      std::vector<double> x0 = test.row_vec(i);
      if (start_transform) x0 = start_transform(x0);
      const int y0 = test.labels[i];
      PerSample& out = results[i];
      if (eval_classify(x0) != y0) {
        out.outcome = Outcome::Skipped;
        continue;
      }
      try {
        const attack::AttackResult r =
            attack.run(x0, y0, detail::per_sample_seed(seed, i), i);
        if (!r.success || !r.adversarial) {
          out.outcome = Outcome::Failed;
          continue;
        }
        if (eval_classify(*r.adversarial) == y0) {
          out.outcome = Outcome::Invalid;
        } else {
          out.outcome = Outcome::Misclassified;
          out.l2 = r.l2;
          out.linf = r.linf;
        }
      } catch (const std::exception&) {
        out.outcome = Outcome::Error;
      }
    }
  };

  const int n_workers = std::min(detail::resolve_threads(n_threads), n);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  AttackEval eval;
  eval.attack = attack.name;
  double l2_sum = 0.0, linf_sum = 0.0;
  int survive = 0;
  for (const PerSample& r : results) {
    switch (r.outcome) {
      case Outcome::Skipped:
        break;
      case Outcome::Failed:
        ++eval.n_attacked;
        ++eval.n_failed;
        ++survive;
        break;
      case Outcome::Error:
        ++eval.n_attacked;
        ++eval.n_errors;
        ++survive;
        break;
      case Outcome::Invalid:
        ++eval.n_attacked;
        ++eval.n_invalid;
        ++survive;
        break;
      case Outcome::Misclassified:
        ++eval.n_attacked;
        ++eval.n_success;
        l2_sum += r.l2;
        linf_sum += r.linf;
        break;
      case Outcome::Survived:
        break;
    }
  }
  eval.adversarial_accuracy =
      eval.n_attacked > 0 ? static_cast<double>(survive) / eval.n_attacked : 1.0;
  if (eval.n_success > 0) {
    eval.mean_l2 = l2_sum / eval.n_success;
    eval.mean_linf = linf_sum / eval.n_success;
  }
  return eval;
}

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
  template <class F>
  auto time(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      sink_[stage] += std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    } else {
      auto out = f();
      sink_[stage] += std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      return out;
    }
  }

 private:
  std::map<std::string, double>& sink_;
};

}  // namespace detail

/// Table-1-style zero-knowledge experiment: the adversary attacks the model
/// it can see (the deployed ensemble), and the defense pipeline, which
/// inverts before classifying, is what gets evaluated on the attack outputs.
/// Returns one report for the undefended classifier and one for the defense.
inline std::vector<ExperimentReport> run_zero_knowledge_experiment(
    const ExperimentConfig& cfg, const Dataset& train_set,
    const Dataset& test) {
  const int n = std::min<int>(cfg.n_eval_samples, static_cast<int>(test.n_rows()));
  const ZkVariant variant =
      cfg.mode == "zk-two" ? ZkVariant::TwoModels : ZkVariant::Single;

  std::vector<ExperimentReport> reports(2);
  ExperimentReport& dflt = reports[0];
  ExperimentReport& defended = reports[1];
  detail::StageTimer dflt_timer(dflt.wall_time_s);
  detail::StageTimer def_timer(defended.wall_time_s);

  const Ensemble default_model =
      dflt_timer.time("train", [&] { return train(train_set, cfg.train_cfg); });
  const DefendedClassifier zk = def_timer.time(
      "train", [&] { return train_zero_knowledge(train_set, cfg.train_cfg, variant); });

  // What the zero-knowledge adversary sees: the deployed model, without the
  // inversion step (zk-two deploys the original-only model).
  const Ensemble& visible = zk.model;
  LabelFn default_fn = attack::ensemble_label_fn(default_model);
  LabelFn visible_fn = attack::ensemble_label_fn(visible);
  LabelFn pipeline_fn = [&zk](const std::vector<double>& x) {
    return classify_zero_knowledge(zk, x);
  };

  dflt.dataset = cfg.dataset_name;
  dflt.classifier = "default";
  dflt.n_eval = n;
  dflt.default_accuracy = eval_default_accuracy(default_fn, test, n);
  dflt.split_count = count_split_conditions(default_model);

  defended.dataset = cfg.dataset_name;
  defended.classifier = cfg.mode == "zk-two" ? "zk-two" : "zk-single";
  defended.n_eval = n;
  defended.default_accuracy = eval_default_accuracy(pipeline_fn, test, n);
  defended.split_count = count_split_conditions(zk.model);
  const InvarianceReport inv = def_timer.time(
      "invariance", [&] { return invariance_report(zk.model, test); });
  defended.invariance = std::make_pair(inv.agree, inv.disagree);

  for (const std::string& name : cfg.attacks) {
    dflt_timer.time("attack:" + name, [&] {
      dflt.attacks.push_back(eval_adversarial(
          default_fn,
          make_attack_runner(name, cfg.attack_cfg, default_fn, &default_model),
          test, n, cfg.seed, cfg.n_threads));
    });
    def_timer.time("attack:" + name, [&] {
      defended.attacks.push_back(eval_adversarial(
          pipeline_fn, make_attack_runner(name, cfg.attack_cfg, visible_fn, &visible),
          test, n, cfg.seed, cfg.n_threads));
    });
  }
  return reports;
}

/// The attacks-fail-without-inversion experiment: attacks run against the
/// raw augmented ensemble and the same raw model is what scores the outputs,
/// so self-validated attacks must land at 0% surviving accuracy and any
/// surviving mass exposes attacks whose claimed successes do not hold.
inline ExperimentReport run_no_inversion_experiment(const ExperimentConfig& cfg,
                                                    const Dataset& train_set,
                                                    const Dataset& test) {
  const int n = std::min<int>(cfg.n_eval_samples, static_cast<int>(test.n_rows()));
  ExperimentReport rep;
  detail::StageTimer timer(rep.wall_time_s);
  const DefendedClassifier zk = timer.time("train", [&] {
    return train_zero_knowledge(train_set, cfg.train_cfg, ZkVariant::Single);
  });
  const Ensemble& m = zk.model;
  LabelFn fn = attack::ensemble_label_fn(m);

  rep.dataset = cfg.dataset_name;
  rep.classifier = "zk-single-no-inversion";
  rep.n_eval = n;
  rep.default_accuracy = eval_default_accuracy(fn, test, n);
  rep.split_count = count_split_conditions(m);
  const InvarianceReport inv =
      timer.time("invariance", [&] { return invariance_report(m, test); });
  rep.invariance = std::make_pair(inv.agree, inv.disagree);

  for (const std::string& name : cfg.attacks) {
    timer.time("attack:" + name, [&] {
      rep.attacks.push_back(eval_adversarial(
          fn, make_attack_runner(name, cfg.attack_cfg, fn, &m), test, n,
          cfg.seed, cfg.n_threads));
    });
  }
  return rep;
}

/// Table-2-style perfect-knowledge experiment: the adversary knows the
/// group-vote defense, so attacks start from every symmetry variant of each
/// sample and target the augmented model; the group vote scores the outputs.
/// Returns the undefended report followed by one defense report per start
/// symmetry, in vote order.
inline std::vector<ExperimentReport> run_perfect_knowledge_experiment(
    const ExperimentConfig& cfg, const Dataset& train_set, const Dataset& test) {
  if (!train_set.image_shape || !test.image_shape) {
    throw std::invalid_argument(
        "perfect-knowledge experiment requires an image dataset");
  }
  const int n = std::min<int>(cfg.n_eval_samples, static_cast<int>(test.n_rows()));

  std::vector<ExperimentReport> reports;
  reports.reserve(5);
  reports.emplace_back();
  detail::StageTimer dflt_timer(reports[0].wall_time_s);
  const Ensemble default_model =
      dflt_timer.time("train", [&] { return train(train_set, cfg.train_cfg); });
  LabelFn default_fn = attack::ensemble_label_fn(default_model);

  std::map<std::string, double> pk_times;
  detail::StageTimer pk_timer(pk_times);
  const DefendedClassifier pk = pk_timer.time(
      "train", [&] { return train_perfect_knowledge(train_set, cfg.train_cfg); });
  LabelFn vote_fn = [&pk](const std::vector<double>& x) {
    return classify_perfect_knowledge(pk, x).decided;
  };
  LabelFn model_fn = attack::ensemble_label_fn(pk.model);

  {
    ExperimentReport& rep = reports[0];
    rep.dataset = cfg.dataset_name;
    rep.classifier = "default";
    rep.n_eval = n;
    rep.default_accuracy = eval_default_accuracy(default_fn, test, n);
    rep.split_count = count_split_conditions(default_model);
    for (const std::string& name : cfg.attacks) {
      dflt_timer.time("attack:" + name, [&] {
        rep.attacks.push_back(eval_adversarial(
            default_fn,
            make_attack_runner(name, cfg.attack_cfg, default_fn, &default_model),
            test, n, cfg.seed, cfg.n_threads));
      });
    }
  }

  for (Symmetry s : kVoteOrder) {
    ExperimentReport rep;
    rep.wall_time_s = pk_times;
    pk_times.clear();
    detail::StageTimer timer(rep.wall_time_s);
    rep.dataset = cfg.dataset_name;
    rep.classifier = std::string("pk-group[start=") + to_string(s) + "]";
    rep.n_eval = n;
    rep.split_count = count_split_conditions(pk.model);

    auto transform = [&, s](const std::vector<double>& x) {
      return apply_symmetry(x, s, test.image_shape);
    };
    int correct = 0, agreed = 0;
    for (int i = 0; i < n; ++i) {
      const GroupVote vote = classify_perfect_knowledge(pk, transform(test.row_vec(i)));
      correct += vote.decided == test.labels[i];
      agreed += vote.agreed;
    }
    rep.default_accuracy = static_cast<double>(correct) / n;
    rep.agreed_fraction = static_cast<double>(agreed) / n;

    for (const std::string& name : cfg.attacks) {
      timer.time("attack:" + name, [&] {
        rep.attacks.push_back(eval_adversarial(
            vote_fn, make_attack_runner(name, cfg.attack_cfg, model_fn, &pk.model),
            test, n, cfg.seed, cfg.n_threads, transform));
      });
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

inline std::pair<long long, long long> run_fragmentation_report(
    const Ensemble& default_model, const Ensemble& defended_model) {
  return {count_split_conditions(default_model),
          count_split_conditions(defended_model)};
}

// ---- report serialization ----

inline void to_json(nlohmann::ordered_json& j, const AttackEval& a) {
  j = nlohmann::ordered_json{{"attack", a.attack},
                             {"adversarial_accuracy", a.adversarial_accuracy},
                             {"mean_l2", nullptr},
                             {"mean_linf", nullptr},
                             {"n_attacked", a.n_attacked},
                             {"n_success", a.n_success},
                             {"n_invalid", a.n_invalid},
                             {"n_failed", a.n_failed},
                             {"n_errors", a.n_errors}};
  if (a.mean_l2) j["mean_l2"] = *a.mean_l2;
  if (a.mean_linf) j["mean_linf"] = *a.mean_linf;
}

inline void from_json(const nlohmann::json& j, AttackEval& a) {
  j.at("attack").get_to(a.attack);
  j.at("adversarial_accuracy").get_to(a.adversarial_accuracy);
  a.mean_l2.reset();
  a.mean_linf.reset();
  if (!j.at("mean_l2").is_null()) a.mean_l2 = j.at("mean_l2").get<double>();
  if (!j.at("mean_linf").is_null()) a.mean_linf = j.at("mean_linf").get<double>();
  j.at("n_attacked").get_to(a.n_attacked);
  j.at("n_success").get_to(a.n_success);
  j.at("n_invalid").get_to(a.n_invalid);
  j.at("n_failed").get_to(a.n_failed);
  j.at("n_errors").get_to(a.n_errors);
}

inline void to_json(nlohmann::ordered_json& j, const ExperimentReport& r) {
  j = nlohmann::ordered_json{{"dataset", r.dataset},
                             {"classifier", r.classifier},
                             {"default_accuracy", r.default_accuracy},
                             {"n_eval", r.n_eval}};
  auto& attacks = j["attacks"] = nlohmann::ordered_json::array();
  for (const AttackEval& a : r.attacks) {
    nlohmann::ordered_json ja;
    to_json(ja, a);
    attacks.push_back(std::move(ja));
  }
  if (r.invariance) {
    j["invariance"] = {{"agree", r.invariance->first},
                       {"disagree", r.invariance->second}};
  } else {
    j["invariance"] = nullptr;
  }
  j["split_count"] = nullptr;
  if (r.split_count) j["split_count"] = *r.split_count;
  j["agreed_fraction"] = nullptr;
  if (r.agreed_fraction) j["agreed_fraction"] = *r.agreed_fraction;
  j["wall_time_s"] = r.wall_time_s;
}

inline void from_json(const nlohmann::json& j, ExperimentReport& r) {
  j.at("dataset").get_to(r.dataset);
  j.at("classifier").get_to(r.classifier);
  j.at("default_accuracy").get_to(r.default_accuracy);
  j.at("n_eval").get_to(r.n_eval);
  r.attacks.clear();
  for (const auto& ja : j.at("attacks")) {
    AttackEval a;
    from_json(ja, a);
    r.attacks.push_back(std::move(a));
  }
  r.invariance.reset();
  if (!j.at("invariance").is_null()) {
    r.invariance = std::make_pair(j.at("invariance").at("agree").get<long>(),
                                  j.at("invariance").at("disagree").get<long>());
  }
  r.split_count.reset();
  if (!j.at("split_count").is_null()) {
    r.split_count = j.at("split_count").get<long long>();
  }
  r.agreed_fraction.reset();
  if (!j.at("agreed_fraction").is_null()) {
    r.agreed_fraction = j.at("agreed_fraction").get<double>();
  }
  r.wall_time_s = j.at("wall_time_s").get<std::map<std::string, double>>();
}

inline std::string reports_to_json_text(const std::vector<ExperimentReport>& reports) {
  nlohmann::ordered_json j;
  auto& arr = j["reports"] = nlohmann::ordered_json::array();
  for (const ExperimentReport& r : reports) {
    nlohmann::ordered_json jr;
    to_json(jr, r);
    arr.push_back(std::move(jr));
  }
  return j.dump(2) + "\n";
}

inline std::vector<ExperimentReport> reports_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  std::vector<ExperimentReport> reports;
  for (const auto& jr : j.at("reports")) {
    ExperimentReport r;
    from_json(jr, r);
    reports.push_back(std::move(r));
  }
  return reports;
}

namespace detail {

inline std::string csv_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// CSV rows: dataset, classifier, attack, default_acc, adv_acc, mean_l2,
/// mean_linf, n_eval, n_success, n_invalid, agree, disagree, split_count.
/// Undefined values become empty cells. Reports without attacks emit one row
/// with the attack columns blank.
inline std::string reports_to_csv_text(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "dataset,classifier,attack,default_acc,adv_acc,mean_l2,mean_linf,"
         "n_eval,n_success,n_invalid,agree,disagree,split_count\n";
  for (const ExperimentReport& r : reports) {
    auto shared_prefix = [&](std::ostringstream& os, const std::string& attack) {
      os << r.dataset << ',' << r.classifier << ',' << attack << ','
         << detail::csv_double(r.default_accuracy) << ',';
    };
    auto tail = [&](std::ostringstream& os, const AttackEval* a) {
      os << r.n_eval << ',';
      if (a) {
        os << a->n_success << ',' << a->n_invalid << ',';
      } else {
        os << ',' << ',';
      }
      if (r.invariance) {
        os << r.invariance->first << ',' << r.invariance->second << ',';
      } else {
        os << ',' << ',';
      }
      if (r.split_count) os << *r.split_count;
      os << '\n';
    };
    if (r.attacks.empty()) {
      shared_prefix(out, "");
      out << ",,,";
      tail(out, nullptr);
      continue;
    }
    for (const AttackEval& a : r.attacks) {
      shared_prefix(out, a.attack);
      out << detail::csv_double(a.adversarial_accuracy) << ',';
      out << (a.mean_l2 ? detail::csv_double(*a.mean_l2) : "") << ',';
      out << (a.mean_linf ? detail::csv_double(*a.mean_linf) : "") << ',';
      tail(out, &a);
    }
  }
  return out.str();
}

inline void emit_report(const std::vector<ExperimentReport>& reports,
                        const std::string& format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_report: cannot write '" + path + "'");
  if (format == "json") {
    out << reports_to_json_text(reports);
  } else if (format == "csv") {
    out << reports_to_csv_text(reports);
  } else {
    throw std::invalid_argument("emit_report: format must be csv or json");
  }
}

}  // namespace treesym
