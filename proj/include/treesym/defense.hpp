#pragma once

#include <array>
#include <optional>
#include <set>
#include <stdexcept>
#include <variant>
#include <vector>

#include "json.hpp"
#include "treesym/dataset.hpp"
#include "treesym/gbdt.hpp"
#include "treesym/model_io.hpp"
#include "treesym/symmetry.hpp"

namespace treesym {

struct ZeroKnowledgeInvert {};
struct ZeroKnowledgeTwoModels {
  Ensemble inverted_model;
};
struct PerfectKnowledgeGroup {};

using DefensePolicy =
    std::variant<ZeroKnowledgeInvert, ZeroKnowledgeTwoModels, PerfectKnowledgeGroup>;

/// A trained model plus the symmetry policy applied at inference time.
struct DefendedClassifier {
  Ensemble model;
  DefensePolicy policy;
  std::optional<ImageShape> image_shape;
};

/// Labels of the four symmetric variants in the fixed order
/// (Id, Flip, Invert, InvertFlip) plus the decided class. `agreed` reports
/// whether any label reached multiplicity two.
struct GroupVote {
  std::array<int, 4> labels{};
  int decided = -1;
  bool agreed = false;
};

enum class ZkVariant { Single, TwoModels };

inline DefendedClassifier train_zero_knowledge(const Dataset& train,
                                               const TrainConfig& cfg,
                                               ZkVariant variant,
                                               TrainTrace* trace = nullptr) {
  DefendedClassifier d;
  d.image_shape = train.image_shape;
  if (variant == ZkVariant::Single) {
    d.model = treesym::train(augment(train, {Symmetry::Id, Symmetry::Invert}), cfg, trace);
    d.policy = ZeroKnowledgeInvert{};
  } else {
    d.model = treesym::train(train, cfg, trace);
    Dataset inverted = train;
    for (double& v : inverted.values) v = 1.0 - v;
    d.policy = ZeroKnowledgeTwoModels{treesym::train(inverted, cfg)};
  }
  return d;
}

inline int classify_zero_knowledge(const DefendedClassifier& d,
                                   const std::vector<double>& x) {
  const std::vector<double> inverted = invert(x);
  if (const auto* two = std::get_if<ZeroKnowledgeTwoModels>(&d.policy)) {
    return predict_label(two->inverted_model, inverted);
  }
  if (!std::holds_alternative<ZeroKnowledgeInvert>(d.policy)) {
    throw std::logic_error("classify_zero_knowledge: not a zero-knowledge policy");
  }
  return predict_label(d.model, inverted);
}

inline DefendedClassifier train_perfect_knowledge(const Dataset& train,
                                                  const TrainConfig& cfg,
                                                  TrainTrace* trace = nullptr) {
  if (!train.image_shape) {
    throw std::invalid_argument(
        "train_perfect_knowledge: flip symmetry needs an image dataset");
  }
  DefendedClassifier d;
  d.image_shape = train.image_shape;
  d.model = treesym::train(
      augment(train, {Symmetry::Id, Symmetry::Invert, Symmetry::Flip,
                      Symmetry::InvertFlip}),
      cfg, trace);
  d.policy = PerfectKnowledgeGroup{};
  return d;
}

/// Vote decision from the four variant labels: most frequent label wins;
/// ties, and the all-distinct case, fall back to the earliest symmetry in
/// the vote order, so total disagreement degrades to the Id prediction.
inline GroupVote decide_vote(const std::array<int, 4>& labels) {
  GroupVote vote;
  vote.labels = labels;
  int best_count = 0;
  for (int i = 0; i < 4; ++i) {
    int count = 0;
    for (int j = 0; j < 4; ++j) {
      if (labels[j] == labels[i]) ++count;
    }
    if (count > best_count) {  // first occurrence wins ties
      best_count = count;
      vote.decided = labels[i];
    }
  }
  vote.agreed = best_count >= 2;
  return vote;
}

/// Classifies all four symmetric variants and decides by label multiplicity.
inline GroupVote classify_perfect_knowledge(const DefendedClassifier& d,
                                            const std::vector<double>& x) {
  if (!std::holds_alternative<PerfectKnowledgeGroup>(d.policy)) {
    throw std::logic_error("classify_perfect_knowledge: not a group policy");
  }
  if (!d.image_shape) {
    throw std::invalid_argument("classify_perfect_knowledge: missing image shape");
  }
  std::array<int, 4> labels{};
  for (int i = 0; i < 4; ++i) {
    labels[i] =
        predict_label(d.model, apply_symmetry(x, kVoteOrder[i], d.image_shape));
  }
  return decide_vote(labels);
}

/// Label function of the defended pipeline, whatever the policy.
inline std::function<int(const std::vector<double>&)> defended_label_fn(
    const DefendedClassifier& d) {
  if (std::holds_alternative<PerfectKnowledgeGroup>(d.policy)) {
    return [&d](const std::vector<double>& x) {
      return classify_perfect_knowledge(d, x).decided;
    };
  }
  return [&d](const std::vector<double>& x) { return classify_zero_knowledge(d, x); };
}

struct InvarianceReport {
  long agree = 0;
  long disagree = 0;
};

/// Compares the label of each test sample with the label of its inversion.
inline InvarianceReport invariance_report(const Ensemble& model,
                                          const Dataset& test) {
  InvarianceReport rep;
  for (std::size_t i = 0; i < test.n_rows(); ++i) {
    const std::vector<double> x = test.row_vec(i);
    const int a = predict_label(model, x);
    const int b = predict_label(model, invert(x));
    if (a == b) {
      ++rep.agree;
    } else {
      ++rep.disagree;
    }
  }
  return rep;
}

inline const char* policy_tag(const DefensePolicy& policy) {
  if (std::holds_alternative<ZeroKnowledgeInvert>(policy)) return "zk-single";
  if (std::holds_alternative<ZeroKnowledgeTwoModels>(policy)) return "zk-two";
  return "pk-group";
}

inline nlohmann::ordered_json defended_to_json(const DefendedClassifier& d) {
  nlohmann::ordered_json j = ensemble_to_json(d.model);
  j["policy"] = policy_tag(d.policy);
  if (d.image_shape) {
    j["image_shape"] = {{"height", d.image_shape->height},
                        {"width", d.image_shape->width}};
  }
  if (const auto* two = std::get_if<ZeroKnowledgeTwoModels>(&d.policy)) {
    j["inverted_model"] = ensemble_to_json(two->inverted_model);
  }
  return j;
}

inline DefendedClassifier defended_from_json(const nlohmann::json& j) {
  DefendedClassifier d;
  d.model = ensemble_from_json(j);
  const std::string tag = j.value("policy", "zk-single");
  if (tag == "zk-single") {
    d.policy = ZeroKnowledgeInvert{};
  } else if (tag == "zk-two") {
    if (!j.contains("inverted_model")) {
      throw std::runtime_error("model schema error: zk-two without inverted_model");
    }
    d.policy = ZeroKnowledgeTwoModels{ensemble_from_json(j.at("inverted_model"))};
  } else if (tag == "pk-group") {
    d.policy = PerfectKnowledgeGroup{};
  } else {
    throw std::runtime_error("model schema error: unknown policy '" + tag + "'");
  }
  if (j.contains("image_shape")) {
    d.image_shape = ImageShape{j.at("image_shape").at("height").get<int>(),
                               j.at("image_shape").at("width").get<int>()};
  }
  return d;
}

}  // namespace treesym
