#include "edudss/gbdt/model_io.hpp"

#include <cmath>

#include "edudss/common/error.hpp"

namespace edudss::gbdt {

using nlohmann::json;

namespace {

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) {
      nodes.push_back({{"leaf", node.value}, {"cover", node.cover}});
    } else {
      nodes.push_back({{"feature", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right},
                       {"cover", node.cover}});
    }
  }
  return json{{"nodes", std::move(nodes)}};
}

RegressionTree tree_from_json(const json& doc) {
  std::vector<TreeNode> nodes;
  for (const auto& entry : doc.at("nodes")) {
    TreeNode node;
    node.cover = entry.at("cover").get<double>();
    if (entry.contains("leaf")) {
      node.value = entry.at("leaf").get<double>();
    } else {
      node.feature = entry.at("feature").get<int>();
      node.threshold = entry.at("threshold").get<double>();
      node.left = entry.at("left").get<int>();
      node.right = entry.at("right").get<int>();
      if (node.feature < 0) throw ModelError("model document: negative split feature");
    }
    nodes.push_back(node);
  }
  if (nodes.empty()) throw ModelError("model document: tree without nodes");
  return RegressionTree(std::move(nodes));
}

}  // namespace

json model_to_json(const GBDTModel& model) {
  json trees = json::array();
  for (const auto& tree : model.trees) trees.push_back(tree_to_json(tree));
  return json{
      {"format", "edudss.gbdt"},
      {"version", kModelFormatVersion},
      {"base_score", model.base_score},
      {"config", model.config.to_json()},
      {"feature_names", model.feature_names},
      {"train_rmse", model.train_rmse},
      {"trees", std::move(trees)},
  };
}

GBDTModel model_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("version")) {
    throw ModelError("model document: missing 'version'");
  }
  try {
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelError("model document: unsupported version " + std::to_string(version) +
                       " (this build reads version " + std::to_string(kModelFormatVersion) +
                       ")");
    }
    GBDTModel model;
    model.base_score = doc.at("base_score").get<double>();
    model.config = TrainConfig::from_json(doc.at("config"));
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.train_rmse = doc.at("train_rmse").get<std::vector<double>>();
    for (const auto& tree : doc.at("trees")) {
      model.trees.push_back(tree_from_json(tree));
      model.trees.back().validate(model.feature_names.size());
    }
    if (!std::isfinite(model.base_score)) throw ModelError("model document: bad base_score");
    return model;
  } catch (const json::exception& e) {
    throw ModelError(std::string("model document: malformed (") + e.what() + ")");
  }
}

std::string serialize_model(const GBDTModel& model) { return model_to_json(model).dump(); }

GBDTModel deserialize_model(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("model document: parse error (") + e.what() + ")");
  }
  return model_from_json(doc);
}

}  // namespace edudss::gbdt
