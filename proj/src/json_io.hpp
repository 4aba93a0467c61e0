#pragma once
// JSON encoding of types shared by the model checkpoints and reports.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "sqi/error.hpp"
#include "sqi/features.hpp"
#include "sqi/fusion_model.hpp"

namespace sqi::json_io {

using nlohmann::json;

inline json pipeline_to_json(const FeaturePipeline& p) {
  json j;
  j["variant"] = variant_name(p.variant);
  j["normalizer"] = {{"names", p.normalizer.names()}, {"mins", p.normalizer.mins()}, {"maxs", p.normalizer.maxs()}};
  if (p.impute_means) {
    j["impute"] = {{"mode", impute_name(ImputeMode::train_mean)}, {"means", *p.impute_means}};
  } else {
    j["impute"] = {{"mode", impute_name(ImputeMode::none)}};
  }
  return j;
}

inline FeaturePipeline pipeline_from_json(const json& j) {
  FeaturePipeline p;
  p.variant = variant_from_name(j.at("variant").get<std::string>());
  const auto& n = j.at("normalizer");
  p.normalizer = Normalizer(n.at("names").get<std::vector<std::string>>(), n.at("mins").get<std::vector<double>>(),
                            n.at("maxs").get<std::vector<double>>());
  if (p.normalizer.size() != input_dim(p.variant)) throw FormatError("normalizer size does not match variant");
  const auto& imp = j.at("impute");
  if (impute_from_name(imp.at("mode").get<std::string>()) == ImputeMode::train_mean) {
    p.impute_means = imp.at("means").get<std::vector<double>>();
    if (p.impute_means->size() != kNumMeasures) throw FormatError("impute means must have twelve entries");
  }
  return p;
}

inline json config_to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"max_epochs", c.max_epochs},
          {"patience", c.patience},           {"seed", c.seed},             {"head_weights", c.head_weights}};
}

inline TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.patience = j.at("patience").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.head_weights = j.at("head_weights").get<std::vector<double>>();
  return c;
}

inline json parse_document(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

}  // namespace sqi::json_io
