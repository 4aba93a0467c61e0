#include "sqi/linear_model.hpp"

#include <Eigen/Dense>

#include "json_io.hpp"
#include "sqi/error.hpp"

namespace sqi {

using json = nlohmann::json;

double LinearHead::predict(std::span<const double> x) const {
  if (x.size() != weights.size()) throw InvalidArgument("LinearHead: dimension mismatch");
  double acc = bias;
  for (std::size_t i = 0; i < x.size(); ++i) acc += weights[i] * x[i];
  return acc;
}

LinearHead fit_linear(const Matrix& inputs, std::span<const double> target) {
  const std::size_t n = inputs.rows;
  const std::size_t d = inputs.cols;
  if (target.size() != n) throw InvalidArgument("fit_linear: target length mismatch");
  if (n < d + 1) throw DegenerateInput("fit_linear: fewer rows than features");

  Eigen::MatrixXd x(n, d + 1);
  Eigen::VectorXd y(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = inputs(r, c);
    x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = 1.0;
    y(static_cast<Eigen::Index>(r)) = target[r];
  }
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += kLinearRidge;
  const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw NumericError("fit_linear: normal equations could not be factored");
  const Eigen::VectorXd beta = solver.solve(x.transpose() * y);

  LinearHead head;
  head.weights.resize(d);
  for (std::size_t c = 0; c < d; ++c) head.weights[c] = beta(static_cast<Eigen::Index>(c));
  head.bias = beta(static_cast<Eigen::Index>(d));
  return head;
}

LinearBaseline fit_linear_baseline(const std::vector<UtteranceRecord>& train_records, ImputeMode impute) {
  LinearBaseline model;
  model.features = fit_features(train_records, Variant::standard, impute);
  const Matrix x = model.features.inputs(train_records);
  const Matrix t = targets(train_records, Variant::standard);
  std::vector<double> q(t.rows);
  std::vector<double> i(t.rows);
  for (std::size_t r = 0; r < t.rows; ++r) {
    q[r] = t(r, 0);
    i[r] = t(r, 1);
  }
  model.quality = fit_linear(x, q);
  model.intelligibility = fit_linear(x, i);
  return model;
}

std::vector<Prediction> predict(const LinearBaseline& model, const std::vector<UtteranceRecord>& records) {
  const Matrix x = model.features.inputs(records);
  std::vector<Prediction> out(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    out[r].quality = denormalize_quality(model.quality.predict(x.row(r)));
    out[r].intelligibility = denormalize_intelligibility(model.intelligibility.predict(x.row(r)));
  }
  return out;
}

std::string checkpoint_json(const LinearBaseline& model) {
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["kind"] = "linear";
  j["features"] = json_io::pipeline_to_json(model.features);
  j["heads"] = {{"quality", {{"weights", model.quality.weights}, {"bias", model.quality.bias}}},
                {"intelligibility", {{"weights", model.intelligibility.weights}, {"bias", model.intelligibility.bias}}}};
  return j.dump(1) + "\n";
}

LinearBaseline linear_from_json(const std::string& text) {
  const json j = json_io::parse_document(text, "checkpoint");
  try {
    if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
      throw FormatError("checkpoint: unsupported format_version");
    }
    if (j.at("kind").get<std::string>() != "linear") throw FormatError("checkpoint: not a linear model");
    LinearBaseline m;
    m.features = json_io::pipeline_from_json(j.at("features"));
    if (m.features.variant != Variant::standard) throw FormatError("checkpoint: linear baseline must be standard");
    const auto& heads = j.at("heads");
    for (auto [name, head] : {std::pair{"quality", &m.quality}, std::pair{"intelligibility", &m.intelligibility}}) {
      head->weights = heads.at(name).at("weights").get<std::vector<double>>();
      head->bias = heads.at(name).at("bias").get<double>();
      if (head->weights.size() != kNumMeasures) throw FormatError("checkpoint: linear head needs twelve weights");
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace sqi
