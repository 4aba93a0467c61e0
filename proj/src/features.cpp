#include "sqi/features.hpp"

#include "sqi/error.hpp"

namespace sqi {

std::string variant_name(Variant v) { return v == Variant::standard ? "standard" : "augmented"; }

Variant variant_from_name(const std::string& name) {
  if (name == "standard") return Variant::standard;
  if (name == "augmented") return Variant::augmented;
  throw InvalidArgument("unknown model variant '" + name + "'");
}

std::size_t input_dim(Variant v) { return v == Variant::standard ? kNumMeasures : kNumMeasures + 1; }
std::size_t head_count(Variant v) { return v == Variant::standard ? 2 : 1; }

std::string impute_name(ImputeMode m) { return m == ImputeMode::none ? "none" : "train_mean"; }

ImputeMode impute_from_name(const std::string& name) {
  if (name == "none") return ImputeMode::none;
  if (name == "train_mean") return ImputeMode::train_mean;
  throw InvalidArgument("unknown impute mode '" + name + "'");
}

double normalize_quality(double q) { return (q - kQualityMin) / (kQualityMax - kQualityMin); }
double denormalize_quality(double v) { return kQualityMin + v * (kQualityMax - kQualityMin); }
double normalize_intelligibility(double i) {
  return (i - kIntelligibilityMin) / (kIntelligibilityMax - kIntelligibilityMin);
}
double denormalize_intelligibility(double v) {
  return kIntelligibilityMin + v * (kIntelligibilityMax - kIntelligibilityMin);
}

std::vector<double> FeaturePipeline::raw(const UtteranceRecord& r) const {
  std::vector<double> out(input_dim(variant));
  for (MeasureId id : all_measures()) {
    const auto i = static_cast<std::size_t>(id);
    if (const auto v = r.measures.get(id)) {
      out[i] = *v;
    } else if (impute_means) {
      out[i] = (*impute_means)[i];
    } else {
      throw InvalidArgument(r.utt_id + ": missing " + std::string(measure_name(id)) + " and imputation is disabled");
    }
  }
  if (variant == Variant::augmented) out[kNumMeasures] = r.subj_quality;
  return out;
}

Matrix FeaturePipeline::inputs(const std::vector<UtteranceRecord>& records) const {
  Matrix m(records.size(), input_dim(variant));
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto applied = normalizer.apply(raw(records[r]));
    std::copy(applied.values.begin(), applied.values.end(), m.row(r).begin());
  }
  return m;
}

FeaturePipeline fit_features(const std::vector<UtteranceRecord>& train, Variant variant, ImputeMode impute) {
  if (train.empty()) throw DegenerateInput("fit_features: no training records");
  FeaturePipeline p;
  p.variant = variant;

  if (impute == ImputeMode::train_mean) {
    std::vector<double> sums(kNumMeasures, 0.0);
    std::vector<std::size_t> counts(kNumMeasures, 0);
    for (const auto& r : train) {
      for (MeasureId id : all_measures()) {
        if (const auto v = r.measures.get(id)) {
          sums[static_cast<std::size_t>(id)] += *v;
          ++counts[static_cast<std::size_t>(id)];
        }
      }
    }
    std::vector<double> means(kNumMeasures);
    for (std::size_t i = 0; i < kNumMeasures; ++i) {
      if (counts[i] == 0) {
        throw DegenerateInput("fit_features: no training value for " +
                              std::string(measure_name(static_cast<MeasureId>(i))));
      }
      means[i] = sums[i] / static_cast<double>(counts[i]);
    }
    p.impute_means = std::move(means);
  }

  Matrix raw(train.size(), kNumMeasures);
  for (std::size_t r = 0; r < train.size(); ++r) {
    const auto v = p.raw(train[r]);
    std::copy(v.begin(), v.begin() + kNumMeasures, raw.row(r).begin());
  }
  p.normalizer = fit_normalizer(raw, measure_names());
  if (variant == Variant::augmented) p.normalizer.append("subj_quality", kQualityMin, kQualityMax);
  return p;
}

Matrix targets(const std::vector<UtteranceRecord>& records, Variant variant) {
  Matrix t(records.size(), head_count(variant));
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (variant == Variant::standard) {
      t(r, 0) = normalize_quality(records[r].subj_quality);
      t(r, 1) = normalize_intelligibility(records[r].subj_intelligibility);
    } else {
      t(r, 0) = normalize_intelligibility(records[r].subj_intelligibility);
    }
  }
  return t;
}

std::vector<UtteranceRecord> complete_only(const std::vector<UtteranceRecord>& records) {
  std::vector<UtteranceRecord> out;
  for (const auto& r : records) {
    if (r.measures.complete()) out.push_back(r);
  }
  return out;
}

}  // namespace sqi
