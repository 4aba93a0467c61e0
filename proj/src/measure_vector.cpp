#include "sqi/measure_vector.hpp"

#include <cmath>

#include "sqi/csv.hpp"
#include "sqi/error.hpp"

namespace sqi {

namespace {

struct MeasureInfo {
  std::string_view name;
  NominalRange range;
  bool quality;
};

constexpr std::array<MeasureInfo, kNumMeasures> kInfo{{
    {"pesq", {-0.5, 4.5}, true},
    {"p835_sig", {1.0, 5.0}, true},
    {"p835_bak", {1.0, 5.0}, true},
    {"p835_ovrl", {1.0, 5.0}, true},
    {"dnsmos_sig", {1.0, 5.0}, true},
    {"dnsmos_bak", {1.0, 5.0}, true},
    {"dnsmos_ovrl", {1.0, 5.0}, true},
    {"mosanet", {1.0, 5.0}, true},
    {"ncm", {0.0, 1.0}, false},
    {"stoi", {-1.0, 1.0}, false},
    {"estoi", {-1.0, 1.0}, false},
    {"wer", {0.0, 1.0}, false},
}};

const MeasureInfo& info(MeasureId id) { return kInfo[static_cast<std::size_t>(id)]; }

}  // namespace

std::string_view measure_name(MeasureId id) { return info(id).name; }

std::optional<MeasureId> measure_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumMeasures; ++i) {
    if (kInfo[i].name == name) return static_cast<MeasureId>(i);
  }
  return std::nullopt;
}

NominalRange nominal_range(MeasureId id) { return info(id).range; }

bool is_quality_measure(MeasureId id) { return info(id).quality; }

const std::array<MeasureId, kNumMeasures>& all_measures() {
  static const auto ids = [] {
    std::array<MeasureId, kNumMeasures> out{};
    for (std::size_t i = 0; i < kNumMeasures; ++i) out[i] = static_cast<MeasureId>(i);
    return out;
  }();
  return ids;
}

std::vector<std::string> measure_names() {
  std::vector<std::string> out;
  for (const auto& m : kInfo) out.emplace_back(m.name);
  return out;
}

CheckedValue check_measure_value(MeasureId id, double value) {
  const auto& m = info(id);
  if (!std::isfinite(value)) throw FormatError(std::string(m.name) + ": non-finite value");
  if (value < m.range.lo - kRangeSlack || value > m.range.hi + kRangeSlack) {
    throw FormatError(std::string(m.name) + ": value " + csv::format_double(value) + " outside [" +
                      csv::format_double(m.range.lo) + ", " + csv::format_double(m.range.hi) + "] +- " +
                      csv::format_double(kRangeSlack));
  }
  if (id == MeasureId::wer && value > 1.0) {
    return {1.0, "wer " + csv::format_double(value) + " clamped to 1"};
  }
  return {value, std::nullopt};
}

std::size_t MeasureVector::count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.has_value() ? 1 : 0;
  return n;
}

std::array<double, kNumMeasures> MeasureVector::dense() const {
  std::array<double, kNumMeasures> out{};
  for (std::size_t i = 0; i < kNumMeasures; ++i) {
    if (!values_[i]) throw InvalidArgument("MeasureVector::dense: missing " + std::string(kInfo[i].name));
    out[i] = *values_[i];
  }
  return out;
}

MeasureVector merge(const MeasureVector& native, const MeasureVector& external, MergeOptions options) {
  MeasureVector out;
  for (MeasureId id : all_measures()) {
    const auto n = native.get(id);
    const auto e = external.get(id);
    if (n && e) {
      out.set(id, options.prefer_external ? *e : *n);
    } else if (n) {
      out.set(id, *n);
    } else if (e) {
      out.set(id, *e);
    }
  }
  return out;
}

}  // namespace sqi
