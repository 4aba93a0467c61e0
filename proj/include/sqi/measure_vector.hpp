#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqi {

// The twelve objective measures fused by the model, in canonical order.
enum class MeasureId : std::size_t {
  pesq,
  p835_sig,
  p835_bak,
  p835_ovrl,
  dnsmos_sig,
  dnsmos_bak,
  dnsmos_ovrl,
  mosanet,
  ncm,
  stoi,
  estoi,
  wer,
};

inline constexpr std::size_t kNumMeasures = 12;

// Tolerance around the nominal range before a value is rejected.
inline constexpr double kRangeSlack = 0.25;

struct NominalRange {
  double lo;
  double hi;
};

std::string_view measure_name(MeasureId id);
std::optional<MeasureId> measure_from_name(std::string_view name);
NominalRange nominal_range(MeasureId id);
const std::array<MeasureId, kNumMeasures>& all_measures();
std::vector<std::string> measure_names();

// Quality-oriented measures (PESQ, P.835, DNSMOS, MOSA-Net).
bool is_quality_measure(MeasureId id);

// Result of checking one value against its nominal range.
struct CheckedValue {
  double value;
  std::optional<std::string> warning;  // set when the value was clamped
};

// Throws FormatError for non-finite values or values outside the nominal
// range widened by kRangeSlack. WER above 1 (within slack) is clamped to
// 1 with a warning.
CheckedValue check_measure_value(MeasureId id, double value);

// Twelve optional scores for one utterance.
class MeasureVector {
 public:
  std::optional<double> get(MeasureId id) const { return values_[static_cast<std::size_t>(id)]; }
  void set(MeasureId id, double v) { values_[static_cast<std::size_t>(id)] = v; }
  void clear(MeasureId id) { values_[static_cast<std::size_t>(id)].reset(); }
  bool has(MeasureId id) const { return get(id).has_value(); }

  std::size_t count() const;
  bool complete() const { return count() == kNumMeasures; }

  // Values in canonical order; requires complete().
  std::array<double, kNumMeasures> dense() const;

  friend bool operator==(const MeasureVector&, const MeasureVector&) = default;

 private:
  std::array<std::optional<double>, kNumMeasures> values_{};
};

struct MergeOptions {
  bool prefer_external = false;
};

// Union of two partial vectors. On overlap the native (computed) value
// wins unless prefer_external is set.
MeasureVector merge(const MeasureVector& native, const MeasureVector& external, MergeOptions options = {});

}  // namespace sqi
