#pragma once
// Utterance manifests, train/validation splitting and training-set
// subsampling.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sqi/measure_vector.hpp"

namespace sqi {

inline constexpr double kQualityMin = 1.0;
inline constexpr double kQualityMax = 5.0;
inline constexpr double kIntelligibilityMin = 0.0;
inline constexpr double kIntelligibilityMax = 10.0;

struct UtteranceRecord {
  std::string utt_id;
  std::optional<std::string> speaker_id;
  std::optional<std::filesystem::path> clean_path;
  std::optional<std::filesystem::path> degraded_path;
  MeasureVector measures;
  double subj_quality = kQualityMin;
  double subj_intelligibility = kIntelligibilityMin;

  friend bool operator==(const UtteranceRecord&, const UtteranceRecord&) = default;
};

// Required columns: utt_id, subj_quality, subj_intelligibility. Optional:
// speaker_id, clean_path, degraded_path and any canonical measure column.
// Relative audio paths are resolved against the manifest's directory.
// Throws FormatError on a missing column, out-of-range score or duplicate
// utt_id.
std::vector<UtteranceRecord> load_manifest(const std::filesystem::path& path);

// Manifest text with every column; paths are written as stored.
std::string format_manifest(const std::vector<UtteranceRecord>& records);

// Checks utt_id uniqueness and subjective score ranges.
void validate_records(const std::vector<UtteranceRecord>& records);

enum class SplitMode { random_fraction, speaker_disjoint };

struct SplitSpec {
  SplitMode mode = SplitMode::random_fraction;
  double validation_fraction = 0.10;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<UtteranceRecord> train;
  std::vector<UtteranceRecord> validation;
};

// random_fraction: seeded shuffle, the first round(fraction * n) records
// (at least one) go to validation. speaker_disjoint: speakers are shuffled
// and assigned to validation until its share reaches the fraction.
Split split(const std::vector<UtteranceRecord>& records, const SplitSpec& spec);

// round(fraction * n) records drawn uniformly without replacement, returned
// in their original order. With nested = true the draw is a prefix of one
// seeded permutation, so smaller fractions are subsets of larger ones.
std::vector<UtteranceRecord> subsample(const std::vector<UtteranceRecord>& records, double fraction,
                                       std::uint64_t seed, bool nested = false);

// Training-size fractions used by the data-efficiency sweep.
inline const std::vector<double> kSweepFractions{0.0166, 0.05, 0.25, 1.0};

// Deterministic 64-bit mixing used to derive sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace sqi
