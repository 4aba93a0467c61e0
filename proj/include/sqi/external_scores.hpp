#pragma once
// Precomputed objective scores (PESQ, P.835, DNSMOS, MOSA-Net, WER, ...)
// ingested from CSV.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sqi/measure_vector.hpp"

namespace sqi {

struct ScoreTable {
  std::map<std::string, MeasureVector> rows;  // keyed by utt_id
  std::vector<std::string> warnings;          // ignored columns, clamped values
};

// Header row required with a `utt_id` column plus any subset of the
// canonical measure columns. Empty cells are missing values. Throws
// FormatError on a missing utt_id column, duplicate ids, unparsable
// cells or out-of-range values.
ScoreTable load_external_scores(const std::filesystem::path& path);

// Writes utt_id plus the given measure columns (all twelve by default);
// missing values become empty cells. Rows are ordered by utt_id.
std::string format_scores_csv(const std::map<std::string, MeasureVector>& rows,
                              const std::vector<MeasureId>& columns = {});

}  // namespace sqi
