#include "sqi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "sqi/csv.hpp"
#include "sqi/error.hpp"

namespace sqi {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate_records(const std::vector<UtteranceRecord>& records) {
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (r.utt_id.empty()) throw FormatError("record with empty utt_id");
    if (!seen.insert(r.utt_id).second) throw FormatError("duplicate utt_id '" + r.utt_id + "'");
    if (!(r.subj_quality >= kQualityMin && r.subj_quality <= kQualityMax)) {
      throw FormatError(r.utt_id + ": subj_quality " + csv::format_double(r.subj_quality) + " outside [1, 5]");
    }
    if (!(r.subj_intelligibility >= kIntelligibilityMin && r.subj_intelligibility <= kIntelligibilityMax)) {
      throw FormatError(r.utt_id + ": subj_intelligibility " + csv::format_double(r.subj_intelligibility) +
                        " outside [0, 10]");
    }
  }
}

std::vector<UtteranceRecord> load_manifest(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::string src = path.string();
  const auto base = path.parent_path();

  auto require = [&](const char* name) {
    const auto c = table.column(name);
    if (!c) throw FormatError(src + ": missing required column '" + name + "'");
    return *c;
  };
  const std::size_t id_col = require("utt_id");
  const std::size_t q_col = require("subj_quality");
  const std::size_t i_col = require("subj_intelligibility");
  const auto spk_col = table.column("speaker_id");
  const auto clean_col = table.column("clean_path");
  const auto deg_col = table.column("degraded_path");
  std::vector<std::pair<std::size_t, MeasureId>> measure_cols;
  for (MeasureId id : all_measures()) {
    if (const auto c = table.column(measure_name(id))) measure_cols.emplace_back(*c, id);
  }

  auto resolve = [&](const std::string& cell) -> std::optional<std::filesystem::path> {
    if (cell.empty()) return std::nullopt;
    std::filesystem::path p(cell);
    if (p.is_relative()) p = base / p;
    return p;
  };

  std::vector<UtteranceRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = src + ":" + std::to_string(table.line_numbers[r]);
    UtteranceRecord rec;
    rec.utt_id = row[id_col];
    auto number = [&](std::size_t c, const char* what) {
      const auto v = csv::parse_double(row[c]);
      if (!v) throw FormatError(where + ": cannot parse " + what + " '" + row[c] + "'");
      return *v;
    };
    rec.subj_quality = number(q_col, "subj_quality");
    rec.subj_intelligibility = number(i_col, "subj_intelligibility");
    if (spk_col && !row[*spk_col].empty()) rec.speaker_id = row[*spk_col];
    if (clean_col) rec.clean_path = resolve(row[*clean_col]);
    if (deg_col) rec.degraded_path = resolve(row[*deg_col]);
    for (const auto& [c, id] : measure_cols) {
      if (row[c].empty()) continue;
      const auto v = csv::parse_double(row[c]);
      if (!v) throw FormatError(where + ": cannot parse " + std::string(measure_name(id)) + " '" + row[c] + "'");
      try {
        rec.measures.set(id, check_measure_value(id, *v).value);
      } catch (const FormatError& e) {
        throw FormatError(where + ": " + e.what());
      }
    }
    out.push_back(std::move(rec));
  }
  try {
    validate_records(out);
  } catch (const FormatError& e) {
    throw FormatError(src + ": " + e.what());
  }
  return out;
}

std::string format_manifest(const std::vector<UtteranceRecord>& records) {
  std::vector<std::string> header{"utt_id", "speaker_id", "clean_path", "degraded_path", "subj_quality",
                                  "subj_intelligibility"};
  for (const auto& name : measure_names()) header.push_back(name);
  std::string out = csv::join_row(header);
  for (const auto& r : records) {
    std::vector<std::string> row{r.utt_id,
                                 r.speaker_id.value_or(""),
                                 r.clean_path ? r.clean_path->generic_string() : "",
                                 r.degraded_path ? r.degraded_path->generic_string() : "",
                                 csv::format_double(r.subj_quality),
                                 csv::format_double(r.subj_intelligibility)};
    for (MeasureId id : all_measures()) {
      const auto v = r.measures.get(id);
      row.push_back(v ? csv::format_double(*v) : "");
    }
    out += csv::join_row(row);
  }
  return out;
}

Split split(const std::vector<UtteranceRecord>& records, const SplitSpec& spec) {
  if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0)) {
    throw InvalidArgument("split: validation fraction must lie in (0, 1)");
  }
  if (records.size() < 2) throw DegenerateInput("split: need at least two records");
  std::mt19937_64 rng(spec.seed);
  Split out;

  if (spec.mode == SplitMode::random_fraction) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    auto n_val = static_cast<std::size_t>(std::llround(spec.validation_fraction * static_cast<double>(records.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, records.size() - 1);
    std::vector<bool> is_val(records.size(), false);
    for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
      (is_val[i] ? out.validation : out.train).push_back(records[i]);
    }
    return out;
  }

  std::map<std::string, std::size_t> per_speaker;
  for (const auto& r : records) {
    if (!r.speaker_id || r.speaker_id->empty()) {
      throw InvalidArgument("split: speaker_disjoint requires speaker_id on every record (" + r.utt_id + ")");
    }
    ++per_speaker[*r.speaker_id];
  }
  if (per_speaker.size() < 2) throw DegenerateInput("split: speaker_disjoint needs at least two speakers");
  std::vector<std::string> speakers;
  for (const auto& [s, n] : per_speaker) speakers.push_back(s);
  std::shuffle(speakers.begin(), speakers.end(), rng);

  const double target = spec.validation_fraction * static_cast<double>(records.size());
  std::set<std::string> val_speakers;
  std::size_t assigned = 0;
  for (const auto& s : speakers) {
    if (static_cast<double>(assigned) >= target) break;
    if (val_speakers.size() + 1 == speakers.size()) break;  // keep one speaker for training
    val_speakers.insert(s);
    assigned += per_speaker[s];
  }
  for (const auto& r : records) {
    (val_speakers.contains(*r.speaker_id) ? out.validation : out.train).push_back(r);
  }
  return out;
}

std::vector<UtteranceRecord> subsample(const std::vector<UtteranceRecord>& records, double fraction,
                                       std::uint64_t seed, bool nested) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("subsample: fraction must lie in (0, 1]");
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(records.size())));
  if (n == 0) throw DegenerateInput("subsample: fraction selects no records");
  if (n >= records.size()) return records;

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Independent draws mix the fraction into the seed; nested draws share
  // one permutation per seed.
  const std::uint64_t stream = nested ? 0 : static_cast<std::uint64_t>(std::llround(fraction * 1e6)) + 1;
  std::mt19937_64 rng(mix_seed(seed, stream));
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(n);
  std::sort(order.begin(), order.end());
  std::vector<UtteranceRecord> out;
  out.reserve(n);
  for (std::size_t i : order) out.push_back(records[i]);
  return out;
}

}  // namespace sqi
