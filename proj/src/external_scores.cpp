#include "sqi/external_scores.hpp"

#include "sqi/csv.hpp"
#include "sqi/error.hpp"

namespace sqi {

ScoreTable load_external_scores(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  const std::string src = path.string();
  const auto id_col = table.column("utt_id");
  if (!id_col) throw FormatError(src + ": missing utt_id column");

  ScoreTable out;
  std::vector<std::pair<std::size_t, MeasureId>> columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == *id_col) continue;
    if (const auto id = measure_from_name(table.header[c])) {
      columns.emplace_back(c, *id);
    } else {
      out.warnings.push_back(src + ": ignoring unknown column '" + table.header[c] + "'");
    }
  }

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = src + ":" + std::to_string(table.line_numbers[r]);
    const std::string& utt = row[*id_col];
    if (utt.empty()) throw FormatError(where + ": empty utt_id");
    MeasureVector v;
    for (const auto& [c, id] : columns) {
      const std::string& cell = row[c];
      if (cell.empty()) continue;
      const auto parsed = csv::parse_double(cell);
      if (!parsed) throw FormatError(where + ": cannot parse " + std::string(measure_name(id)) + " value '" + cell + "'");
      CheckedValue checked;
      try {
        checked = check_measure_value(id, *parsed);
      } catch (const FormatError& e) {
        throw FormatError(where + ": " + e.what());
      }
      if (checked.warning) out.warnings.push_back(where + ": " + *checked.warning);
      v.set(id, checked.value);
    }
    if (!out.rows.emplace(utt, v).second) throw FormatError(where + ": duplicate utt_id '" + utt + "'");
  }
  return out;
}

std::string format_scores_csv(const std::map<std::string, MeasureVector>& rows, const std::vector<MeasureId>& columns) {
  std::vector<MeasureId> cols = columns;
  if (cols.empty()) cols.assign(all_measures().begin(), all_measures().end());
  std::vector<std::string> header{"utt_id"};
  for (MeasureId id : cols) header.emplace_back(measure_name(id));
  std::string out = csv::join_row(header);
  for (const auto& [utt, v] : rows) {
    std::vector<std::string> fields{utt};
    for (MeasureId id : cols) {
      const auto value = v.get(id);
      fields.push_back(value ? csv::format_double(*value) : std::string());
    }
    out += csv::join_row(fields);
  }
  return out;
}

}  // namespace sqi
