#include "sqi/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "json_io.hpp"
#include "sqi/audio.hpp"
#include "sqi/csv.hpp"
#include "sqi/dataset.hpp"
#include "sqi/error.hpp"
#include "sqi/external_scores.hpp"
#include "sqi/features.hpp"
#include "sqi/fusion_model.hpp"
#include "sqi/linear_model.hpp"
#include "sqi/measures.hpp"
#include "sqi/parallel.hpp"
#include "sqi/probe.hpp"
#include "sqi/stats.hpp"
#include "sqi/synth.hpp"

namespace sqi::harness {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string hash_file(const fs::path& path) { return hex64(fnv1a64(read_text(path))); }

namespace {

// Parsed config plus the bookkeeping every command shares.
class Context {
 public:
  Context(const Options& options, std::ostream& log) : options_(options), log_(log) {
    const std::string text = read_text(options.config);
    doc_ = json_io::parse_document(text, "config " + options.config.string());
    if (!doc_.is_object()) throw InvalidArgument("config: top level must be an object");
    if (!doc_.contains("config_version")) throw InvalidArgument("config: missing config_version");
    if (!doc_["config_version"].is_number_integer() || doc_["config_version"].get<int>() != kConfigVersion) {
      throw InvalidArgument("config: unsupported config_version (expected 1)");
    }
    base_dir_ = options.config.parent_path();
    if (options.seed) doc_["seed"] = *options.seed;
    fs::create_directories(options.out);
  }

  const json& doc() const { return doc_; }
  std::ostream& log() { return log_; }
  std::size_t jobs() const { return options_.jobs; }

  void allow(std::initializer_list<const char*> keys) const { check_keys(doc_, keys, "config"); }

  static void check_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    if (!obj.is_object()) throw InvalidArgument(where + ": expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : obj.items()) {
      if (!allowed.count(item.key())) throw InvalidArgument(where + ": unknown key '" + item.key() + "'");
    }
  }

  std::uint64_t seed() const { return get<std::uint64_t>(doc_, "seed", 0); }

  template <typename T>
  static T get(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return convert<T>(obj.at(key), key);
  }

  template <typename T>
  static T require(const json& obj, const char* key) {
    if (!obj.contains(key)) throw InvalidArgument(std::string("config: missing required key '") + key + "'");
    return convert<T>(obj.at(key), key);
  }

  template <typename T>
  static T convert(const json& v, const char* key) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw InvalidArgument(std::string("config: '") + key + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw InvalidArgument(std::string("config: '") + key + "' must be a nonnegative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw InvalidArgument(std::string("config: '") + key + "' must be a number");
    }
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw InvalidArgument(std::string("config: '") + key + "' has the wrong type");
    }
  }

  // Paths in the config are relative to the config file.
  fs::path path(const std::string& key) const { return resolve(require<std::string>(doc_, key.c_str())); }
  fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir_ / p; }

  void record_input(const std::string& role, const fs::path& p) { inputs_[role] = hash_file(p); }

  fs::path out(const std::string& name) const { return options_.out / name; }

  void write(const std::string& name, const std::string& text) const { csv::write_text(out(name), text); }

  // Report with the config echo and input hashes.
  void write_report(const std::string& command, json results) const {
    json report;
    report["command"] = command;
    report["config"] = doc_;
    report["inputs"] = inputs_;
    report["results"] = std::move(results);
    write("report.json", report.dump(2) + "\n");
  }

 private:
  const Options& options_;
  std::ostream& log_;
  json doc_;
  fs::path base_dir_;
  std::map<std::string, std::string> inputs_;
};

// Manifest with optional external score tables merged in by utt_id.
std::vector<UtteranceRecord> load_records(Context& ctx, const std::string& manifest_key) {
  const fs::path manifest = ctx.path(manifest_key);
  ctx.record_input(manifest_key, manifest);
  auto records = load_manifest(manifest);
  const json& doc = ctx.doc();
  if (!doc.contains("scores")) return records;

  std::vector<std::string> score_paths;
  if (doc["scores"].is_string()) {
    score_paths.push_back(doc["scores"].get<std::string>());
  } else {
    score_paths = Context::convert<std::vector<std::string>>(doc["scores"], "scores");
  }
  MergeOptions merge_options;
  merge_options.prefer_external = Context::get<bool>(doc, "prefer_external", false);
  for (std::size_t k = 0; k < score_paths.size(); ++k) {
    const fs::path p = ctx.resolve(score_paths[k]);
    ctx.record_input("scores[" + std::to_string(k) + "]", p);
    const ScoreTable table = load_external_scores(p);
    for (const auto& w : table.warnings) ctx.log() << "warning: " << p.string() << ": " << w << "\n";
    for (auto& r : records) {
      const auto it = table.rows.find(r.utt_id);
      if (it != table.rows.end()) r.measures = merge(r.measures, it->second, merge_options);
    }
  }
  return records;
}

// Drops incomplete records unless the pipeline imputes.
std::vector<UtteranceRecord> usable(Context& ctx, const std::vector<UtteranceRecord>& records, bool imputes,
                                    const std::string& what) {
  if (imputes) return records;
  auto kept = complete_only(records);
  if (kept.size() != records.size()) {
    ctx.log() << what << ": dropped " << (records.size() - kept.size()) << " records with missing measures\n";
  }
  return kept;
}

SplitSpec parse_split(const json& doc, std::uint64_t seed) {
  SplitSpec spec;
  spec.seed = seed;
  if (!doc.contains("split")) return spec;
  const json& s = doc["split"];
  Context::check_keys(s, {"mode", "validation_fraction"}, "config.split");
  const auto mode = Context::get<std::string>(s, "mode", "random_fraction");
  if (mode == "random_fraction") {
    spec.mode = SplitMode::random_fraction;
  } else if (mode == "speaker_disjoint") {
    spec.mode = SplitMode::speaker_disjoint;
  } else {
    throw InvalidArgument("config.split: unknown mode '" + mode + "'");
  }
  spec.validation_fraction = Context::get<double>(s, "validation_fraction", spec.validation_fraction);
  return spec;
}

TrainConfig parse_training(const json& doc, std::uint64_t seed, Variant variant) {
  TrainConfig c;
  c.seed = seed;
  if (variant == Variant::augmented) c.head_weights = {1.0};
  if (doc.contains("training")) {
    const json& t = doc["training"];
    Context::check_keys(t, {"learning_rate", "batch_size", "max_epochs", "patience", "head_weights"}, "config.training");
    c.learning_rate = Context::get<double>(t, "learning_rate", c.learning_rate);
    c.batch_size = Context::get<std::size_t>(t, "batch_size", c.batch_size);
    c.max_epochs = Context::get<std::size_t>(t, "max_epochs", c.max_epochs);
    c.patience = Context::get<std::size_t>(t, "patience", c.patience);
    c.head_weights = Context::get<std::vector<double>>(t, "head_weights", c.head_weights);
  }
  c.validate(head_count(variant));
  return c;
}

json metrics_json(const HeadMetrics& m) { return {{"mse", m.mse}, {"pcc", m.pcc}, {"srcc", m.srcc}}; }

EvalReport evaluate(const std::vector<Prediction>& preds, const std::vector<UtteranceRecord>& records) {
  EvalReport report;
  report.n = records.size();
  std::vector<double> pi, ti, pq, tq;
  for (std::size_t k = 0; k < records.size(); ++k) {
    pi.push_back(preds[k].intelligibility);
    ti.push_back(records[k].subj_intelligibility);
    if (preds[k].quality) {
      pq.push_back(*preds[k].quality);
      tq.push_back(records[k].subj_quality);
    }
  }
  report.intelligibility = evaluate_head(pi, ti);
  if (!pq.empty()) report.quality = evaluate_head(pq, tq);
  return report;
}

json report_json(const EvalReport& r) {
  json j;
  j["n"] = r.n;
  if (r.quality) j["quality"] = metrics_json(*r.quality);
  if (r.intelligibility) j["intelligibility"] = metrics_json(*r.intelligibility);
  return j;
}

std::string predictions_csv(const std::vector<Prediction>& preds, const std::vector<UtteranceRecord>& records) {
  std::string out = "utt_id,quality_pred,quality_true,intelligibility_pred,intelligibility_true\n";
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& p = preds[k];
    out += csv::join_row({records[k].utt_id, p.quality ? csv::format_double(*p.quality) : "",
                          p.quality ? csv::format_double(records[k].subj_quality) : "",
                          csv::format_double(p.intelligibility), csv::format_double(records[k].subj_intelligibility)});
  }
  return out;
}

// Either kind of checkpoint, behind one prediction interface.
struct AnyModel {
  std::optional<FusionModel> fusion;
  std::optional<LinearBaseline> linear;

  std::string kind() const { return fusion ? "fusion" : "linear"; }
  const FeaturePipeline& features() const { return fusion ? fusion->features : linear->features; }
  std::vector<Prediction> predict_records(const std::vector<UtteranceRecord>& records) const {
    return fusion ? predict(*fusion, records) : predict(*linear, records);
  }
  std::string checkpoint() const { return fusion ? checkpoint_json(*fusion) : checkpoint_json(*linear); }
};

AnyModel load_any(const fs::path& path) {
  const std::string text = read_text(path);
  const json j = json_io::parse_document(text, "checkpoint " + path.string());
  const std::string kind = j.is_object() && j.contains("kind") && j["kind"].is_string() ? j["kind"].get<std::string>() : "";
  AnyModel m;
  if (kind == "fusion") {
    m.fusion = model_from_json(text);
  } else if (kind == "linear") {
    m.linear = linear_from_json(text);
  } else {
    throw FormatError("checkpoint " + path.string() + ": unknown kind");
  }
  return m;
}

std::string model_kind(const json& doc) {
  const auto kind = Context::get<std::string>(doc, "model", "fusion");
  if (kind != "fusion" && kind != "linear") throw InvalidArgument("config: model must be 'fusion' or 'linear'");
  return kind;
}

struct Trained {
  AnyModel model;
  std::optional<TrainHistory> history;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
};

Trained fit(const std::string& kind, const std::vector<UtteranceRecord>& records, Variant variant, ImputeMode impute,
            const SplitSpec& split_spec, const TrainConfig& config) {
  Trained t;
  if (kind == "linear") {
    if (variant != Variant::standard) throw InvalidArgument("config: the linear baseline supports only the standard variant");
    // The baseline has no early stopping, so it sees every training record.
    t.model.linear = fit_linear_baseline(records, impute);
    t.n_train = records.size();
    return t;
  }
  const Split parts = split(records, split_spec);
  auto result = train_fusion(parts.train, parts.validation, config, variant, impute);
  t.model.fusion = std::move(result.model);
  t.history = std::move(result.history);
  t.n_train = parts.train.size();
  t.n_validation = parts.validation.size();
  return t;
}


int cmd_measure(Context& ctx) {
  ctx.allow({"config_version", "seed", "manifest"});
  auto records = load_records(ctx, "manifest");
  std::sort(records.begin(), records.end(),
            [](const UtteranceRecord& a, const UtteranceRecord& b) { return a.utt_id < b.utt_id; });

  struct Row {
    std::optional<std::array<double, 3>> values;
    std::string error;
  };
  std::vector<Row> rows(records.size());
  parallel_for(records.size(), ctx.jobs(), [&](std::size_t k) {
    const auto& r = records[k];
    try {
      if (!r.clean_path || !r.degraded_path) throw InvalidArgument("record has no clean_path/degraded_path");
      const AudioBuffer clean = read_wav(*r.clean_path);
      const AudioBuffer deg = read_wav(*r.degraded_path);
      rows[k].values = std::array<double, 3>{ncm(clean, deg).value, stoi(clean, deg).value, estoi(clean, deg).value};
    } catch (const std::exception& e) {
      rows[k].error = e.what();
    }
  });

  std::string ok = "utt_id,ncm,stoi,estoi\n";
  std::string failed = "utt_id,error\n";
  std::size_t n_failed = 0;
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (rows[k].values) {
      const auto& v = *rows[k].values;
      ok += csv::join_row({records[k].utt_id, csv::format_double(v[0]), csv::format_double(v[1]), csv::format_double(v[2])});
    } else {
      ++n_failed;
      failed += csv::join_row({records[k].utt_id, rows[k].error});
      ctx.log() << "measure failed for " << records[k].utt_id << ": " << rows[k].error << "\n";
    }
  }
  ctx.write("measures.csv", ok);
  ctx.write("failures.csv", failed);
  ctx.write_report("measure", {{"rows", records.size()}, {"rows_failed", n_failed}});
  ctx.log() << "measured " << (records.size() - n_failed) << " of " << records.size() << " records\n";
  return n_failed == 0 ? 0 : 1;
}


int cmd_correlate(Context& ctx) {
  ctx.allow({"config_version", "seed", "manifest", "scores", "prefer_external", "scatter"});
  const auto all = load_records(ctx, "manifest");
  const auto records = complete_only(all);
  if (records.size() < 2) throw DegenerateInput("correlate: fewer than two records with complete measures");

  std::vector<std::string> names = measure_names();
  names.push_back("subj_quality");
  names.push_back("subj_intelligibility");
  Matrix data(records.size(), names.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto dense = records[r].measures.dense();
    for (std::size_t c = 0; c < kNumMeasures; ++c) data(r, c) = dense[c];
    data(r, kNumMeasures) = records[r].subj_quality;
    data(r, kNumMeasures + 1) = records[r].subj_intelligibility;
  }
  const CorrelationMatrix cm = correlation_matrix(data, names);
  ctx.write("correlation.csv", cm.to_csv());

  const auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InvalidArgument("correlate: unknown scatter variable '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  };
  json scatter_files = json::array();
  const auto pairs = Context::get<std::vector<std::vector<std::string>>>(ctx.doc(), "scatter", {});
  for (const auto& pair : pairs) {
    if (pair.size() != 2) throw InvalidArgument("correlate: scatter entries must be [x, y] pairs");
    const std::size_t a = column(pair[0]);
    const std::size_t b = column(pair[1]);
    std::string text = csv::join_row({"utt_id", pair[0], pair[1]});
    for (std::size_t r = 0; r < records.size(); ++r) {
      text += csv::join_row({records[r].utt_id, csv::format_double(data(r, a)), csv::format_double(data(r, b))});
    }
    const std::string file = "scatter_" + pair[0] + "_vs_" + pair[1] + ".csv";
    ctx.write(file, text);
    scatter_files.push_back(file);
  }

  json quality_vs_intel;
  const std::size_t intel = kNumMeasures + 1;
  for (std::size_t c = 0; c < kNumMeasures; ++c) {
    if (is_quality_measure(all_measures()[c])) quality_vs_intel[names[c]] = cm.values(c, intel);
  }
  json results{{"n_records", all.size()},
               {"n_complete", records.size()},
               {"pcc_quality_intelligibility", cm.values(kNumMeasures, intel)},
               {"quality_measures_vs_subj_intelligibility", quality_vs_intel},
               {"scatter_files", scatter_files}};
  ctx.write_report("correlate", results);
  return 0;
}


Variant parse_variant(const json& doc) { return variant_from_name(Context::get<std::string>(doc, "variant", "standard")); }
ImputeMode parse_impute(const json& doc) { return impute_from_name(Context::get<std::string>(doc, "impute", "none")); }

int cmd_train(Context& ctx) {
  ctx.allow({"config_version", "seed", "train_manifest", "test_manifest", "scores", "prefer_external", "model", "variant",
             "impute", "split", "training"});
  const json& doc = ctx.doc();
  const auto kind = model_kind(doc);
  const Variant variant = parse_variant(doc);
  const ImputeMode impute = parse_impute(doc);
  const SplitSpec split_spec = parse_split(doc, ctx.seed());
  const TrainConfig config = parse_training(doc, ctx.seed(), variant);

  const auto train_records = usable(ctx, load_records(ctx, "train_manifest"), impute != ImputeMode::none, "train");
  const Trained trained = fit(kind, train_records, variant, impute, split_spec, config);
  ctx.write("checkpoint.json", trained.model.checkpoint());
  if (trained.history) ctx.write("history.csv", trained.history->to_csv());

  json results{{"model", kind}, {"n_train", trained.n_train}, {"n_validation", trained.n_validation}};
  if (trained.history) {
    results["best_epoch"] = trained.history->best_epoch;
    results["epochs_run"] = trained.history->epochs.size();
  }
  if (doc.contains("test_manifest")) {
    const auto test = usable(ctx, load_records(ctx, "test_manifest"), impute != ImputeMode::none, "test");
    const auto preds = trained.model.predict_records(test);
    results["test"] = report_json(evaluate(preds, test));
    ctx.write("predictions.csv", predictions_csv(preds, test));
  }
  ctx.write_report("train", results);
  ctx.log() << "trained " << kind << " model on " << trained.n_train << " records\n";
  return 0;
}

int cmd_eval(Context& ctx) {
  ctx.allow({"config_version", "seed", "checkpoint", "test_manifest", "scores", "prefer_external"});
  const fs::path checkpoint = ctx.path("checkpoint");
  ctx.record_input("checkpoint", checkpoint);
  const AnyModel model = load_any(checkpoint);
  const auto test = usable(ctx, load_records(ctx, "test_manifest"), model.features().impute_means.has_value(), "test");
  const auto preds = model.predict_records(test);
  ctx.write("predictions.csv", predictions_csv(preds, test));
  ctx.write_report("eval", {{"model", model.kind()}, {"test", report_json(evaluate(preds, test))}});
  return 0;
}


int cmd_sweep(Context& ctx) {
  ctx.allow({"config_version", "seed", "train_manifest", "test_manifest", "scores", "prefer_external", "model", "variant",
             "impute", "split", "training", "fractions", "seeds", "nested"});
  const json& doc = ctx.doc();
  const auto kind = model_kind(doc);
  const Variant variant = parse_variant(doc);
  const ImputeMode impute = parse_impute(doc);
  auto fractions = Context::get<std::vector<double>>(doc, "fractions", kSweepFractions);
  const auto seeds = Context::get<std::vector<std::uint64_t>>(doc, "seeds", {0, 1, 2});
  const bool nested = Context::get<bool>(doc, "nested", false);
  std::sort(fractions.begin(), fractions.end());
  if (fractions.empty() || fractions.back() != 1.0) throw InvalidArgument("sweep: fractions must include 1.0");
  if (std::adjacent_find(fractions.begin(), fractions.end()) != fractions.end()) {
    throw InvalidArgument("sweep: duplicate fractions");
  }
  if (seeds.empty()) throw InvalidArgument("sweep: seeds must not be empty");
  // Validate the shared sections once up front.
  parse_split(doc, 0);
  parse_training(doc, 0, variant);

  const auto train_records = usable(ctx, load_records(ctx, "train_manifest"), impute != ImputeMode::none, "train");
  const auto test = usable(ctx, load_records(ctx, "test_manifest"), impute != ImputeMode::none, "test");

  struct Cell {
    double fraction;
    std::uint64_t seed;
    std::size_t n_train = 0;
    EvalReport report;
  };
  std::vector<Cell> cells;
  for (double f : fractions) {
    for (std::uint64_t s : seeds) cells.push_back({f, ctx.seed() + s, 0, {}});
  }
  parallel_for(cells.size(), ctx.jobs(), [&](std::size_t k) {
    Cell& cell = cells[k];
    const auto subset = subsample(train_records, cell.fraction, cell.seed, nested);
    const Trained trained =
        fit(kind, subset, variant, impute, parse_split(doc, cell.seed), parse_training(doc, cell.seed, variant));
    cell.n_train = subset.size();
    cell.report = evaluate(trained.model.predict_records(test), test);
  });

  const bool has_q = head_count(variant) == 2;
  std::string runs = "fraction,seed,n_train,quality_pcc,quality_srcc,intelligibility_pcc,intelligibility_srcc\n";
  for (const auto& c : cells) {
    runs += csv::join_row({csv::format_double(c.fraction), std::to_string(c.seed), std::to_string(c.n_train),
                           has_q ? csv::format_double(c.report.quality->pcc) : "",
                           has_q ? csv::format_double(c.report.quality->srcc) : "",
                           csv::format_double(c.report.intelligibility->pcc),
                           csv::format_double(c.report.intelligibility->srcc)});
  }
  ctx.write("sweep_runs.csv", runs);

  struct Mean {
    double q_pcc = 0, q_srcc = 0, i_pcc = 0, i_srcc = 0;
    std::size_t n_train = 0;
  };
  std::vector<Mean> means(fractions.size());
  const double inv = 1.0 / static_cast<double>(seeds.size());
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      const Cell& c = cells[fi * seeds.size() + si];
      if (has_q) {
        means[fi].q_pcc += c.report.quality->pcc * inv;
        means[fi].q_srcc += c.report.quality->srcc * inv;
      }
      means[fi].i_pcc += c.report.intelligibility->pcc * inv;
      means[fi].i_srcc += c.report.intelligibility->srcc * inv;
      means[fi].n_train = c.n_train;
    }
  }
  const Mean& full = means.back();
  const auto pc = [](double full_pcc, double pcc) { return 100.0 * (full_pcc - pcc) / full_pcc; };
  std::string summary =
      "fraction,n_train,quality_pcc,quality_srcc,quality_pc,intelligibility_pcc,intelligibility_srcc,intelligibility_pc\n";
  json rows = json::array();
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    const Mean& m = means[fi];
    const double q_pc = fi + 1 == fractions.size() ? 0.0 : pc(full.q_pcc, m.q_pcc);
    const double i_pc = fi + 1 == fractions.size() ? 0.0 : pc(full.i_pcc, m.i_pcc);
    summary += csv::join_row({csv::format_double(fractions[fi]), std::to_string(m.n_train),
                              has_q ? csv::format_double(m.q_pcc) : "", has_q ? csv::format_double(m.q_srcc) : "",
                              has_q ? csv::format_double(q_pc) : "", csv::format_double(m.i_pcc),
                              csv::format_double(m.i_srcc), csv::format_double(i_pc)});
    json row{{"fraction", fractions[fi]},
             {"n_train", m.n_train},
             {"intelligibility", {{"pcc", m.i_pcc}, {"srcc", m.i_srcc}, {"pc", i_pc}}}};
    if (has_q) row["quality"] = {{"pcc", m.q_pcc}, {"srcc", m.q_srcc}, {"pc", q_pc}};
    rows.push_back(row);
  }
  ctx.write("sweep.csv", summary);
  json seeds_used = json::array();
  for (std::uint64_t s : seeds) seeds_used.push_back(ctx.seed() + s);
  ctx.write_report("sweep", {{"model", kind}, {"seeds", seeds_used}, {"fractions", rows}, {"n_test", test.size()}});
  return 0;
}


int cmd_probe(Context& ctx) {
  ctx.allow({"config_version", "seed", "checkpoint", "train_manifest", "scores", "prefer_external", "measures",
             "repetitions", "samples_per_rep", "bins", "ridge"});
  const json& doc = ctx.doc();
  const fs::path checkpoint = ctx.path("checkpoint");
  ctx.record_input("checkpoint", checkpoint);
  const AnyModel any = load_any(checkpoint);
  if (!any.fusion) throw InvalidArgument("probe: checkpoint must be a fusion model");
  const FusionModel& model = *any.fusion;

  ProbeSettings settings;
  settings.seed = ctx.seed();
  settings.jobs = ctx.jobs();
  settings.repetitions = Context::get<std::size_t>(doc, "repetitions", settings.repetitions);
  settings.samples_per_rep = Context::get<std::size_t>(doc, "samples_per_rep", settings.samples_per_rep);
  settings.bins = Context::get<std::size_t>(doc, "bins", settings.bins);
  const double ridge = Context::get<double>(doc, "ridge", 1e-6);
  const auto& names = model.features.normalizer.names();
  const auto requested = Context::get<std::vector<std::string>>(doc, "measures", names);

  const auto train_records =
      usable(ctx, load_records(ctx, "train_manifest"), model.features.impute_means.has_value(), "train");
  const GaussianSpec spec = fit_gaussian(model.features.inputs(train_records), ridge);

  json files = json::array();
  for (const auto& name : requested) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InvalidArgument("probe: model has no input named '" + name + "'");
    const auto curve = probe_measure(model, spec, static_cast<std::size_t>(it - names.begin()), settings);
    const std::string file = "probe_" + name + ".csv";
    ctx.write(file, curve.to_csv());
    files.push_back(file);
  }
  ctx.write_report("probe", {{"files", files},
                             {"gaussian_mean", spec.mean},
                             {"n_fit", train_records.size()},
                             {"repetitions", settings.repetitions},
                             {"samples_per_rep", settings.samples_per_rep},
                             {"bins", settings.bins}});
  return 0;
}


int cmd_synth(Context& ctx) {
  ctx.allow({"config_version", "seed", "n", "n_test", "noise_std_q", "noise_std_i", "shared_latent_weight", "with_audio",
             "audio_duration_s", "audio_rate_hz"});
  const json& doc = ctx.doc();
  SynthConfig train_cfg;
  train_cfg.seed = ctx.seed();
  train_cfg.n = Context::get<std::size_t>(doc, "n", train_cfg.n);
  train_cfg.noise_std_q = Context::get<double>(doc, "noise_std_q", train_cfg.noise_std_q);
  train_cfg.noise_std_i = Context::get<double>(doc, "noise_std_i", train_cfg.noise_std_i);
  train_cfg.shared_latent_weight = Context::get<double>(doc, "shared_latent_weight", train_cfg.shared_latent_weight);
  train_cfg.with_audio = Context::get<bool>(doc, "with_audio", false);
  train_cfg.audio_duration_s = Context::get<double>(doc, "audio_duration_s", train_cfg.audio_duration_s);
  train_cfg.audio_rate_hz = Context::get<int>(doc, "audio_rate_hz", train_cfg.audio_rate_hz);
  const auto n_test = Context::get<std::size_t>(doc, "n_test", 0);

  struct Part {
    std::string file;
    SynthConfig cfg;
  };
  std::vector<Part> parts{{"train.csv", train_cfg}};
  if (n_test > 0) {
    SynthConfig test_cfg = train_cfg;
    test_cfg.n = n_test;
    test_cfg.seed = mix_seed(train_cfg.seed, 1);
    test_cfg.id_prefix = "syt";
    parts.push_back({"test.csv", test_cfg});
  }

  json results;
  for (const auto& part : parts) {
    const SynthResult r = synth_generate(part.cfg);
    ctx.write(part.file, format_manifest(r.records));
    if (part.cfg.with_audio) {
      fs::create_directories(ctx.out("wav"));
      for (std::size_t k = 0; k < r.records.size(); ++k) {
        const auto audio = synth_audio(r.records[k], k, part.cfg);
        write_wav(ctx.out(r.records[k].clean_path->string()), audio.first);
        write_wav(ctx.out(r.records[k].degraded_path->string()), audio.second);
      }
    }
    std::vector<double> q, i;
    for (const auto& rec : r.records) {
      q.push_back(rec.subj_quality);
      i.push_back(rec.subj_intelligibility);
    }
    results[part.file] = {{"n", r.records.size()},
                          {"seed", part.cfg.seed},
                          {"clip_rate_quality", r.clip_rate_quality},
                          {"clip_rate_intelligibility", r.clip_rate_intelligibility},
                          {"pcc_quality_intelligibility", pearson(q, i)}};
    ctx.log() << "wrote " << r.records.size() << " records to " << ctx.out(part.file).string() << "\n";
  }
  ctx.write_report("synth", results);
  return 0;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"measure", "correlate", "train", "eval", "sweep", "probe", "synth"};
  return names;
}

int run(const std::string& command, const Options& options, std::ostream& log) {
  if (std::find(command_names().begin(), command_names().end(), command) == command_names().end()) {
    throw InvalidArgument("unknown command '" + command + "'");
  }
  Context ctx(options, log);
  if (command == "measure") return cmd_measure(ctx);
  if (command == "correlate") return cmd_correlate(ctx);
  if (command == "train") return cmd_train(ctx);
  if (command == "eval") return cmd_eval(ctx);
  if (command == "sweep") return cmd_sweep(ctx);
  if (command == "probe") return cmd_probe(ctx);
  return cmd_synth(ctx);
}

}  // namespace sqi::harness
