#include "sqi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sqi/csv.hpp"
#include "sqi/error.hpp"

namespace sqi {

namespace {

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
  if (x.size() < 2) throw InvalidArgument("pearson: need at least two points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman: length mismatch");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw InvalidArgument("mse: length mismatch");
  if (pred.empty()) throw InvalidArgument("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------

Normalizer::Normalizer(std::vector<std::string> names, std::vector<double> mins, std::vector<double> maxs)
    : names_(std::move(names)), mins_(std::move(mins)), maxs_(std::move(maxs)) {
  if (names_.size() != mins_.size() || names_.size() != maxs_.size()) {
    throw InvalidArgument("Normalizer: names/min/max sizes differ");
  }
  for (std::size_t f = 0; f < names_.size(); ++f) {
    if (!(maxs_[f] > mins_[f]) || !std::isfinite(mins_[f]) || !std::isfinite(maxs_[f])) {
      throw InvalidArgument("Normalizer: feature '" + names_[f] + "' needs finite max > min");
    }
  }
}

void Normalizer::append(std::string name, double min, double max) {
  if (!(max > min)) throw InvalidArgument("Normalizer::append: max must exceed min");
  names_.push_back(std::move(name));
  mins_.push_back(min);
  maxs_.push_back(max);
}

bool Normalizer::Applied::any_clamped() const { return std::find(clamped.begin(), clamped.end(), true) != clamped.end(); }

double Normalizer::apply_one(std::size_t f, double raw) const {
  return std::clamp((raw - mins_[f]) / (maxs_[f] - mins_[f]), 0.0, 1.0);
}

double Normalizer::invert_one(std::size_t f, double normalized) const {
  return mins_[f] + normalized * (maxs_[f] - mins_[f]);
}

Normalizer::Applied Normalizer::apply(std::span<const double> raw) const {
  if (raw.size() != size()) throw InvalidArgument("Normalizer::apply: dimension mismatch");
  Applied out;
  out.values.resize(raw.size());
  out.clamped.resize(raw.size());
  for (std::size_t f = 0; f < raw.size(); ++f) {
    const double v = (raw[f] - mins_[f]) / (maxs_[f] - mins_[f]);
    out.clamped[f] = v < 0.0 || v > 1.0;
    out.values[f] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

std::vector<double> Normalizer::invert(std::span<const double> normalized) const {
  if (normalized.size() != size()) throw InvalidArgument("Normalizer::invert: dimension mismatch");
  std::vector<double> out(normalized.size());
  for (std::size_t f = 0; f < normalized.size(); ++f) out[f] = invert_one(f, normalized[f]);
  return out;
}

Normalizer fit_normalizer(const Matrix& features, const std::vector<std::string>& names) {
  if (features.cols != names.size()) throw InvalidArgument("fit_normalizer: names do not match columns");
  if (features.rows == 0) throw DegenerateInput("fit_normalizer: no rows");
  std::vector<double> mins(features.cols);
  std::vector<double> maxs(features.cols);
  for (std::size_t c = 0; c < features.cols; ++c) {
    double lo = features(0, c);
    double hi = lo;
    for (std::size_t r = 1; r < features.rows; ++r) {
      lo = std::min(lo, features(r, c));
      hi = std::max(hi, features(r, c));
    }
    if (!(hi > lo)) throw DegenerateInput("fit_normalizer: feature '" + names[c] + "' is constant");
    mins[c] = lo;
    maxs[c] = hi;
  }
  return Normalizer(names, std::move(mins), std::move(maxs));
}

HeadMetrics evaluate_head(std::span<const double> pred, std::span<const double> target) {
  return {mse(pred, target), pearson(pred, target), spearman(pred, target)};
}

// ---------------------------------------------------------------------------

CorrelationMatrix correlation_matrix(const Matrix& data, std::vector<std::string> names) {
  if (data.cols != names.size()) throw InvalidArgument("correlation_matrix: names do not match columns");
  if (data.rows < 2) throw DegenerateInput("correlation_matrix: need at least two complete rows");
  std::vector<std::vector<double>> cols(data.cols, std::vector<double>(data.rows));
  for (std::size_t r = 0; r < data.rows; ++r) {
    for (std::size_t c = 0; c < data.cols; ++c) cols[c][r] = data(r, c);
  }
  CorrelationMatrix out{std::move(names), Matrix(data.cols, data.cols)};
  for (std::size_t a = 0; a < data.cols; ++a) {
    out.values(a, a) = 1.0;
    for (std::size_t b = a + 1; b < data.cols; ++b) {
      const double r = pearson(cols[a], cols[b]);
      out.values(a, b) = r;
      out.values(b, a) = r;
    }
  }
  return out;
}

std::string CorrelationMatrix::to_csv() const {
  std::vector<std::string> header{"measure"};
  header.insert(header.end(), names.begin(), names.end());
  std::string out = csv::join_row(header);
  for (std::size_t a = 0; a < names.size(); ++a) {
    std::vector<std::string> row{names[a]};
    for (std::size_t b = 0; b < names.size(); ++b) row.push_back(csv::format_double(values(a, b)));
    out += csv::join_row(row);
  }
  return out;
}

}  // namespace sqi
