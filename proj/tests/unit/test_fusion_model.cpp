#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gradient_check.hpp"
#include "sqi/error.hpp"
#include "sqi/fusion_model.hpp"
#include "sqi/linear_model.hpp"
#include "sqi/stats.hpp"
#include "sqi/synth.hpp"

using namespace sqi;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.data) v = u(rng);
  return m;
}

std::vector<UtteranceRecord> synth_records(std::size_t n, std::uint64_t seed, double noise_q = 0.15, double noise_i = 0.35) {
  SynthConfig c;
  c.n = n;
  c.seed = seed;
  c.noise_std_q = noise_q;
  c.noise_std_i = noise_i;
  return synth_generate(c).records;
}

TrainConfig quick_config(std::uint64_t seed, std::size_t epochs = 30) {
  TrainConfig c;
  c.seed = seed;
  c.max_epochs = epochs;
  c.patience = 10;
  return c;
}

std::vector<double> column(const std::vector<Prediction>& p, bool quality) {
  std::vector<double> v;
  for (const auto& x : p) v.push_back(quality ? *x.quality : x.intelligibility);
  return v;
}

std::vector<double> truth(const std::vector<UtteranceRecord>& r, bool quality) {
  std::vector<double> v;
  for (const auto& x : r) v.push_back(quality ? x.subj_quality : x.subj_intelligibility);
  return v;
}

}  // namespace

TEST_CASE("init_model shapes and determinism") {
  const auto a = init_model(7, Variant::standard);
  const auto b = init_model(7, Variant::standard);
  CHECK(a == b);
  CHECK(a.layers.size() == 6);
  CHECK(a.layers[0].out == 128);
  CHECK(a.layers[0].in == 12);
  CHECK(a.layers[0].weight.size() == 128 * 12);
  CHECK(a.widths() == std::vector<std::size_t>{128, 64, 64, 32, 16, 2});
  CHECK(a.output_dim() == 2);
  const auto aug = init_model(7, Variant::augmented);
  CHECK(aug.input_dim == 13);
  CHECK(aug.output_dim() == 1);
  CHECK(init_model(8, Variant::standard) != a);
  for (const auto& layer : a.layers)
    for (double v : layer.bias) CHECK(v == 0.0);
  CHECK_THROWS_AS(init_model(1, 12, {4, 0, 2}), InvalidArgument);
  CHECK_THROWS_AS(init_model(1, 0, {4, 2}), InvalidArgument);
}

TEST_CASE("first-layer weight spread matches sqrt(2 / fan_in)") {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (double w : init_model(seed, Variant::standard).layers[0].weight) {
      sum += w;
      sum_sq += w * w;
      ++n;
    }
  }
  const double mean = sum / n;
  const double std = std::sqrt(sum_sq / n - mean * mean);
  CHECK(std::abs(std - std::sqrt(2.0 / 12.0)) < 0.05 * std::sqrt(2.0 / 12.0));
}

TEST_CASE("forward on a zero model and output range") {
  auto m = init_model(1, Variant::standard);
  for (auto& layer : m.layers) {
    std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  std::mt19937_64 rng(2);
  const auto out = forward(m, random_matrix(5, 12, rng));
  for (double v : out.data) CHECK(v == 0.5);

  const auto m2 = init_model(3, Variant::standard);
  const auto big = forward(m2, random_matrix(20, 12, rng, -50.0, 50.0));
  for (double v : big.data) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK_THROWS_AS(forward(m2, Matrix(2, 11)), InvalidArgument);
}

TEST_CASE("batch of one equals the matching row of a batch") {
  const auto m = init_model(4, Variant::standard);
  std::mt19937_64 rng(5);
  const auto x = random_matrix(37, 12, rng);
  const auto all = forward(m, x);
  for (std::size_t r = 0; r < x.rows; ++r) {
    Matrix one(1, 12);
    std::copy(x.row(r).begin(), x.row(r).end(), one.data.begin());
    const auto single = forward(m, one);
    for (std::size_t h = 0; h < 2; ++h) CHECK(std::abs(single(0, h) - all(r, h)) < 1e-12);
  }
}

TEST_CASE("gelu and its derivative") {
  CHECK(gelu(0.0) == 0.0);
  CHECK(gelu(10.0) == doctest::Approx(10.0));
  CHECK(std::abs(gelu(-10.0)) < 1e-20);
  CHECK(gelu(1.0) == doctest::Approx(0.5 * (1.0 + std::erf(1.0 / std::sqrt(2.0)))));
  for (double x : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
    const double h = 1e-6;
    CHECK(gelu_derivative(x) == doctest::Approx((gelu(x + h) - gelu(x - h)) / (2 * h)).epsilon(1e-7));
  }
}

TEST_CASE("perfect predictions give zero loss and zero output gradients") {
  const auto m = init_model(6, Variant::standard);
  std::mt19937_64 rng(7);
  const auto x = random_matrix(16, 12, rng);
  const auto y = forward(m, x);
  const auto lg = loss_and_gradient(m, x, y, std::vector<double>{0.5, 0.5});
  CHECK(lg.loss == 0.0);
  for (double g : lg.grad.weight.back()) CHECK(g == 0.0);
  for (double g : lg.grad.bias.back()) CHECK(g == 0.0);
}

TEST_CASE("finite differences on a three-layer toy model") {
  std::mt19937_64 rng(8);
  for (std::uint64_t p = 0; p < 10; ++p) {
    const auto m = test::random_point(p, 4, {6, 5, 2});
    const auto x = random_matrix(9, 4, rng);
    const auto y = random_matrix(9, 2, rng);
    const auto r = test::check_gradient(m, x, y, {0.5, 0.5}, 10, rng);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("finite differences on the full network") {
  std::mt19937_64 rng(9);
  for (std::uint64_t p = 0; p < 5; ++p) {
    const auto m = test::random_point(100 + p, 12, {128, 64, 64, 32, 16, 2});
    const auto x = random_matrix(8, 12, rng);
    const auto y = random_matrix(8, 2, rng);
    CHECK(test::check_gradient(m, x, y, {0.3, 0.7}, 6, rng).max_rel_error < 1e-4);
  }
}

TEST_CASE("head weight scales its head's gradient") {
  const auto m = test::random_point(10, 12, {128, 64, 64, 32, 16, 2});
  std::mt19937_64 rng(11);
  const auto x = random_matrix(12, 12, rng);
  auto y = forward(m, x);
  for (std::size_t r = 0; r < y.rows; ++r) y(r, 0) = 0.2;  // intelligibility head is exact
  const auto g1 = loss_and_gradient(m, x, y, std::vector<double>{0.5, 0.5});
  const auto g2 = loss_and_gradient(m, x, y, std::vector<double>{1.0, 0.5});
  CHECK(g2.grad.bias.back()[0] == doctest::Approx(2.0 * g1.grad.bias.back()[0]).epsilon(1e-12));
  CHECK(g2.loss == doctest::Approx(2.0 * g1.loss).epsilon(1e-12));
}

TEST_CASE("non-finite inputs are reported") {
  const auto m = init_model(12, Variant::standard);
  Matrix x(2, 12, 0.5), y(2, 2, 0.5);
  x(1, 3) = std::nan("");
  CHECK_THROWS_AS(loss_and_gradient(m, x, y, std::vector<double>{0.5, 0.5}), NumericError);
  CHECK_THROWS_AS(loss(m, x, y, std::vector<double>{0.5, 0.5}), NumericError);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate(2));
  CHECK_THROWS_AS(c.validate(1), InvalidArgument);
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(2), InvalidArgument);
  c = TrainConfig{};
  c.head_weights = {0.0, 0.0};
  CHECK_THROWS_AS(c.validate(2), InvalidArgument);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(2), InvalidArgument);
}

TEST_CASE("constant targets are learned") {
  std::mt19937_64 rng(13);
  Examples tr{random_matrix(256, 12, rng), Matrix(256, 2, 0.3)};
  Examples va{random_matrix(64, 12, rng), Matrix(64, 2, 0.3)};
  auto c = quick_config(1, 50);
  c.patience = 50;
  const auto result = train(init_model(1, Variant::standard), tr, va, c);
  const auto pred = forward(result.model, va.inputs);
  double m = 0.0;
  for (double v : pred.data) m += (v - 0.3) * (v - 0.3);
  CHECK(m / static_cast<double>(pred.data.size()) < 1e-4);
}

TEST_CASE("training is deterministic and early stopping keeps the best epoch") {
  const auto records = synth_records(600, 3);
  const std::vector<UtteranceRecord> tr(records.begin(), records.begin() + 500);
  const std::vector<UtteranceRecord> va(records.begin() + 500, records.end());
  const auto c = quick_config(5, 40);
  const auto a = train_fusion(tr, va, c);
  const auto b = train_fusion(tr, va, c);
  CHECK(a.history == b.history);
  CHECK(a.model == b.model);
  const auto& h = a.history;
  REQUIRE(!h.epochs.empty());
  double best = h.epochs.front().val_loss;
  for (const auto& e : h.epochs) best = std::min(best, e.val_loss);
  REQUIRE(h.best_epoch >= 1);
  CHECK(h.epochs[h.best_epoch - 1].epoch == h.best_epoch);
  CHECK(h.epochs[h.best_epoch - 1].val_loss == best);
  const Examples val{a.model.features.inputs(va), targets(va, Variant::standard)};
  CHECK(loss(a.model, val.inputs, val.targets, c.head_weights) == doctest::Approx(best).epsilon(1e-12));
  CHECK(h.to_csv().rfind("epoch,train_loss,val_loss\n", 0) == 0);
  CHECK_THROWS_AS(train_fusion(tr, {}, c), DegenerateInput);
  CHECK_THROWS_AS(train_fusion({}, va, c), DegenerateInput);
}

TEST_CASE("predictions denormalize with the fixed ranges") {
  const auto records = synth_records(200, 4);
  auto m = init_model(1, Variant::standard);
  m.features = fit_features(records, Variant::standard);
  for (auto& layer : m.layers) {
    std::fill(layer.weight.begin(), layer.weight.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  const auto p = predict(m, records);
  CHECK(*p[0].quality == 3.0);
  CHECK(p[0].intelligibility == 5.0);

  const auto trained = train_fusion(records, synth_records(100, 5), quick_config(2, 5)).model;
  for (const auto& q : predict(trained, records)) {
    CHECK(*q.quality > 1.0);
    CHECK(*q.quality < 5.0);
    CHECK(q.intelligibility > 0.0);
    CHECK(q.intelligibility < 10.0);
  }
  auto incomplete = records;
  incomplete[0].measures.clear(MeasureId::pesq);
  CHECK_THROWS_AS(predict(trained, incomplete), InvalidArgument);
}

TEST_CASE("train_mean imputation fills missing measures") {
  auto records = synth_records(300, 6);
  for (std::size_t i = 0; i < records.size(); i += 7) records[i].measures.clear(MeasureId::wer);
  const auto f = fit_features(records, Variant::standard, ImputeMode::train_mean);
  REQUIRE(f.impute_means.has_value());
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.measures.has(MeasureId::wer)) {
      s += *r.measures.get(MeasureId::wer);
      ++n;
    }
  CHECK((*f.impute_means)[11] == doctest::Approx(s / n).epsilon(1e-12));
  CHECK(f.raw(records[0])[11] == (*f.impute_means)[11]);
  CHECK_THROWS_AS(fit_features(records, Variant::standard).inputs(records), InvalidArgument);
}

TEST_CASE("checkpoint round trip reproduces predictions bit for bit") {
  const auto records = synth_records(300, 7);
  const auto model = train_fusion(records, synth_records(100, 8), quick_config(3, 5)).model;
  const auto text = checkpoint_json(model);
  const auto back = model_from_json(text);
  CHECK(back == model);
  const auto p1 = predict(model, records);
  const auto p2 = predict(back, records);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(*p1[i].quality == *p2[i].quality);
    CHECK(p1[i].intelligibility == p2[i].intelligibility);
  }
  CHECK(checkpoint_json(back) == text);
  std::string wrong = text;
  wrong.replace(wrong.find("\"format_version\": 1"), 19, "\"format_version\": 2");
  CHECK_THROWS_AS(model_from_json(wrong), FormatError);
  CHECK_THROWS_AS(model_from_json("{not json"), FormatError);
  CHECK_THROWS_AS(model_from_json(checkpoint_json(fit_linear_baseline(records))), FormatError);
}

TEST_CASE("min-max absorbs per-feature affine maps") {
  const auto records = synth_records(300, 9);
  const auto val = synth_records(100, 10);
  auto shift = [](std::vector<UtteranceRecord> rs) {
    for (auto& r : rs)
      for (std::size_t k = 0; k < kNumMeasures; ++k) {
        const auto id = all_measures()[k];
        r.measures.set(id, 0.5 + 0.25 * static_cast<double>(k + 1) * *r.measures.get(id));
      }
    return rs;
  };
  const auto c = quick_config(4, 5);
  const auto a = train_fusion(records, val, c).model;
  const auto b = train_fusion(shift(records), shift(val), c).model;
  const auto pa = predict(a, val);
  const auto pb = predict(b, shift(val));
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(std::abs(*pa[i].quality - *pb[i].quality) < 1e-8);
    CHECK(std::abs(pa[i].intelligibility - pb[i].intelligibility) < 1e-8);
  }
}

TEST_CASE("linear baseline") {
  std::mt19937_64 rng(15);
  const auto x = random_matrix(200, 5, rng);
  std::vector<double> y(200);
  for (std::size_t r = 0; r < 200; ++r) y[r] = 0.3 + x(r, 0) - 2.0 * x(r, 3) + 0.5 * x(r, 4);
  const auto head = fit_linear(x, y);
  double err = 0.0;
  for (std::size_t r = 0; r < 200; ++r) err += std::pow(head.predict(x.row(r)) - y[r], 2);
  CHECK(err / 200 < 1e-10);
  CHECK(head.weights[3] == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK_THROWS_AS(fit_linear(random_matrix(5, 5, rng), std::vector<double>(5, 1.0)), DegenerateInput);

  // pure-noise target: no spurious correlation
  const auto xn = random_matrix(10000, 12, rng);
  std::normal_distribution<double> g;
  std::vector<double> yn(10000);
  for (double& v : yn) v = g(rng);
  const auto null_head = fit_linear(xn, yn);
  const auto xt = random_matrix(10000, 12, rng);
  std::vector<double> pred(10000), yt(10000);
  for (std::size_t r = 0; r < 10000; ++r) {
    pred[r] = null_head.predict(xt.row(r));
    yt[r] = g(rng);
  }
  CHECK(std::abs(pearson(pred, yt)) < 0.1);

  const auto records = synth_records(500, 16);
  const auto base = fit_linear_baseline(records);
  const auto back = linear_from_json(checkpoint_json(base));
  CHECK(back == base);
  const auto p = predict(base, records);
  CHECK(pearson(column(p, true), truth(records, true)) > 0.9);
  CHECK_THROWS_AS(linear_from_json(checkpoint_json(init_model(1, Variant::standard))), FormatError);
}

TEST_CASE("augmented variant with a constant quality column matches the objective-only model") {
  auto train_set = synth_records(2000, 17);
  auto val = synth_records(200, 18);
  auto test = synth_records(400, 19);
  for (auto* rs : {&train_set, &val, &test})
    for (auto& r : *rs) r.subj_quality = 3.0;
  TrainConfig c;
  c.seed = 1;
  const auto obj = train_fusion(train_set, val, c).model;
  c.head_weights = {1.0};
  const auto aug = train_augmented(train_set, val, c).model;
  CHECK(aug.input_dim == 13);
  CHECK(aug.output_dim() == 1);
  const auto po = predict(obj, test);
  const auto pa = predict(aug, test);
  CHECK_FALSE(pa[0].quality.has_value());
  const double r_obj = pearson(column(po, false), truth(test, false));
  const double r_aug = pearson(column(pa, false), truth(test, false));
  MESSAGE("objective-only " << r_obj << ", augmented " << r_aug);
  CHECK(std::abs(r_obj - r_aug) < 0.01);
}
