#include <doctest.h>

#include "faultae/detector.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace faultae;
using namespace faultae::testing;

namespace {

ScoreSeries train_scores(std::vector<double> s) {
  ScoreSeries out;
  out.scores = std::move(s);
  for (std::size_t i = 0; i < out.scores.size(); ++i) out.alignment.push_back(static_cast<Index>(i));
  out.source = Partition::train;
  return out;
}

Snapshots snapshots_of(const Matrix& x, Partition p = Partition::test) {
  std::vector<Index> rows;
  for (Index i = 0; i < x.rows(); ++i) rows.push_back(i);
  return make_snapshots(x, LabelVector(static_cast<std::size_t>(x.rows()), false), rows, p);
}

}  // namespace

TEST_SUITE("detector") {
  TEST_CASE("pointwise mse examples") {
    const Matrix x = Matrix::Random(4, 3);
    CHECK(pointwise_mse(x, x).isZero());
    CHECK(pointwise_mse(Matrix::Zero(1, 2), Matrix::Ones(1, 2))(0) == 1.0);
    Rng rng(1);
    const Matrix a = random_matrix(30, 5, rng), b = random_matrix(30, 5, rng);
    const Vector s = pointwise_mse(a, b);
    for (Index i = 0; i < 30; ++i) {
      double acc = 0.0;
      for (Index j = 0; j < 5; ++j) acc += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
      CHECK(s(i) == doctest::Approx(acc / 5).epsilon(1e-14));
    }
  }

  TEST_CASE("window scores equal flatten then pointwise") {
    const auto model = LstmAE::create(3, 5, 2);
    Rng rng(2);
    const Matrix frames = random_matrix(12, 3, rng, 0, 1);
    const auto windows = make_windows(frames, LabelVector(12, false), {5, 1});
    const auto scores = score_window_mse(model, windows);
    REQUIRE(scores.size() == 8);
    CHECK(scores.kind == ScoreKind::mse_window);
    CHECK(scores.alignment == windows.end_indices);
    for (Index w = 0; w < windows.size(); ++w) {
      Sequence one;
      for (Index t = 0; t < 5; ++t) one.push_back(windows.window(w).row(t));
      const auto rec = lstm_ae_forward(one, model).reconstruction;
      Matrix flat_x(1, 15), flat_r(1, 15);
      for (Index t = 0; t < 5; ++t) {
        flat_x.block(0, t * 3, 1, 3) = one[static_cast<std::size_t>(t)];
        flat_r.block(0, t * 3, 1, 3) = rec[static_cast<std::size_t>(t)];
      }
      CHECK(scores.scores[static_cast<std::size_t>(w)] == doctest::Approx(pointwise_mse(flat_x, flat_r)(0)).epsilon(1e-12));
    }
  }

  TEST_CASE("mahalanobis distance examples and identities") {
    Matrix x = Matrix::Zero(1, 2), r(1, 2);
    r << 3, 4;
    CHECK(mahalanobis_distance(x, r, covariance_from_sigma(Matrix::Identity(2, 2)))(0) == doctest::Approx(5.0));
    CHECK(mahalanobis_distance(x, x, covariance_from_sigma(Matrix::Identity(2, 2)))(0) == 0.0);

    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const auto cov = covariance_from_sigma(random_spd(6, rng));
      const Matrix a = random_matrix(20, 6, rng), b = random_matrix(20, 6, rng);
      const Vector d = mahalanobis_distance(a, b, cov);
      const Matrix white = (b - a) * cov.inverse_sqrt;
      for (Index i = 0; i < 20; ++i) CHECK(std::abs(d(i) - white.row(i).norm()) < 1e-10);
    }

    const auto model = DenseAE::create(6, 3);
    const auto items = snapshots_of(random_matrix(40, 6, rng, 0, 1));
    const auto mse = score_pointwise_mse(model, items);
    const auto maha = score_mahalanobis(model, covariance_from_sigma(Matrix::Identity(6, 6)), items);
    for (std::size_t i = 0; i < mse.size(); ++i) CHECK(std::abs(maha.scores[i] - std::sqrt(6 * mse.scores[i])) < 1e-10);
    CHECK_THROWS_AS(score_mahalanobis(model, covariance_from_sigma(Matrix::Identity(5, 5)), items), ValidationError);
  }

  TEST_CASE("scores do not depend on batch order") {
    const auto model = DenseAE::create(4, 5);
    Rng rng(5);
    const Matrix x = random_matrix(50, 4, rng, 0, 1);
    const Matrix reversed = x.colwise().reverse();
    const auto a = score_pointwise_mse(model, snapshots_of(x));
    const auto b = score_pointwise_mse(model, snapshots_of(reversed));
    for (std::size_t i = 0; i < 50; ++i) CHECK(a.scores[i] == doctest::Approx(b.scores[49 - i]).epsilon(1e-14));
  }

  TEST_CASE("percentile threshold examples") {
    std::vector<double> s;
    for (int i = 1; i <= 100; ++i) s.push_back(i);
    CHECK(fit_threshold(train_scores(s), 95).tau == doctest::Approx(95.05).epsilon(1e-14));
    CHECK(fit_threshold(train_scores(s), 100).tau == 100.0);
    CHECK(fit_threshold(train_scores({2.5, 2.5, 2.5}), 37).tau == 2.5);
    CHECK(fit_threshold(train_scores({0.7}), 95).tau == 0.7);
    CHECK_THROWS_AS(fit_threshold(train_scores(s), 0), ValidationError);
    CHECK_THROWS_AS(fit_threshold(train_scores(s), 100.5), ValidationError);
    CHECK_THROWS_AS(fit_threshold(train_scores({}), 95), ValidationError);
  }

  TEST_CASE("thresholds match the oracle, are monotone and respect their own fit set") {
    Rng rng(6);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> s(1 + rng.below(300));
      for (auto& v : s) v = rng.uniform() < 0.1 ? 1.0 : std::exp(rng.normal());
      const double alpha = rng.uniform(1, 100);
      const auto spec = fit_threshold(train_scores(s), alpha);
      CHECK(spec.tau == percentile_oracle(s, alpha));
      CHECK(fit_threshold(train_scores(s), std::min(100.0, alpha + 3)).tau >= spec.tau);
      const auto at95 = fit_threshold(train_scores(s), 95);
      const auto flags = detect(train_scores(s), at95);
      const double frac = static_cast<double>(std::count(flags.begin(), flags.end(), true)) / static_cast<double>(s.size());
      CHECK(frac <= 0.05 + 1.0 / static_cast<double>(s.size()));
    }
  }

  TEST_CASE("detection is strict and kind checked") {
    ThresholdSpec spec{95, 0.5, ScoreKind::mse_point, 3};
    auto s = train_scores({0.1, 0.5, 0.9});
    CHECK(detect(s, spec) == LabelVector{false, false, true});
    spec.tau = 10;
    CHECK(detect(s, spec) == LabelVector{false, false, false});
    spec.kind = ScoreKind::mahalanobis;
    CHECK_THROWS_AS(detect(s, spec), ValidationError);
  }

  TEST_CASE("thresholds refuse non-training scores") {
    auto s = train_scores({1, 2, 3});
    s.source = Partition::test;
    CHECK_THROWS_AS(fit_threshold(s, 95), ValidationError);
    s.source = Partition::validation;
    CHECK_THROWS_AS(fit_threshold(s, 95), ValidationError);
  }

  TEST_CASE("latent export matches the forward pass") {
    CHECK(extract_latent(DenseAE::zeros(5), Matrix::Random(3, 5)).isZero());
    const auto model = DenseAE::create(5, 8);
    Rng rng(8);
    const Matrix x = random_matrix(11, 5, rng, 0, 1);
    const Matrix z = extract_latent(model, x);
    CHECK(z.rows() == 11);
    CHECK(z.cols() == 8);
    CHECK(z == dense_ae_forward(x, model).latent);

    const auto lstm = LstmAE::create(3, 5, 8);
    const auto windows = make_windows(random_matrix(9, 3, rng, 0, 1), LabelVector(9, false), {5, 1});
    const Matrix zl = extract_latent(lstm, windows);
    CHECK(zl.rows() == windows.size());
    CHECK(zl.cols() == 8);
    Sequence first;
    for (Index t = 0; t < 5; ++t) first.push_back(windows.window(0).row(t));
    CHECK(zl.row(0) == lstm_ae_forward(first, lstm).latent.row(0));
  }

  TEST_CASE("score and latent csv layout") {
    TempDir dir("detector");
    ScoreSeries s;
    s.scores = {0.25, 2.0};
    s.alignment = {3, 4};
    write_scores_csv(dir / "s.csv", s, {false, true}, {"t0", "t1", "t2", "t3", "t4"});
    CHECK(read_text(dir / "s.csv") == "index,timestamp,score,flagged\n3,t3,0.25,0\n4,t4,2,1\n");
    write_latent_csv(dir / "z.csv", Matrix::Zero(1, 8), {0}, {"t0"});
    CHECK(read_text(dir / "z.csv") == "index,timestamp,z1,z2,z3,z4,z5,z6,z7,z8\n0,t0,0,0,0,0,0,0,0,0\n");
  }
}
