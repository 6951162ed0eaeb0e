#include <doctest.h>

#include "faultae/linalg.hpp"
#include "faultae/synthplant.hpp"
#include "gradient_cases.hpp"

using namespace faultae;
using namespace faultae::testing;

namespace {

struct HealthyData {
  Snapshots train, val;
  Eigen::MatrixXd scaled;
  LabelVector labels;
  SplitPlan plan;
};

HealthyData healthy_snapshots(Index n, std::uint64_t seed) {
  const auto plant = generate(PlantConfig::healthy_profile(seed, n));
  HealthyData h;
  h.labels = plant.labels;
  h.plan = plan_split(h.labels, 0.9, 0.2, seed);
  h.scaled = apply_scaler(plant.log.values(), fit_scaler(plant.log.values(), h.plan.train_pool(), h.plan));
  h.train = make_snapshots(h.scaled, h.labels, h.plan.train, Partition::train);
  h.val = make_snapshots(h.scaled, h.labels, h.plan.validation, Partition::validation);
  return h;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("mse loss examples") {
    const Matrix x = Matrix::Random(3, 4);
    CHECK(mse_loss(x, x).loss == 0.0);
    CHECK(mse_loss(Matrix::Zero(1, 2), Matrix::Ones(1, 2)).loss == 1.0);
    const Matrix z = Matrix::Zero(5, 51);
    CHECK(mse_loss(z, Matrix::Constant(5, 51, 0.1)).loss == doctest::Approx(0.01).epsilon(1e-12));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) CHECK(mse_gradient_error(seed) < 1e-6);
  }

  TEST_CASE("window mse equals flattened mse") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix a = random_matrix(5, 3, rng), b = random_matrix(5, 3, rng);
      const Matrix fa = a.reshaped<Eigen::RowMajor>(1, 15), fb = b.reshaped<Eigen::RowMajor>(1, 15);
      CHECK(window_mse_loss(a, b) == doctest::Approx(mse_loss(fa, fb).loss).epsilon(1e-14));
    }
    CHECK(window_mse_loss(Matrix(Matrix::Ones(5, 2)), Matrix(Matrix::Ones(5, 2))) == 0.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) CHECK(window_mse_gradient_error(seed) < 1e-6);
  }

  TEST_CASE("inverse square root examples") {
    CHECK(matrix_inverse_sqrt(Matrix(Matrix::Identity(3, 3)), 0.0).isApprox(Matrix::Identity(3, 3), 1e-14));
    const Matrix r = matrix_inverse_sqrt(diag2(4, 9), 0.0);
    CHECK(r(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(r(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(r(0, 1)) < 1e-15);
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix s = random_spd(8, rng);
      const Matrix m = matrix_inverse_sqrt(s, 0.0);
      CHECK((m * m * s - Matrix::Identity(8, 8)).norm() / std::sqrt(8.0) < 1e-8);
    }
    Matrix asym = diag2(1, 1);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(matrix_inverse_sqrt(asym, 0.0), ValidationError);
    CHECK_THROWS_AS(matrix_inverse_sqrt(diag2(1, -1), 0.0), NumericError);
  }

  TEST_CASE("mahalanobis loss examples and scaling identity") {
    Matrix x = Matrix::Zero(1, 2), xh(1, 2);
    xh << 3, 4;
    CHECK(mahalanobis_loss(x, xh, covariance_from_sigma(diag2(1, 1))).loss == doctest::Approx(5.0).epsilon(1e-14));
    xh << 2, 3;
    CHECK(mahalanobis_loss(x, xh, covariance_from_sigma(diag2(4, 9))).loss ==
          doctest::Approx(1.41421356).epsilon(1e-8));

    Rng rng(4);
    const Matrix a = random_matrix(7, 5, rng), b = random_matrix(7, 5, rng);
    const auto id = covariance_from_sigma(Matrix::Identity(5, 5));
    double euclid = 0.0;
    for (Index i = 0; i < 7; ++i) euclid += (b.row(i) - a.row(i)).norm();
    CHECK(mahalanobis_loss(a, b, id).loss == doctest::Approx(euclid / 7).epsilon(1e-13));
    const double sigma = 2.5;
    const auto scaled = covariance_from_sigma(sigma * sigma * Matrix::Identity(5, 5));
    CHECK(mahalanobis_loss(a, b, scaled).loss == doctest::Approx(mahalanobis_loss(a, b, id).loss / sigma).epsilon(1e-13));

    const auto zero = mahalanobis_loss(a, a, id);
    CHECK(zero.loss == 0.0);
    CHECK(zero.gradient.isZero());
    for (std::uint64_t seed = 1; seed <= 20; ++seed) CHECK(mahalanobis_gradient_error(seed) < 1e-5);
  }

  TEST_CASE("covariance estimation examples") {
    Matrix r(4, 2);
    r << 1, 0, -1, 0, 0, 1, 0, -1;
    const auto cov = covariance_from_residuals(r);
    const double eps = 1e-6 * (4.0 / 3.0) / 2.0;
    CHECK(cov.shrinkage == doctest::Approx(eps).epsilon(1e-12));
    CHECK(cov.sigma(0, 0) == doctest::Approx(2.0 / 3.0 + eps).epsilon(1e-14));
    CHECK(cov.sigma(1, 1) == doctest::Approx(2.0 / 3.0 + eps).epsilon(1e-14));
    CHECK(cov.sigma(0, 1) == 0.0);
    CHECK(cov.fitted_on == 4);

    const auto flat = covariance_from_residuals(Matrix::Constant(5, 3, 0.7));
    CHECK(flat.sigma.isApprox(flat.shrinkage * Matrix::Identity(3, 3)));
    CHECK(flat.shrinkage > 0.0);

    Rng rng(6);
    const auto rand = covariance_from_residuals(random_matrix(40, 6, rng));
    CHECK(rand.sigma == rand.sigma.transpose());
    CHECK((rand.inverse_sqrt * rand.inverse_sqrt - rand.inverse).norm() / rand.inverse.norm() < 1e-8);
    CHECK_THROWS_AS(covariance_from_residuals(random_matrix(6, 6, rng)), ValidationError);
  }

  TEST_CASE("training with zero epochs leaves the model untouched") {
    auto data = healthy_snapshots(600, 1);
    auto model = DenseAE::create(8, 3);
    const auto before = model;
    TrainConfig cfg;
    cfg.max_epochs = 0;
    const auto result = train(model, data.train, data.val, cfg);
    CHECK(result.report.epochs.empty());
    for (std::size_t k = 0; k < 6; ++k) CHECK(model.layers[k].weight == before.layers[k].weight);
  }

  TEST_CASE("training is deterministic and converges on healthy data") {
    auto data = healthy_snapshots(5000, 2);
    auto a = DenseAE::create(8, 2), b = DenseAE::create(8, 2);
    TrainConfig cfg;
    cfg.seed = 2;
    const auto ra = train(a, data.train, data.val, cfg);
    const auto rb = train(b, data.train, data.val, cfg);
    for (std::size_t k = 0; k < 6; ++k) CHECK(a.layers[k].weight == b.layers[k].weight);
    REQUIRE(ra.report.epochs.size() == rb.report.epochs.size());
    for (std::size_t e = 0; e < ra.report.epochs.size(); ++e)
      CHECK(ra.report.epochs[e].val_loss == rb.report.epochs[e].val_loss);

    const auto& ep = ra.report.epochs;
    REQUIRE(!ep.empty());
    CHECK(ep.size() <= 25);
    CHECK(ep.back().val_loss < 0.2 * ep.front().val_loss);

    // Best epoch holds the minimum logged validation loss.
    double best = ep.front().val_loss;
    for (const auto& e : ep) best = std::min(best, e.val_loss);
    CHECK(ep[static_cast<std::size_t>(ra.report.best_epoch - 1)].val_loss == best);
    // Restored weights reproduce the best validation loss.
    CHECK(mse_loss(data.val.values, dense_ae_forward(data.val.values, a).reconstruction).loss ==
          doctest::Approx(best).epsilon(1e-9));
  }

  TEST_CASE("learning rate only ever drops by the plateau factor") {
    auto data = healthy_snapshots(1500, 4);
    auto model = DenseAE::create(8, 4);
    TrainConfig cfg;
    cfg.max_epochs = 40;
    cfg.plateau_patience = 1;
    cfg.es_patience = 30;
    cfg.learning_rate = 0.05;
    const auto r = train(model, data.train, data.val, cfg);
    int drops = 0;
    for (std::size_t e = 1; e < r.report.epochs.size(); ++e) {
      const double prev = r.report.epochs[e - 1].learning_rate, cur = r.report.epochs[e].learning_rate;
      CHECK(cur <= prev);
      if (cur < prev) {
        ++drops;
        CHECK(cur == doctest::Approx(prev * 0.2).epsilon(1e-15));
      }
    }
    CHECK(drops > 0);
  }

  TEST_CASE("mahalanobis training freezes a covariance after warm-up") {
    auto data = healthy_snapshots(2000, 5);
    auto model = DenseAE::create(8, 5);
    TrainConfig cfg;
    cfg.loss = LossKind::mahalanobis;
    cfg.max_epochs = 8;
    const auto r = train(model, data.train, data.val, cfg);
    REQUIRE(r.covariance.has_value());
    CHECK(r.covariance->fitted_on == data.train.size());
    CHECK(r.report.monitor_from == 6);
    // Warm-up epochs log MSE, later epochs the whitened norm, which is far larger.
    CHECK(r.report.epochs[4].val_loss < 0.1);
    CHECK(r.report.epochs[5].val_loss > 0.5);
  }

  TEST_CASE("leakage guards in training") {
    auto data = healthy_snapshots(600, 6);
    auto model = DenseAE::create(8, 6);
    TrainConfig cfg;
    cfg.max_epochs = 1;
    auto dirty = data.train;
    dirty.labels[3] = true;
    CHECK_THROWS_AS(train(model, dirty, data.val, cfg), ValidationError);
    auto dirty_val = data.val;
    dirty_val.labels[0] = true;
    CHECK_THROWS_AS(train(model, data.train, dirty_val, cfg), ValidationError);
    auto test_like = data.train;
    test_like.partition = Partition::test;
    CHECK_THROWS_AS(train(model, test_like, data.val, cfg), ValidationError);
    CHECK_THROWS_AS(estimate_residual_covariance(model, data.val), ValidationError);
    CHECK_NOTHROW(estimate_residual_covariance(model, data.train));
  }

  TEST_CASE("LSTM training runs, restores and rejects the mahalanobis loss") {
    auto data = healthy_snapshots(800, 7);
    const auto pool = data.plan.train_pool();
    auto windows = make_partition_windows(data.scaled, data.labels, pool, {5, 1}, Partition::train);
    std::vector<Index> tr, va;
    for (Index i = 0; i < windows.size(); ++i) (i % 5 == 0 ? va : tr).push_back(i);
    auto train_w = windows.select(tr), val_w = windows.select(va);
    val_w.partition = Partition::validation;
    auto model = LstmAE::create(8, 5, 7);
    auto cfg = TrainConfig::lstm_defaults();
    CHECK(cfg.learning_rate == 1e-3);
    cfg.max_epochs = 3;
    const auto r = train(model, train_w, val_w, cfg);
    CHECK(r.report.epochs.size() == 3);
    CHECK_FALSE(r.covariance.has_value());
    cfg.loss = LossKind::mahalanobis;
    CHECK_THROWS_AS(train(model, train_w, val_w, cfg), ValidationError);
  }
}
