#include <doctest.h>
#include <cmath>

#include "faultae/nn/adam.hpp"
#include "faultae/nn/callbacks.hpp"
#include "faultae/nn/dense.hpp"
#include "faultae/nn/lstm.hpp"
#include "faultae/nn/sequence_ops.hpp"
#include "gradient_cases.hpp"

using namespace faultae;
using namespace faultae::nn;
using namespace faultae::testing;

TEST_SUITE("nn") {
  TEST_CASE("dense forward examples") {
    auto zero = DenseLayer<double>::zeros(3, 2, Activation::tanh);
    CHECK(dense_forward(Matrix::Ones(4, 3), zero).isZero());

    DenseLayer<double> one{Matrix::Constant(1, 1, 1.0), Vector::Zero(1), Activation::tanh};
    CHECK(dense_forward(Matrix::Constant(1, 1, 0.5), one)(0, 0) == doctest::Approx(0.46211716).epsilon(1e-8));

    DenseLayer<double> id{Matrix::Identity(3, 3), Vector::Zero(3), Activation::linear};
    const Matrix x = Matrix::Random(5, 3);
    CHECK(dense_forward(x, id) == x);
    CHECK_THROWS_AS(dense_forward(Matrix::Ones(2, 4), id), ValidationError);
  }

  TEST_CASE("dense backward examples") {
    Rng rng(1);
    auto layer = make_dense<double>(4, 2, Activation::tanh, rng);
    DenseCache<double> cache;
    dense_forward(Matrix(Matrix::Random(3, 4)), layer, &cache);
    const auto zero = dense_backward<double>(Matrix::Zero(3, 2), layer, cache);
    CHECK(zero.params.weight.isZero());
    CHECK(zero.params.bias.isZero());
    CHECK(zero.input.isZero());

    const Matrix row = Matrix::Random(1, 4);
    Matrix twice(2, 4);
    twice << row, row;
    DenseCache<double> c1, c2;
    dense_forward(row, layer, &c1);
    dense_forward(twice, layer, &c2);
    const Matrix g = Matrix::Random(1, 2);
    Matrix g2(2, 2);
    g2 << g, g;
    const auto one = dense_backward<double>(g, layer, c1);
    const auto two = dense_backward<double>(g2, layer, c2);
    CHECK((two.params.weight - 2.0 * one.params.weight).norm() < 1e-14);
  }

  TEST_CASE("dense gradients match finite differences") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) CHECK(dense_gradient_error(seed) < 1e-6);
  }

  TEST_CASE("glorot init stays inside its bound") {
    Rng rng(3);
    const auto layer = make_dense<double>(36, 12, Activation::tanh, rng);
    const double bound = std::sqrt(6.0 / (36 + 12));
    CHECK(layer.weight.cwiseAbs().maxCoeff() <= bound);
    CHECK(layer.weight.cwiseAbs().maxCoeff() > 0.5 * bound);
    CHECK(layer.bias.isZero());
    const auto lstm = make_lstm<double>(3, 4, true, rng);
    CHECK(lstm.gates[kForgetGate].bias == Vector::Ones(4));
    CHECK(lstm.gates[kInputGate].bias.isZero());
  }

  TEST_CASE("lstm forward examples") {
    auto zero = LstmLayer<double>::zeros(2, 3, true);
    const auto out = lstm_forward(faultae::Sequence(4, Matrix::Zero(2, 2)), zero);
    REQUIRE(out.size() == 4);
    for (const auto& h : out) CHECK(h.isZero());

    auto cell = LstmLayer<double>::zeros(1, 1, false);
    cell.gates[kCandidate].bias(0) = 1.0;  // g = tanh(1)
    const auto h = lstm_forward(faultae::Sequence{Matrix::Zero(1, 1)}, cell);
    const double oracle = 0.5 * std::tanh(0.5 * std::tanh(1.0));
    CHECK(h.front()(0, 0) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(h.front()(0, 0) == doctest::Approx(0.18169974).epsilon(1e-8));

    Rng rng(4);
    auto seq = make_lstm<double>(3, 2, true, rng);
    auto last = seq;
    last.return_sequences = false;
    const auto x = random_sequence(5, 2, 3, rng);
    CHECK(lstm_forward(x, seq).back() == lstm_forward(x, last).front());
  }

  TEST_CASE("lstm gradients match finite differences") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      CHECK(lstm_gradient_error(seed) < 1e-4);
      CHECK(lstm_gradient_error(seed + 100, 3, 2, false) < 1e-4);
    }
  }

  TEST_CASE("lstm backward with zero upstream gradient is zero") {
    Rng rng(5);
    auto layer = make_lstm<double>(3, 2, true, rng);
    LstmCache<double> cache;
    lstm_forward(random_sequence(3, 2, 3, rng), layer, &cache);
    const auto g = lstm_backward(faultae::Sequence(3, Matrix::Zero(2, 2)), layer, cache);
    for (const auto& t : g.params.tensors())
      for (double v : t) CHECK(v == 0.0);
  }

  TEST_CASE("single step lstm equals the hand written cell gradient") {
    Rng rng(6);
    auto layer = make_lstm<double>(2, 1, false, rng);
    const faultae::Sequence x{random_matrix(1, 2, rng)};
    LstmCache<double> cache;
    lstm_forward(x, layer, &cache);
    const auto g = lstm_backward(faultae::Sequence{Matrix::Ones(1, 1)}, layer, cache);
    // With h0 = c0 = 0: h = o tanh(i g), so dh/db_o = tanh(c) o (1 - o).
    const auto& st = cache.steps.front();
    const double o = st.act[kOutputGate](0, 0);
    const double c = st.c(0, 0);
    CHECK(g.params.gates[kOutputGate].bias(0) == doctest::Approx(std::tanh(c) * o * (1 - o)).epsilon(1e-12));
    const double i = st.act[kInputGate](0, 0), cand = st.act[kCandidate](0, 0);
    const double dc = o * (1 - std::tanh(c) * std::tanh(c));
    CHECK(g.params.gates[kInputGate].bias(0) == doctest::Approx(dc * cand * i * (1 - i)).epsilon(1e-12));
    CHECK(g.params.gates[kForgetGate].bias(0) == doctest::Approx(0.0));
  }

  TEST_CASE("repeat vector and time distributed examples") {
    Matrix v(1, 2);
    v << 1, 2;
    const auto r = repeat_vector(v, 3);
    REQUIRE(r.size() == 3);
    for (const auto& step : r) CHECK(step == v);
    const Matrix back = repeat_vector_backward(faultae::Sequence(3, Matrix::Ones(1, 2)));
    CHECK(back == Matrix::Constant(1, 2, 3.0));

    const auto zero = DenseLayer<double>::zeros(4, 3, Activation::tanh);
    for (const auto& y : time_distributed_forward(faultae::Sequence(2, Matrix::Ones(5, 4)), zero)) CHECK(y.isZero());
  }

  TEST_CASE("repeat and time distributed gradients match finite differences") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      CHECK(repeat_gradient_error(seed) < 1e-6);
      CHECK(time_distributed_gradient_error(seed) < 1e-6);
    }
  }

  TEST_CASE("adam examples") {
    Matrix theta = Matrix::Zero(1, 1);
    const Matrix grad = Matrix::Ones(1, 1);
    AdamState<double> state;
    state.learning_rate = 0.001;
    adam_step<double>({flat(theta)}, {flat(grad)}, state);
    CHECK(theta(0, 0) == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-12));
    CHECK(theta(0, 0) == doctest::Approx(-0.000999999990).epsilon(1e-9));
    CHECK(state.step == 1);

    Matrix still = Matrix::Constant(2, 2, 0.7);
    const Matrix zero = Matrix::Zero(2, 2);
    AdamState<double> s2;
    for (int i = 0; i < 3; ++i) adam_step<double>({flat(still)}, {flat(zero)}, s2);
    CHECK(still == Matrix::Constant(2, 2, 0.7));

    Matrix frozen = Matrix::Constant(2, 1, 0.3);
    AdamState<double> s3;
    s3.learning_rate = 0.0;
    const Matrix grad2 = Matrix::Ones(2, 1);
    adam_step<double>({flat(frozen)}, {flat(grad2)}, s3);
    CHECK(frozen == Matrix::Constant(2, 1, 0.3));

    Matrix pair = Matrix::Zero(2, 1);
    const Matrix same = Matrix::Constant(2, 1, 0.25);
    AdamState<double> s4;
    for (int i = 0; i < 5; ++i) adam_step<double>({flat(pair)}, {flat(same)}, s4);
    CHECK(pair(0, 0) == pair(1, 0));

    Matrix bad = Matrix::Constant(1, 1, std::nan(""));
    Matrix p = Matrix::Zero(1, 1);
    AdamState<double> s5;
    CHECK_THROWS_AS(adam_step<double>({flat(p)}, {flat(bad)}, s5), NumericError);
    CHECK(p(0, 0) == 0.0);
  }

  TEST_CASE("early stopping traces") {
    const std::vector<double> decreasing = {5, 4, 3, 2, 1, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01};
    const auto d1 = early_stopping(decreasing, 10);
    CHECK_FALSE(d1.stop);
    CHECK(d1.best_epoch == 12);

    std::vector<double> flat_run(11, 1.0);
    const auto d2 = early_stopping(flat_run, 10);
    CHECK(d2.stop);
    CHECK(d2.stop_epoch == 11);
    CHECK(d2.best_epoch == 1);

    std::vector<double> nine = {1.0, 0.9};
    nine.insert(nine.end(), 9, 0.9);
    const auto d3 = early_stopping(nine, 10);
    CHECK_FALSE(d3.stop);
    CHECK(d3.best_epoch == 2);
  }

  TEST_CASE("plateau scheduler traces") {
    CHECK(reduce_lr_on_plateau(std::vector<double>{5, 4, 3, 2, 1, 0.5, 0.1}, 1e-3) == 1e-3);

    PlateauScheduler s(5, 0.2);
    const std::vector<double> trace = {1.0, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9};
    double lr = 1.0;
    std::vector<double> seen;
    for (double loss : trace) seen.push_back(lr = s.update(loss, lr));
    CHECK(seen[5] == 1.0);
    CHECK(seen[6] == doctest::Approx(0.2));

    std::vector<double> two = {1.0};
    two.insert(two.end(), 10, 1.0);
    CHECK(reduce_lr_on_plateau(two, 1.0) == doctest::Approx(0.04));
  }
}
