#include <stdexcept>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rrl/model.hpp"
#include "rrl/rng.hpp"
#include "rrl/training.hpp"

using rrl::Matrix;
namespace model = rrl::model;
namespace training = rrl::training;

namespace {

model::NetworkSpec small_spec(std::size_t d, std::vector<std::size_t> widths, std::size_t out = 1) {
  model::NetworkSpec spec;
  spec.input_dim = d;
  spec.hidden_widths = std::move(widths);
  spec.output_dim = out;
  spec.budget_vs = 100.0;
  spec.budget_v0 = 100.0;
  return spec;
}

// central differences on the batch loss, the universal gradient oracle
std::vector<Matrix> fd_gradient(const model::NetworkParams& params, const Matrix& x,
                                const Matrix& y, training::Loss loss, double h) {
  std::vector<Matrix> grads;
  model::NetworkParams probe = params;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    Matrix g(params.weights[l].rows(), params.weights[l].cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double original = probe.weights[l].flat()[i];
      probe.weights[l].flat()[i] = original + h;
      const double up = training::evaluate_loss(probe, x, y, loss);
      probe.weights[l].flat()[i] = original - h;
      const double down = training::evaluate_loss(probe, x, y, loss);
      probe.weights[l].flat()[i] = original;
      g.flat()[i] = (up - down) / (2.0 * h);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double smallest_preactivation(const model::NetworkParams& params, const Matrix& x) {
  Matrix h = x;
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l + 1 < params.weights.size(); ++l) {
    h = rrl::matmul_abt(h, params.weights[l]);
    for (double v : h.flat()) smallest = std::min(smallest, std::abs(v));
    for (double& v : h.flat()) v = v > 0.0 ? v : 0.0;
  }
  return smallest;
}

double max_rel_gradient_error(const model::NetworkParams& params, const Matrix& x, const Matrix& y,
                              training::Loss loss) {
  const auto bp = training::backprop(params, x, y, loss);
  const auto fd = fd_gradient(params, x, y, loss, 1e-5);
  double worst = 0.0;
  for (std::size_t l = 0; l < bp.size(); ++l)
    for (std::size_t i = 0; i < bp[l].size(); ++i) {
      const double a = bp[l].flat()[i];
      const double b = fd[l].flat()[i];
      worst = std::max(worst, std::abs(a - b) / std::max(1e-3, std::abs(b)));
    }
  return worst;
}

bool params_bitwise_equal(const model::NetworkParams& a, const model::NetworkParams& b) {
  if (a.weights.size() != b.weights.size()) return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l)
    for (std::size_t i = 0; i < a.weights[l].size(); ++i)
      if (std::bit_cast<std::uint64_t>(a.weights[l].flat()[i]) !=
          std::bit_cast<std::uint64_t>(b.weights[l].flat()[i]))
        return false;
  return true;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("teacher data realizes the regression model") {
  const auto spec = small_spec(4, {5});
  const auto teacher = training::init_params(spec, training::Init::kNormalScaled, 77);

  SUBCASE("noiseless targets equal the teacher outputs") {
    const auto data = training::gen_teacher_data(teacher, 64, 0.0, 5);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto row = data.inputs.row(i);
      const auto out = model::forward(teacher, row);
      CHECK(data.targets(i, 0) == out[0]);
    }
  }

  SUBCASE("residuals have mean zero and variance sigma squared") {
    const double sigma = 0.7;
    const std::size_t n = 200000;
    const auto data = training::gen_teacher_data(teacher, n, sigma, 6);
    const Matrix clean = training::forward_batch(teacher, data.inputs);
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = data.targets(i, 0) - clean(i, 0);
      sum += r;
      sq += r * r;
    }
    const auto count = static_cast<double>(n);
    const double mean = sum / count;
    const double var = (sq - count * mean * mean) / (count - 1.0);
    CHECK(std::abs(mean) <= 4.0 * sigma / std::sqrt(count));
    CHECK(std::abs(var - sigma * sigma) <=
          4.0 * sigma * sigma * std::sqrt(2.0 / (count - 1.0)));
  }

  SUBCASE("deterministic per seed") {
    const auto a = training::gen_teacher_data(teacher, 32, 0.3, 9);
    const auto b = training::gen_teacher_data(teacher, 32, 0.3, 9);
    CHECK(a.inputs == b.inputs);
    CHECK(a.targets == b.targets);
  }
}

TEST_CASE("mean-squared loss with the inner class division") {
  Matrix preds(2, 2, 0.0);
  Matrix targets(2, 2, 1.0);
  CHECK(training::mse_loss(preds, preds) == 0.0);
  CHECK(training::mse_loss(preds, targets) == 1.0);  // residuals all one

  Matrix scalar_pred(3, 1, 0.5);
  Matrix scalar_target(3, 1, 0.5 + 2.0);
  CHECK(training::mse_loss(scalar_pred, scalar_target) == doctest::Approx(4.0));

  CHECK_THROWS_AS(training::mse_loss(Matrix(2, 1), Matrix(3, 1)), std::invalid_argument);
}

TEST_CASE("cross-entropy loss") {
  SUBCASE("uniform logits give log m") {
    Matrix logits(5, 4, 0.37);
    Matrix targets(5, 4, 0.0);
    for (std::size_t i = 0; i < 5; ++i) targets(i, i % 4) = 1.0;
    CHECK(training::ce_loss(logits, targets) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }

  SUBCASE("two zero logits give log 2") {
    Matrix logits(1, 2, 0.0);
    Matrix target = Matrix::from_rows({{1.0, 0.0}});
    CHECK(training::ce_loss(logits, target) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  SUBCASE("a huge true-class margin saturates to zero") {
    Matrix logits = Matrix::from_rows({{50.0, 0.0, 0.0}});
    Matrix target = Matrix::from_rows({{1.0, 0.0, 0.0}});
    CHECK(training::ce_loss(logits, target) <= 1e-20);
  }

  SUBCASE("shift invariance") {
    rrl::rng::GaussianStream gen(12);
    Matrix logits(6, 3);
    for (double& v : logits.flat()) v = gen.next();
    Matrix shifted = logits;
    for (std::size_t r = 0; r < shifted.rows(); ++r)
      for (double& v : shifted.row(r)) v += 17.25;
    Matrix targets(6, 3, 0.0);
    for (std::size_t i = 0; i < 6; ++i) targets(i, i % 3) = 1.0;
    CHECK(training::ce_loss(logits, targets) ==
          doctest::Approx(training::ce_loss(shifted, targets)).epsilon(1e-12));
  }

  SUBCASE("rejects rows that are not one-hot") {
    Matrix logits(1, 3, 0.0);
    CHECK_THROWS_AS(training::ce_loss(logits, Matrix::from_rows({{0.5, 0.5, 0.0}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(training::ce_loss(logits, Matrix::from_rows({{1.0, 1.0, 0.0}})),
                    std::invalid_argument);
  }
}

TEST_CASE("backprop matches the linear-model gradient in the active region") {
  // one hidden layer, all preactivations strictly positive
  rrl::rng::GaussianStream gen(31);
  model::NetworkParams params;
  Matrix w0(4, 3);
  for (double& v : w0.flat()) v = 0.2 + std::abs(gen.next());
  Matrix w1(1, 4);
  for (double& v : w1.flat()) v = 0.2 + std::abs(gen.next());
  params.weights = {w0, w1};

  Matrix x(5, 3);
  for (double& v : x.flat()) v = 0.5 + std::abs(gen.next());
  Matrix y(5, 1);
  for (double& v : y.flat()) v = gen.next();

  CHECK(smallest_preactivation(params, x) > 0.1);
  const auto grads = training::backprop(params, x, y, training::Loss::kMse);

  // closed form for the equivalent linear model f(x) = W1 (W0 x)
  const Matrix hidden = rrl::matmul_abt(x, w0);      // B x 4, equals the activations
  const Matrix preds = rrl::matmul_abt(hidden, w1);  // B x 1
  const double scale = 2.0 / static_cast<double>(x.rows());
  Matrix residual(5, 1);
  for (std::size_t i = 0; i < 5; ++i) residual(i, 0) = scale * (preds(i, 0) - y(i, 0));
  const Matrix grad_w1 = rrl::matmul_atb(residual, hidden);
  const Matrix back_hidden = rrl::matmul(residual, w1);  // B x 4
  const Matrix grad_w0 = rrl::matmul_atb(back_hidden, x);

  for (std::size_t i = 0; i < grad_w1.size(); ++i)
    CHECK(grads[1].flat()[i] == doctest::Approx(grad_w1.flat()[i]).epsilon(1e-10));
  for (std::size_t i = 0; i < grad_w0.size(); ++i)
    CHECK(grads[0].flat()[i] == doctest::Approx(grad_w0.flat()[i]).epsilon(1e-10));
}

TEST_CASE("backprop matches central differences away from kinks") {
  std::size_t accepted = 0;
  std::uint64_t seed = 0;
  while (accepted < 10) {
    ++seed;
    const bool classification = (seed % 2) == 0;
    const std::size_t out = classification ? 3 : 1;
    const auto spec = small_spec(4, {5, 4}, out);
    const auto params = training::init_params(
        spec, training::Init::kUniformGlorot, rrl::rng::derive(1234, seed));
    rrl::rng::GaussianStream gen(rrl::rng::derive(567, seed));
    Matrix x(4, 4);
    for (double& v : x.flat()) v = gen.next();
    if (smallest_preactivation(params, x) < 1e-3) continue;  // kink avoidance
    ++accepted;

    Matrix y(4, out);
    if (classification) {
      for (std::size_t i = 0; i < 4; ++i) y(i, i % out) = 1.0;
    } else {
      for (double& v : y.flat()) v = gen.next();
    }
    const auto loss = classification ? training::Loss::kCrossEntropy : training::Loss::kMse;
    CHECK(max_rel_gradient_error(params, x, y, loss) <= 1e-4);
  }
}

TEST_CASE("gradients of an all-zero network vanish") {
  model::NetworkParams zero;
  zero.weights.push_back(Matrix(4, 3));
  zero.weights.push_back(Matrix(1, 4));
  rrl::rng::GaussianStream gen(8);
  Matrix x(6, 3);
  for (double& v : x.flat()) v = gen.next();
  Matrix y(6, 1, 1.0);

  const auto bp = training::backprop(zero, x, y, training::Loss::kMse);
  const auto fd = fd_gradient(zero, x, y, training::Loss::kMse, 1e-5);
  for (std::size_t l = 0; l < bp.size(); ++l)
    for (std::size_t i = 0; i < bp[l].size(); ++i) {
      CHECK(bp[l].flat()[i] == 0.0);
      CHECK(fd[l].flat()[i] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("training fixed point and determinism") {
  const auto spec = small_spec(3, {4});
  const auto teacher = training::init_params(spec, training::Init::kNormalScaled, 3);
  const auto train_set = training::gen_teacher_data(teacher, 32, 0.0, 11);
  const auto test_set = training::gen_teacher_data(teacher, 64, 0.0, 12);

  SUBCASE("student starting at the teacher with lr 0 stays there") {
    training::TrainConfig config;
    config.learning_rate = 0.0;
    config.epochs = 3;
    config.batch_size = 8;
    const auto report = training::train(spec, train_set, test_set, config, &teacher);
    CHECK(report.test_error == 0.0);
    CHECK(params_bitwise_equal(report.final_params, teacher));
  }

  SUBCASE("adam with lr 0 leaves the seeded init bit-identical") {
    training::TrainConfig config;
    config.learning_rate = 0.0;
    config.epochs = 2;
    config.batch_size = 8;
    config.seed = 77;
    const auto report = training::train(spec, train_set, test_set, config);
    const auto init = training::init_params(spec, config.init,
                                            rrl::rng::derive(config.seed, rrl::rng::kTagInit));
    CHECK(params_bitwise_equal(report.final_params, init));
  }

  SUBCASE("identical config and seed give bit-identical reports") {
    training::TrainConfig config;
    config.epochs = 4;
    config.batch_size = 8;
    config.seed = 5;
    const auto a = training::train(spec, train_set, test_set, config);
    const auto b = training::train(spec, train_set, test_set, config);
    CHECK(params_bitwise_equal(a.final_params, b.final_params));
    CHECK(a.train_loss_history == b.train_loss_history);
    CHECK(a.test_error == b.test_error);
  }
}

TEST_CASE("a tiny noiseless problem trains to near zero loss") {
  const auto spec = small_spec(2, {4});
  const auto teacher = training::init_params(spec, training::Init::kNormalScaled, 9);
  const auto train_set = training::gen_teacher_data(teacher, 64, 0.0, 22);
  const auto test_set = training::gen_teacher_data(teacher, 128, 0.0, 23);

  training::TrainConfig config;
  config.epochs = 500;
  config.batch_size = 16;
  config.learning_rate = 1e-2;
  config.seed = 1;
  const auto report = training::train(spec, train_set, test_set, config);
  CHECK(report.train_loss_history.size() == 500);
  CHECK(report.train_loss_history.back() < 1e-3);
}

TEST_CASE("report serialization") {
  const auto spec = small_spec(2, {3});
  const auto teacher = training::init_params(spec, training::Init::kNormalScaled, 4);
  const auto train_set = training::gen_teacher_data(teacher, 16, 0.1, 1);
  const auto test_set = training::gen_teacher_data(teacher, 16, 0.1, 2);
  training::TrainConfig config;
  config.epochs = 3;
  config.batch_size = 4;
  const auto report = training::train(spec, train_set, test_set, config);

  const std::string json = training::report_json(report);
  CHECK(json.find("\"final_params\"") != std::string::npos);
  CHECK(json.find("\"train_loss_history\"") != std::string::npos);
  CHECK(json.find("\"test_error\"") != std::string::npos);

  const std::string csv = training::loss_history_csv(report);
  CHECK(csv.rfind("epoch,loss\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 4);  // header + one row per epoch
}

TEST_CASE("config validation") {
  training::TrainConfig config;
  config.batch_size = 100;
  CHECK_THROWS_AS(config.validate(50), std::invalid_argument);
  config.batch_size = 10;
  config.epochs = 0;
  CHECK_THROWS_AS(config.validate(50), std::invalid_argument);
  config.epochs = 1;
  config.adam_beta1 = 1.0;
  CHECK_THROWS_AS(config.validate(50), std::invalid_argument);
}

}  // TEST_SUITE
