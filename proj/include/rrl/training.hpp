#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrl/matrix.hpp"
#include "rrl/model.hpp"

namespace rrl::training {

enum class Optimizer { kSgd, kAdam };
enum class Loss { kMse, kCrossEntropy };
enum class Init { kUniformGlorot, kNormalScaled };

struct Dataset {
  Matrix inputs;   // n x d
  Matrix targets;  // n x m (m = 1 for regression)
  double sigma = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return inputs.rows(); }
};

struct TrainConfig {
  Optimizer optimizer = Optimizer::kAdam;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  Loss loss = Loss::kMse;
  Init init = Init::kUniformGlorot;
  std::uint64_t seed = 0;

  void validate(std::size_t dataset_size) const;  // throws std::invalid_argument
};

struct TrainReport {
  model::NetworkParams final_params;
  std::vector<double> train_loss_history;  // one entry per epoch
  double test_error = 0.0;
};

// x_i ~ N(0, I_d), y_i = teacher(x_i) + u_i with u_i ~ N(0, sigma^2)
// independent of x_i. Deterministic for a fixed seed.
Dataset gen_teacher_data(const model::NetworkParams& teacher, std::size_t n, double sigma,
                         std::uint64_t seed);

// (1/n) sum_i sum_k (y_ik - p_ik)^2 / m  (note the inner division by m).
double mse_loss(const Matrix& preds, const Matrix& targets);

// -(1/n) sum_i sum_k y_ik log softmax(logits_i)_k, stabilized by row-max
// subtraction. Target rows must be one-hot.
double ce_loss(const Matrix& logits, const Matrix& one_hot_targets);

// Exact gradient of the batch loss with respect to every weight matrix;
// the ReLU subgradient at 0 is taken as 0.
std::vector<Matrix> backprop(const model::NetworkParams& params, const Matrix& batch_x,
                             const Matrix& batch_y, Loss loss);

// Batched forward pass (rows of x are inputs) and the batch loss.
Matrix forward_batch(const model::NetworkParams& params, const Matrix& x);
double evaluate_loss(const model::NetworkParams& params, const Matrix& x, const Matrix& y,
                     Loss loss);

model::NetworkParams init_params(const model::NetworkSpec& spec, Init scheme, std::uint64_t seed);

// Seeded shuffling, epochs * ceil(n / batch) optimizer steps, held-out error
// under the configured loss. Bit-reproducible for fixed seeds. A non-null
// warm_start replaces the seeded initialization.
TrainReport train(const model::NetworkSpec& student, const Dataset& train_set,
                  const Dataset& test_set, const TrainConfig& config,
                  const model::NetworkParams* warm_start = nullptr);

std::string report_json(const TrainReport& report);
std::string loss_history_csv(const TrainReport& report);  // "epoch,loss"

}  // namespace rrl::training
