#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rrl/matrix.hpp"

namespace rrl::model {

// Architecture of a bias-free ReLU feed-forward network together with the
// l1 sparsity budgets: budget_vs bounds the summed l1 norms of the hidden and
// output weight matrices, budget_v0 bounds each row of the input matrix.
struct NetworkSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths;  // h_1 .. h_L
  std::size_t output_dim = 1;
  double budget_vs = 1.0;
  double budget_v0 = 1.0;

  std::size_t depth() const { return hidden_widths.size(); }

  // Full dimension chain h_0 .. h_{L+1}; weight l has shape chain[l+1] x chain[l].
  std::vector<std::size_t> dim_chain() const;

  void validate() const;  // throws std::invalid_argument
};

// Weight matrices W^0 .. W^L. The shape chain is implied by the matrices
// themselves; check_shapes verifies consistency with an owning spec.
struct NetworkParams {
  std::vector<Matrix> weights;

  std::size_t depth() const { return weights.empty() ? 0 : weights.size() - 1; }
  std::size_t input_dim() const { return weights.empty() ? 0 : weights.front().cols(); }
  std::size_t output_dim() const { return weights.empty() ? 0 : weights.back().rows(); }
};

struct BudgetCheck {
  double sum_layer_l1 = 0.0;   // sum over l = 1..L of |W^l|_1
  double max_row_l1_w0 = 0.0;  // max over rows j of |W^0_{j,.}|_1
  bool satisfied = false;
};

struct LayerNorms {
  double l1 = 0.0;          // sum of absolute entries
  double max_row_l1 = 0.0;  // max row l1 (the induced infinity norm)
};

std::vector<double> relu(std::span<const double> z);

// W^L relu(... W^1 relu(W^0 x)); no bias terms, linear output layer.
std::vector<double> forward(const NetworkParams& params, std::span<const double> x);

void check_shapes(const NetworkParams& params, const NetworkSpec& spec);  // throws
bool finite(const NetworkParams& params);

BudgetCheck check_budgets(const NetworkParams& params, const NetworkSpec& spec);
std::vector<LayerNorms> operator_norms(const NetworkParams& params);

// JSON round trip: {"widths": [h_0..h_{L+1}], "weights": [[[..]..]..]} with
// row-major matrices. Exact for finite doubles.
std::string to_json(const NetworkParams& params);
NetworkParams params_from_json(const std::string& text);

}  // namespace rrl::model
