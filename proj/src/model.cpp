#include "rrl/model.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace rrl::model {

std::vector<std::size_t> NetworkSpec::dim_chain() const {
  std::vector<std::size_t> chain;
  chain.reserve(hidden_widths.size() + 2);
  chain.push_back(input_dim);
  chain.insert(chain.end(), hidden_widths.begin(), hidden_widths.end());
  chain.push_back(output_dim);
  return chain;
}

void NetworkSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("NetworkSpec: input_dim must be >= 1");
  if (hidden_widths.empty()) throw std::invalid_argument("NetworkSpec: depth must be >= 1");
  for (std::size_t w : hidden_widths)
    if (w < 1) throw std::invalid_argument("NetworkSpec: widths must be >= 1");
  if (output_dim < 1) throw std::invalid_argument("NetworkSpec: output_dim must be >= 1");
  if (!(budget_vs > 0.0)) throw std::invalid_argument("NetworkSpec: budget_vs must be > 0");
  if (!(budget_v0 > 0.0)) throw std::invalid_argument("NetworkSpec: budget_v0 must be > 0");
}

std::vector<double> relu(std::span<const double> z) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] > 0.0 ? z[i] : 0.0;
  return out;
}

std::vector<double> forward(const NetworkParams& params, std::span<const double> x) {
  if (params.weights.empty()) throw std::invalid_argument("forward: empty parameter set");
  if (x.size() != params.weights.front().cols())
    throw std::invalid_argument("forward: input length does not match first layer");
  std::vector<double> z(x.begin(), x.end());
  const std::size_t last = params.weights.size() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    z = matvec(params.weights[l], z);
    if (l != last)
      for (double& v : z) v = v > 0.0 ? v : 0.0;
  }
  return z;
}

void check_shapes(const NetworkParams& params, const NetworkSpec& spec) {
  spec.validate();
  const auto chain = spec.dim_chain();
  if (params.weights.size() != chain.size() - 1)
    throw std::invalid_argument("check_shapes: layer count does not match spec");
  for (std::size_t l = 0; l + 1 < chain.size(); ++l) {
    const Matrix& w = params.weights[l];
    if (w.rows() != chain[l + 1] || w.cols() != chain[l])
      throw std::invalid_argument("check_shapes: weight shape mismatch at layer " +
                                  std::to_string(l));
  }
}

bool finite(const NetworkParams& params) {
  for (const Matrix& w : params.weights)
    for (double v : w.flat())
      if (!std::isfinite(v)) return false;
  return true;
}

namespace {
double entry_l1(const Matrix& w) {
  double sum = 0.0;
  for (double v : w.flat()) sum += std::abs(v);
  return sum;
}

double max_row_l1(const Matrix& w) {
  double best = 0.0;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double sum = 0.0;
    for (double v : w.row(r)) sum += std::abs(v);
    if (sum > best) best = sum;
  }
  return best;
}
}  // namespace

BudgetCheck check_budgets(const NetworkParams& params, const NetworkSpec& spec) {
  check_shapes(params, spec);
  BudgetCheck check;
  for (std::size_t l = 1; l < params.weights.size(); ++l)
    check.sum_layer_l1 += entry_l1(params.weights[l]);
  check.max_row_l1_w0 = max_row_l1(params.weights.front());
  check.satisfied =
      check.sum_layer_l1 <= spec.budget_vs && check.max_row_l1_w0 <= spec.budget_v0;
  return check;
}

std::vector<LayerNorms> operator_norms(const NetworkParams& params) {
  std::vector<LayerNorms> norms;
  norms.reserve(params.weights.size());
  for (const Matrix& w : params.weights) norms.push_back({entry_l1(w), max_row_l1(w)});
  return norms;
}

std::string to_json(const NetworkParams& params) {
  nlohmann::ordered_json doc;
  auto& widths = doc["widths"] = nlohmann::ordered_json::array();
  if (!params.weights.empty()) {
    widths.push_back(params.weights.front().cols());
    for (const Matrix& w : params.weights) widths.push_back(w.rows());
  }
  auto& weights = doc["weights"] = nlohmann::ordered_json::array();
  for (const Matrix& w : params.weights) {
    nlohmann::ordered_json mat = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < w.rows(); ++r) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (double v : w.row(r)) row.push_back(v);
      mat.push_back(std::move(row));
    }
    weights.push_back(std::move(mat));
  }
  return doc.dump();
}

NetworkParams params_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("params_from_json: ") + e.what());
  }
  if (!doc.contains("widths") || !doc.contains("weights"))
    throw std::runtime_error("params_from_json: missing widths or weights");
  const auto widths = doc["widths"].get<std::vector<std::size_t>>();
  const auto& weights = doc["weights"];
  if (!weights.is_array() || widths.size() != weights.size() + 1)
    throw std::runtime_error("params_from_json: widths do not match weight count");

  NetworkParams params;
  params.weights.reserve(weights.size());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto& mat = weights[l];
    Matrix w(widths[l + 1], widths[l]);
    if (!mat.is_array() || mat.size() != w.rows())
      throw std::runtime_error("params_from_json: bad row count at layer " + std::to_string(l));
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const auto& row = mat[r];
      if (!row.is_array() || row.size() != w.cols())
        throw std::runtime_error("params_from_json: bad column count at layer " +
                                 std::to_string(l));
      for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = row[c].get<double>();
    }
    params.weights.push_back(std::move(w));
  }
  return params;
}

}  // namespace rrl::model
