#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace rrl::bounds {

// Increasing map [0,inf) -> [0,inf) with phi(0) = 0 applied to the packing
// radius inside the risk bound. The default is the square.
using RiskTransform = std::function<double(double)>;
const RiskTransform& square_transform();

struct TheoryInputs {
  std::uint64_t n = 1;     // training samples
  std::uint32_t d = 10;    // input dimension, must be >= 10
  double sigma = 1.0;      // noise std
  double tau = 1.0;        // numerical constant of the packing construction
  double vs = 1.0;         // l1 budget over hidden/output layers
  std::uint32_t depth = 1; // hidden layers L
  double kappa = 4.0;      // local-packing constant, >= 1

  void validate() const;  // throws std::invalid_argument
};

// (vs / L)^L
double capacity_factor(double vs, std::uint32_t depth);

// c = sqrt(tau * sigma / 160)
double noise_constant(double tau, double sigma);

// (1/2) phi[ c sqrt(V) (log d / n)^{1/4} ]; natural log. For the default
// square transform this is (c^2/2) V sqrt(log d / n).
double minimax_lower_bound(const TheoryInputs& in, const RiskTransform& phi = square_transform());

// Real-valued requirement (c/eps)^4 V^2 log(d) / 4 and its integer ceiling
// clamped to >= 1.
double sample_complexity_requirement(double epsilon, const TheoryInputs& in);
std::uint64_t sample_complexity(double epsilon, const TheoryInputs& in);

// (tau V / (20 delta))^2 log d
double packing_log_lower_bound(double delta, std::uint32_t d, double tau, double vf);

// Gaussian-regression KL divergence: per sample dist^2 / (2 sigma^2), and the
// n-sample product which multiplies by n.
double kl_per_sample(double l2_dist_sq, double sigma);
double kl_n_product(double l2_dist_sq, double sigma, std::uint64_t n);

// 2 n (kappa delta)^2 / sigma^2
double mi_upper_bound(std::uint64_t n, double kappa, double delta, double sigma);

// phi(delta) * max(0, 1 - (mi + log 2)/log_m)
double fano_bound(double delta, double log_m, double mi, const RiskTransform& phi = square_transform());

// delta = sqrt(tau sigma V / (40 kappa)) (log d / n)^{1/4}; balances the
// information numerator 4 n (kappa delta)^2 / sigma^2 against the packing
// entropy (tau V / (20 delta))^2 log d.
double critical_radius(const TheoryInputs& in);

struct BoundReport {
  double vf = 0.0;
  double c_const = 0.0;
  double delta = 0.0;
  double minimax_lb = 0.0;
  double mi_upper = 0.0;
  double packing_log_lb = 0.0;
  TheoryInputs inputs;
};

BoundReport assemble_report(const TheoryInputs& in);

// {"vf","c","delta","minimax_lb","mi_upper","packing_log_lb","inputs":{...}}
std::string to_json(const BoundReport& report);

}  // namespace rrl::bounds
