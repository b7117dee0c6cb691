#include "rrl/bounds.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace rrl::bounds {

const RiskTransform& square_transform() {
  static const RiskTransform square = [](double t) { return t * t; };
  return square;
}

void TheoryInputs::validate() const {
  if (n < 1) throw std::invalid_argument("TheoryInputs: n must be >= 1");
  if (d < 10) throw std::invalid_argument("TheoryInputs: d must be >= 10");
  if (!(sigma > 0.0)) throw std::invalid_argument("TheoryInputs: sigma must be > 0");
  if (!(tau > 0.0)) throw std::invalid_argument("TheoryInputs: tau must be > 0");
  if (!(vs > 0.0)) throw std::invalid_argument("TheoryInputs: vs must be > 0");
  if (depth < 1) throw std::invalid_argument("TheoryInputs: depth must be >= 1");
  if (!(kappa >= 1.0)) throw std::invalid_argument("TheoryInputs: kappa must be >= 1");
}

double capacity_factor(double vs, std::uint32_t depth) {
  if (!(vs > 0.0) || depth < 1) throw std::invalid_argument("capacity_factor: bad arguments");
  return std::pow(vs / static_cast<double>(depth), static_cast<double>(depth));
}

double noise_constant(double tau, double sigma) {
  return std::sqrt(tau * sigma / 160.0);
}

double minimax_lower_bound(const TheoryInputs& in, const RiskTransform& phi) {
  in.validate();
  const double c = noise_constant(in.tau, in.sigma);
  const double vf = capacity_factor(in.vs, in.depth);
  const double rate = std::pow(std::log(static_cast<double>(in.d)) / static_cast<double>(in.n),
                               0.25);
  return 0.5 * phi(c * std::sqrt(vf) * rate);
}

double sample_complexity_requirement(double epsilon, const TheoryInputs& in) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("sample_complexity: epsilon must be > 0");
  TheoryInputs checked = in;
  checked.n = 1;  // n plays no role here
  checked.validate();
  const double c = noise_constant(in.tau, in.sigma);
  const double vf = capacity_factor(in.vs, in.depth);
  const double ratio = c / epsilon;
  return ratio * ratio * ratio * ratio * vf * vf * std::log(static_cast<double>(in.d)) / 4.0;
}

std::uint64_t sample_complexity(double epsilon, const TheoryInputs& in) {
  const double requirement = sample_complexity_requirement(epsilon, in);
  const double ceiled = std::ceil(requirement);
  if (ceiled < 1.0) return 1;
  return static_cast<std::uint64_t>(ceiled);
}

double packing_log_lower_bound(double delta, std::uint32_t d, double tau, double vf) {
  if (!(delta > 0.0)) throw std::invalid_argument("packing_log_lower_bound: delta must be > 0");
  if (d < 10) throw std::invalid_argument("packing_log_lower_bound: d must be >= 10");
  const double prefactor = tau * vf / (20.0 * delta);
  return prefactor * prefactor * std::log(static_cast<double>(d));
}

double kl_per_sample(double l2_dist_sq, double sigma) {
  if (l2_dist_sq < 0.0) throw std::invalid_argument("kl_per_sample: distance must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("kl_per_sample: sigma must be > 0");
  return l2_dist_sq / (2.0 * sigma * sigma);
}

double kl_n_product(double l2_dist_sq, double sigma, std::uint64_t n) {
  return static_cast<double>(n) * kl_per_sample(l2_dist_sq, sigma);
}

double mi_upper_bound(std::uint64_t n, double kappa, double delta, double sigma) {
  if (n < 1 || !(kappa >= 1.0) || delta < 0.0 || !(sigma > 0.0))
    throw std::invalid_argument("mi_upper_bound: bad arguments");
  const double kd = kappa * delta;
  return 2.0 * static_cast<double>(n) * kd * kd / (sigma * sigma);
}

double fano_bound(double delta, double log_m, double mi, const RiskTransform& phi) {
  if (!(log_m > 0.0)) throw std::invalid_argument("fano_bound: log_m must be > 0");
  if (mi < 0.0) throw std::invalid_argument("fano_bound: mutual information must be >= 0");
  const double fraction = (mi + std::log(2.0)) / log_m;
  const double slack = 1.0 - fraction;
  return slack <= 0.0 ? 0.0 : phi(delta) * slack;
}

double critical_radius(const TheoryInputs& in) {
  in.validate();
  const double vf = capacity_factor(in.vs, in.depth);
  const double delta_sq = in.tau * in.sigma * vf / (40.0 * in.kappa) *
                          std::sqrt(std::log(static_cast<double>(in.d)) /
                                    static_cast<double>(in.n));
  return std::sqrt(delta_sq);
}

BoundReport assemble_report(const TheoryInputs& in) {
  in.validate();
  BoundReport report;
  report.inputs = in;
  report.vf = capacity_factor(in.vs, in.depth);
  report.c_const = noise_constant(in.tau, in.sigma);
  report.delta = critical_radius(in);
  report.minimax_lb = minimax_lower_bound(in);
  report.mi_upper = mi_upper_bound(in.n, in.kappa, report.delta, in.sigma);
  report.packing_log_lb = packing_log_lower_bound(report.delta, in.d, in.tau, report.vf);
  return report;
}

std::string to_json(const BoundReport& report) {
  nlohmann::ordered_json doc;
  doc["vf"] = report.vf;
  doc["c"] = report.c_const;
  doc["delta"] = report.delta;
  doc["minimax_lb"] = report.minimax_lb;
  doc["mi_upper"] = report.mi_upper;
  doc["packing_log_lb"] = report.packing_log_lb;
  doc["inputs"] = {{"n", report.inputs.n},     {"d", report.inputs.d},
                   {"sigma", report.inputs.sigma}, {"tau", report.inputs.tau},
                   {"vs", report.inputs.vs},   {"L", report.inputs.depth},
                   {"kappa", report.inputs.kappa}};
  return doc.dump();
}

}  // namespace rrl::bounds
