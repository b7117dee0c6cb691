#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rrl/matrix.hpp"

namespace rrl::montecarlo {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(N)
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
};

using Evaluator = std::function<double(std::span<const double>)>;

// n x d matrix of iid standard normals; deterministic for a fixed seed.
Matrix sample_standard_gaussian(std::size_t d, std::size_t n, std::uint64_t seed);

// Mean of fn over n_samples iid N(0, I_d) draws. Samples are split into
// fixed-size shards with substreams derived from (seed, shard), so the result
// is bit-identical for any worker count.
McEstimate estimate_mean(std::size_t d, std::uint64_t n_samples, std::uint64_t seed,
                         const std::function<double(std::span<const double>)>& fn);

// Fraction of draws with w.x > 0; expected 1/2 for any nonzero w.
McEstimate estimate_halfspace_prob(std::span<const double> w, std::uint64_t n_samples,
                                   std::uint64_t seed);

// Mean of relu(w.x)^2 for unit w; expected 1/2.
McEstimate estimate_relu_sq_moment(std::span<const double> w, std::uint64_t n_samples,
                                   std::uint64_t seed);

// Mean of relu(wi.x) relu(wj.x) for orthonormal wi, wj; expected 1/(2 pi).
McEstimate estimate_relu_cross_moment(std::span<const double> wi, std::span<const double> wj,
                                      std::uint64_t n_samples, std::uint64_t seed);

// Mean of (f(x) - g(x))^2 over N(0, I_d).
McEstimate estimate_l2_distance_sq(const Evaluator& f, const Evaluator& g, std::size_t d,
                                   std::uint64_t n_samples, std::uint64_t seed);

struct KlConsistency {
  double mc_kl = 0.0;
  double closed_kl = 0.0;
  double std_error = 0.0;  // std error of mc_kl
  bool ok = false;         // agreement within 4 std errors
};

// Checks the Monte Carlo KL of the n-sample Gaussian regression pair against
// the closed form n * dist^2 / (2 sigma^2).
KlConsistency verify_kl_consistency(const Evaluator& f, const Evaluator& g, double closed_dist_sq,
                                    double sigma, std::uint64_t n, std::size_t d,
                                    std::uint64_t n_samples, std::uint64_t seed);

struct VerificationRow {
  std::string name;
  double target = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;
};

// Runs every closed-form check (half-space mass, squared and cross ReLU
// moments, L2 distances, a packing-pair separation, KL consistency).
std::vector<VerificationRow> run_verification_suite(std::uint64_t n_samples, std::uint64_t seed);

// "lemma,target,estimate,std_error,n_samples,seed,pass" with one row per check.
std::string verification_csv(const std::vector<VerificationRow>& rows);

}  // namespace rrl::montecarlo
