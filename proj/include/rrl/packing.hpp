#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrl/matrix.hpp"
#include "rrl/model.hpp"

namespace rrl::packing {

using Codeword = std::vector<std::uint8_t>;  // entries 0/1

std::size_t hamming_distance(const Codeword& u, const Codeword& v);

// Constant-weight binary code: every word has exactly weight_m ones and every
// distinct pair is at Hamming distance >= min_dist = ceil(m/5).
struct Codebook {
  std::size_t dim_s = 0;
  std::size_t weight_m = 0;
  std::size_t min_dist = 0;
  std::uint64_t target_card = 0;  // ceil(sqrt(C(S, m)))
  std::vector<Codeword> codewords;
};

struct CodebookOptions {
  std::uint64_t seed = 0;
  std::size_t max_attempts = 16;
  // Candidate sets up to this size are enumerated exhaustively; larger ones
  // are sampled at random with the same greedy accept test.
  std::uint64_t max_enumerated = 1'000'000;
};

// Raised when the greedy sweep plus randomized retries cannot reach the
// target cardinality.
class CodebookConstructionError : public std::runtime_error {
 public:
  CodebookConstructionError(std::string msg, std::uint64_t best, std::uint64_t target)
      : std::runtime_error(std::move(msg)), best_cardinality(best), target_cardinality(target) {}
  std::uint64_t best_cardinality;
  std::uint64_t target_cardinality;
};

// Greedy Gilbert-Varshamov construction over weight-m words of length S in
// deterministic lexicographic order, with seeded random candidate orders as
// fallback attempts. Preconditions: S >= 10 and 1 <= m <= floor(S/10).
Codebook build_codebook(std::size_t s, std::size_t m, const CodebookOptions& options = {});

// C(n, k) saturated at UINT64_MAX.
std::uint64_t binomial_saturated(std::uint64_t n, std::uint64_t k);

// Family of shallow networks f_w(x) = scale_t * sum_k w_k relu(x_k), one per
// codeword, with standard-basis first-layer directions (unit l1/l2 rows) and
// scale_t = tau * vf / m.
struct PackingEnsemble {
  std::size_t input_dim = 0;
  Codebook codebook;
  double tau = 0.0;
  double vf = 0.0;
  double scale_t = 0.0;

  std::size_t size() const { return codebook.codewords.size(); }
  double evaluate(std::size_t member, std::span<const double> x) const;
  model::NetworkParams member_params(std::size_t member) const;
};

PackingEnsemble build_ensemble(std::size_t d, std::size_t m, double tau, double vf,
                               const CodebookOptions& options = {});

// Exact expected squared L2(P_X) distance between two equal-weight members:
// scale_t^2 * H * (pi - 1) / (2 pi) with H the Hamming distance. Equal
// weights force the cross terms to sum to exactly -H.
double separation_closed_form(const Codeword& w, const Codeword& w_prime,
                              const PackingEnsemble& ensemble);

// (tau vf)^2 / (25 m), the separation every admissible pair must clear.
double separation_floor(double tau, double vf, std::size_t m);

// m = round((tau vf / (10 delta))^2), clamped to >= 1. The caller still has
// to check m <= floor(d/10) before building an ensemble.
std::size_t weight_for_radius(double delta, double tau, double vf);

class InfeasibleScaleError : public std::runtime_error {
 public:
  InfeasibleScaleError(std::string msg, double max_scale)
      : std::runtime_error(std::move(msg)), max_achievable_scale(max_scale) {}
  double max_achievable_scale;
};

// Non-negative depth-L factorization of target_scale * codeword^T: diagonal
// factors with constant c on the support and a final row c * codeword^T, so
// the product is c^L * codeword^T. Feasible iff target <= (vs/(L m))^L.
struct DeepFactorization {
  std::vector<Matrix> matrices;  // W^1 .. W^L
  double achieved_scale = 0.0;   // c^L
  double layer_constant = 0.0;   // c
};

DeepFactorization factorize_deep(const Codeword& codeword, std::size_t depth, double vs,
                                 double target_scale);

// Full network (identity W^0 plus the factor chain) realizing the deep member.
model::NetworkParams deep_member_params(const DeepFactorization& factorization);

// Plain-text export: "# S=<S> m=<m> min_dist=<t>" then one 0/1 string per word.
std::string codebook_text(const Codebook& book);

// {"d","m","tau","vf","scale_t","codewords":[...]} with codewords as 0/1 strings.
std::string ensemble_json(const PackingEnsemble& ensemble);

// Pairwise separation certificate; all_pass (optional) reports whether every
// pair clears the floor.
std::string certificate_csv(const PackingEnsemble& ensemble, bool* all_pass = nullptr);

}  // namespace rrl::packing
