#include "rrl/packing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "json.hpp"
#include "rrl/rng.hpp"
#include "rrl/textio.hpp"

namespace rrl::packing {

std::size_t hamming_distance(const Codeword& u, const Codeword& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("hamming_distance: length mismatch");
  std::size_t dist = 0;
  for (std::size_t i = 0; i < u.size(); ++i) dist += (u[i] != v[i]) ? 1 : 0;
  return dist;
}

std::uint64_t binomial_saturated(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(result);
}

namespace {

constexpr std::size_t kWordBits = 64;

std::size_t block_count(std::size_t s) { return (s + kWordBits - 1) / kWordBits; }

// Codewords are packed into 64-bit blocks during construction; distances are
// XOR + popcount.
std::size_t packed_distance(const std::uint64_t* a, const std::uint64_t* b, std::size_t blocks) {
  std::size_t dist = 0;
  for (std::size_t i = 0; i < blocks; ++i) dist += std::popcount(a[i] ^ b[i]);
  return dist;
}

Codeword unpack(const std::uint64_t* word, std::size_t s) {
  Codeword out(s, 0);
  for (std::size_t i = 0; i < s; ++i)
    out[i] = (word[i / kWordBits] >> (i % kWordBits)) & 1u;
  return out;
}

std::uint64_t ceil_sqrt(std::uint64_t value) {
  if (value == 0) return 0;
  auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(value)));
  while (root > 0 && (root - 1) * (root - 1) >= value) --root;
  while (root * root < value) ++root;
  return root;
}

// Lexicographic enumeration of all weight-m words of length s (positions in
// increasing order), packed.
std::vector<std::uint64_t> enumerate_candidates(std::size_t s, std::size_t m,
                                                std::size_t blocks) {
  std::vector<std::size_t> idx(m);
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  std::vector<std::uint64_t> flat;
  for (;;) {
    std::vector<std::uint64_t> word(blocks, 0);
    for (std::size_t pos : idx) word[pos / kWordBits] |= 1ull << (pos % kWordBits);
    flat.insert(flat.end(), word.begin(), word.end());
    // next combination
    std::size_t j = m;
    while (j > 0 && idx[j - 1] == s - m + (j - 1)) --j;
    if (j == 0) break;
    ++idx[j - 1];
    for (std::size_t t = j; t < m; ++t) idx[t] = idx[t - 1] + 1;
  }
  return flat;
}

std::vector<std::uint64_t> random_candidate(std::size_t s, std::size_t m, std::size_t blocks,
                                            rng::SplitMix64& gen) {
  // Partial Fisher-Yates over positions 0..s-1; first m entries are the support.
  std::vector<std::size_t> positions(s);
  for (std::size_t i = 0; i < s; ++i) positions[i] = i;
  std::vector<std::uint64_t> word(blocks, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(gen.next_below(s - i));
    std::swap(positions[i], positions[j]);
    word[positions[i] / kWordBits] |= 1ull << (positions[i] % kWordBits);
  }
  return word;
}

struct PackedWordHash {
  std::size_t operator()(const std::vector<std::uint64_t>& w) const {
    std::uint64_t h = 0x51ed270b7a03f2e1ull;
    for (std::uint64_t b : w) h = rng::mix64(h ^ b);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

Codebook build_codebook(std::size_t s, std::size_t m, const CodebookOptions& options) {
  if (s < 10) throw std::invalid_argument("build_codebook: S must be >= 10");
  if (m < 1 || m > s / 10)
    throw std::invalid_argument("build_codebook: weight must satisfy 1 <= m <= floor(S/10)");

  const std::size_t min_dist = (m + 4) / 5;  // ceil(m/5)
  const std::size_t blocks = block_count(s);
  const std::uint64_t total = binomial_saturated(s, m);

  std::uint64_t target = 0;
  if (total == UINT64_MAX) {
    const double log_c = std::lgamma(static_cast<double>(s) + 1.0) -
                         std::lgamma(static_cast<double>(m) + 1.0) -
                         std::lgamma(static_cast<double>(s - m) + 1.0);
    const double approx = std::ceil(std::exp(0.5 * log_c));
    target = approx >= 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(approx);
  } else {
    target = ceil_sqrt(total);
  }

  // Distinct equal-weight words always differ in at least two positions, so a
  // required distance of 1 or 2 reduces the accept test to distinctness.
  const bool distinct_suffices = min_dist <= 2;

  auto accept = [&](const std::uint64_t* cand, const std::vector<std::uint64_t>& kept_flat,
                    std::size_t kept_count) {
    for (std::size_t k = 0; k < kept_count; ++k)
      if (packed_distance(cand, kept_flat.data() + k * blocks, blocks) < min_dist) return false;
    return true;
  };

  std::vector<std::uint64_t> best_flat;
  std::size_t best_count = 0;

  const bool enumerable = total <= options.max_enumerated;
  std::vector<std::uint64_t> all_candidates;
  if (enumerable) all_candidates = enumerate_candidates(s, m, blocks);
  const std::size_t candidate_count = enumerable ? all_candidates.size() / blocks : 0;

  for (std::size_t attempt = 0; attempt <= options.max_attempts; ++attempt) {
    std::vector<std::uint64_t> kept_flat;
    std::size_t kept_count = 0;

    if (enumerable) {
      std::vector<std::size_t> order(candidate_count);
      for (std::size_t i = 0; i < candidate_count; ++i) order[i] = i;
      if (attempt > 0) {
        rng::SplitMix64 gen(rng::derive(options.seed, rng::kTagAttempt, attempt));
        for (std::size_t i = candidate_count; i > 1; --i)
          std::swap(order[i - 1], order[gen.next_below(i)]);
      }
      for (std::size_t i : order) {
        const std::uint64_t* cand = all_candidates.data() + i * blocks;
        if (distinct_suffices || accept(cand, kept_flat, kept_count)) {
          kept_flat.insert(kept_flat.end(), cand, cand + blocks);
          ++kept_count;
        }
      }
    } else {
      rng::SplitMix64 gen(rng::derive(options.seed, rng::kTagAttempt, attempt));
      std::unordered_set<std::vector<std::uint64_t>, PackedWordHash> seen;
      for (std::uint64_t draws = 0; draws < options.max_enumerated && kept_count < target;
           ++draws) {
        auto cand = random_candidate(s, m, blocks, gen);
        if (distinct_suffices) {
          if (!seen.insert(cand).second) continue;
        } else if (!accept(cand.data(), kept_flat, kept_count)) {
          continue;
        }
        kept_flat.insert(kept_flat.end(), cand.begin(), cand.end());
        ++kept_count;
      }
    }

    if (kept_count > best_count) {
      best_count = kept_count;
      best_flat = kept_flat;
    }
    if (kept_count >= target) break;
  }

  if (best_count < target)
    throw CodebookConstructionError(
        "build_codebook: reached cardinality " + std::to_string(best_count) + " of required " +
            std::to_string(target) + " for S=" + std::to_string(s) + " m=" + std::to_string(m),
        best_count, target);

  Codebook book;
  book.dim_s = s;
  book.weight_m = m;
  book.min_dist = min_dist;
  book.target_card = target;
  book.codewords.reserve(best_count);
  for (std::size_t k = 0; k < best_count; ++k)
    book.codewords.push_back(unpack(best_flat.data() + k * blocks, s));
  return book;
}

double PackingEnsemble::evaluate(std::size_t member, std::span<const double> x) const {
  if (member >= codebook.codewords.size())
    throw std::invalid_argument("PackingEnsemble: member index out of range");
  if (x.size() != input_dim)
    throw std::invalid_argument("PackingEnsemble: input length mismatch");
  const Codeword& w = codebook.codewords[member];
  double sum = 0.0;
  for (std::size_t k = 0; k < input_dim; ++k)
    if (w[k] != 0 && x[k] > 0.0) sum += x[k];
  return scale_t * sum;
}

model::NetworkParams PackingEnsemble::member_params(std::size_t member) const {
  if (member >= codebook.codewords.size())
    throw std::invalid_argument("PackingEnsemble: member index out of range");
  const Codeword& w = codebook.codewords[member];
  model::NetworkParams params;
  params.weights.push_back(Matrix::identity(input_dim));
  Matrix out(1, input_dim);
  for (std::size_t k = 0; k < input_dim; ++k) out(0, k) = scale_t * static_cast<double>(w[k]);
  params.weights.push_back(std::move(out));
  return params;
}

PackingEnsemble build_ensemble(std::size_t d, std::size_t m, double tau, double vf,
                               const CodebookOptions& options) {
  if (!(tau > 0.0) || !(vf > 0.0))
    throw std::invalid_argument("build_ensemble: tau and vf must be > 0");
  PackingEnsemble ensemble;
  ensemble.input_dim = d;
  ensemble.codebook = build_codebook(d, m, options);
  ensemble.tau = tau;
  ensemble.vf = vf;
  ensemble.scale_t = tau * vf / static_cast<double>(m);
  return ensemble;
}

double separation_closed_form(const Codeword& w, const Codeword& w_prime,
                              const PackingEnsemble& ensemble) {
  if (w.size() != ensemble.input_dim || w_prime.size() != ensemble.input_dim)
    throw std::invalid_argument("separation_closed_form: codeword length mismatch");
  const auto weight = [](const Codeword& c) {
    std::size_t sum = 0;
    for (std::uint8_t b : c) sum += b;
    return sum;
  };
  const std::size_t m = ensemble.codebook.weight_m;
  if (weight(w) != m || weight(w_prime) != m)
    throw std::invalid_argument("separation_closed_form: codewords must have equal weight m");
  const auto h = static_cast<double>(hamming_distance(w, w_prime));
  // Signed differences sum to zero, so the cross terms contribute exactly -H:
  // E|f - f'|^2 = t^2 (H/2 - H/(2 pi)).
  return ensemble.scale_t * ensemble.scale_t * h * (std::numbers::pi - 1.0) /
         (2.0 * std::numbers::pi);
}

double separation_floor(double tau, double vf, std::size_t m) {
  return tau * vf * tau * vf / (25.0 * static_cast<double>(m));
}

std::size_t weight_for_radius(double delta, double tau, double vf) {
  if (!(delta > 0.0)) throw std::invalid_argument("weight_for_radius: delta must be > 0");
  const double ratio = tau * vf / (10.0 * delta);
  const double rounded = std::floor(ratio * ratio + 0.5);  // round half up
  if (rounded < 1.0) return 1;
  if (rounded >= 9.0e18)  // beyond any representable codeword weight
    throw std::invalid_argument("weight_for_radius: radius too small, weight overflows");
  return static_cast<std::size_t>(rounded);
}

DeepFactorization factorize_deep(const Codeword& codeword, std::size_t depth, double vs,
                                 double target_scale) {
  if (depth < 1) throw std::invalid_argument("factorize_deep: depth must be >= 1");
  if (!(vs > 0.0)) throw std::invalid_argument("factorize_deep: vs must be > 0");
  if (!(target_scale > 0.0))
    throw std::invalid_argument("factorize_deep: target_scale must be > 0");
  std::size_t m = 0;
  for (std::uint8_t b : codeword) m += b;
  if (m < 1) throw std::invalid_argument("factorize_deep: codeword weight must be >= 1");

  const std::size_t s = codeword.size();
  const auto depth_d = static_cast<double>(depth);
  const double c_budget = vs / (depth_d * static_cast<double>(m));
  const auto power = [depth](double c) {
    double p = c;
    for (std::size_t l = 1; l < depth; ++l) p *= c;
    return p;
  };
  const double max_scale = power(c_budget);
  if (target_scale > max_scale * (1.0 + 1e-12))
    throw InfeasibleScaleError(
        "factorize_deep: target scale " + textio::format_g17(target_scale) +
            " exceeds the maximum achievable " + textio::format_g17(max_scale) +
            " = (vs/(L m))^L",
        max_scale);

  double c = 0.0;
  if (depth == 1) {
    c = target_scale;
  } else {
    c = std::pow(target_scale, 1.0 / depth_d);
    // Newton polish so c^L (as actually multiplied out) hits the target.
    for (int iter = 0; iter < 4; ++iter) {
      const double f = power(c) - target_scale;
      if (f == 0.0) break;
      const double step = f / (depth_d * power(c) / c);
      const double next = c - step;
      if (next == c) break;
      c = next;
    }
  }
  if (c > c_budget) c = c_budget;
  // Nudge below the budget if the division rounded up by an ulp.
  while (depth_d * c * static_cast<double>(m) > vs) c = std::nextafter(c, 0.0);

  const double achieved = power(c);
  if (achieved < target_scale * (1.0 - 1e-12))
    throw InfeasibleScaleError(
        "factorize_deep: budget clamp leaves achievable scale " + textio::format_g17(achieved) +
            " below the target " + textio::format_g17(target_scale),
        max_scale);

  DeepFactorization result;
  result.layer_constant = c;
  result.achieved_scale = achieved;
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    Matrix diag(s, s);
    for (std::size_t k = 0; k < s; ++k)
      if (codeword[k] != 0) diag(k, k) = c;
    result.matrices.push_back(std::move(diag));
  }
  Matrix out(1, s);
  for (std::size_t k = 0; k < s; ++k) out(0, k) = c * static_cast<double>(codeword[k]);
  result.matrices.push_back(std::move(out));
  return result;
}

model::NetworkParams deep_member_params(const DeepFactorization& factorization) {
  if (factorization.matrices.empty())
    throw std::invalid_argument("deep_member_params: empty factorization");
  const std::size_t s = factorization.matrices.front().cols();
  model::NetworkParams params;
  params.weights.reserve(factorization.matrices.size() + 1);
  params.weights.push_back(Matrix::identity(s));
  for (const Matrix& w : factorization.matrices) params.weights.push_back(w);
  return params;
}

std::string codebook_text(const Codebook& book) {
  std::string out = "# S=" + std::to_string(book.dim_s) + " m=" + std::to_string(book.weight_m) +
                    " min_dist=" + std::to_string(book.min_dist) + "\n";
  for (const Codeword& w : book.codewords) {
    for (std::uint8_t b : w) out.push_back(b ? '1' : '0');
    out.push_back('\n');
  }
  return out;
}

namespace {
std::string codeword_string(const Codeword& w) {
  std::string s;
  s.reserve(w.size());
  for (std::uint8_t b : w) s.push_back(b ? '1' : '0');
  return s;
}
}  // namespace

std::string ensemble_json(const PackingEnsemble& ensemble) {
  nlohmann::ordered_json doc;
  doc["d"] = ensemble.input_dim;
  doc["m"] = ensemble.codebook.weight_m;
  doc["tau"] = ensemble.tau;
  doc["vf"] = ensemble.vf;
  doc["scale_t"] = ensemble.scale_t;
  auto& words = doc["codewords"] = nlohmann::ordered_json::array();
  for (const Codeword& w : ensemble.codebook.codewords) words.push_back(codeword_string(w));
  return doc.dump();
}

std::string certificate_csv(const PackingEnsemble& ensemble, bool* all_pass) {
  const double floor_value =
      separation_floor(ensemble.tau, ensemble.vf, ensemble.codebook.weight_m);
  std::string out = "i,j,hamming,separation,floor,pass\n";
  bool pass_all = true;
  const auto& words = ensemble.codebook.codewords;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i + 1; j < words.size(); ++j) {
      const double sep = separation_closed_form(words[i], words[j], ensemble);
      const std::size_t h = hamming_distance(words[i], words[j]);
      const bool pass = sep >= floor_value;
      pass_all = pass_all && pass;
      out += std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(h) + "," +
             textio::format_g17(sep) + "," + textio::format_g17(floor_value) + "," +
             (pass ? "1" : "0") + "\n";
    }
  }
  if (all_pass != nullptr) *all_pass = pass_all;
  return out;
}

}  // namespace rrl::packing
