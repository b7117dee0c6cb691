#include "rrl/montecarlo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rrl/bounds.hpp"
#include "rrl/packing.hpp"
#include "rrl/parallel.hpp"
#include "rrl/rng.hpp"
#include "rrl/textio.hpp"

namespace rrl::montecarlo {

namespace {

// Samples are processed in fixed-size logical shards. Shard s draws from the
// substream derive(seed, kTagShard, s) and partial sums are reduced in shard
// order, so estimates are bit-identical for any worker count.
constexpr std::uint64_t kShardSize = 1u << 15;

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void require_unit(std::span<const double> w, const char* who) {
  if (std::abs(norm2(w) - 1.0) > 1e-12)
    throw std::invalid_argument(std::string(who) + ": direction must be a unit vector");
}

}  // namespace

Matrix sample_standard_gaussian(std::size_t d, std::size_t n, std::uint64_t seed) {
  if (d < 1 || n < 1)
    throw std::invalid_argument("sample_standard_gaussian: d and n must be >= 1");
  Matrix out(n, d);
  rng::GaussianStream g(seed);
  for (double& v : out.flat()) v = g.next();
  return out;
}

McEstimate estimate_mean(std::size_t d, std::uint64_t n_samples, std::uint64_t seed,
                         const std::function<double(std::span<const double>)>& fn) {
  if (d < 1 || n_samples < 2)
    throw std::invalid_argument("estimate_mean: need d >= 1 and n_samples >= 2");
  const std::uint64_t shards = (n_samples + kShardSize - 1) / kShardSize;
  std::vector<double> sums(shards, 0.0);
  std::vector<double> sq_sums(shards, 0.0);

  par::parallel_for(static_cast<std::size_t>(shards), [&](std::size_t s) {
    const std::uint64_t begin = static_cast<std::uint64_t>(s) * kShardSize;
    const std::uint64_t count = std::min<std::uint64_t>(kShardSize, n_samples - begin);
    rng::GaussianStream g(rng::derive(seed, rng::kTagShard, s));
    std::vector<double> x(d);
    double sum = 0.0;
    double sq = 0.0;
    for (std::uint64_t i = 0; i < count; ++i) {
      for (double& v : x) v = g.next();
      const double value = fn(x);
      sum += value;
      sq += value * value;
    }
    sums[s] = sum;
    sq_sums[s] = sq;
  });

  double sum = 0.0;
  double sq = 0.0;
  for (std::uint64_t s = 0; s < shards; ++s) {
    sum += sums[s];
    sq += sq_sums[s];
  }
  const auto n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), n_samples, seed};
}

McEstimate estimate_halfspace_prob(std::span<const double> w, std::uint64_t n_samples,
                                   std::uint64_t seed) {
  if (norm2(w) == 0.0)
    throw std::invalid_argument("estimate_halfspace_prob: direction must be nonzero");
  std::vector<double> wc(w.begin(), w.end());
  return estimate_mean(w.size(), n_samples, seed,
                       [wc](std::span<const double> x) { return dot(wc, x) > 0.0 ? 1.0 : 0.0; });
}

McEstimate estimate_relu_sq_moment(std::span<const double> w, std::uint64_t n_samples,
                                   std::uint64_t seed) {
  require_unit(w, "estimate_relu_sq_moment");
  std::vector<double> wc(w.begin(), w.end());
  return estimate_mean(w.size(), n_samples, seed, [wc](std::span<const double> x) {
    const double z = dot(wc, x);
    return z > 0.0 ? z * z : 0.0;
  });
}

McEstimate estimate_relu_cross_moment(std::span<const double> wi, std::span<const double> wj,
                                      std::uint64_t n_samples, std::uint64_t seed) {
  require_unit(wi, "estimate_relu_cross_moment");
  require_unit(wj, "estimate_relu_cross_moment");
  if (wi.size() != wj.size())
    throw std::invalid_argument("estimate_relu_cross_moment: dimension mismatch");
  if (std::abs(dot(wi, wj)) > 1e-10)
    throw std::invalid_argument("estimate_relu_cross_moment: directions must be orthogonal");
  std::vector<double> a(wi.begin(), wi.end());
  std::vector<double> b(wj.begin(), wj.end());
  return estimate_mean(wi.size(), n_samples, seed, [a, b](std::span<const double> x) {
    const double za = dot(a, x);
    const double zb = dot(b, x);
    return (za > 0.0 && zb > 0.0) ? za * zb : 0.0;
  });
}

McEstimate estimate_l2_distance_sq(const Evaluator& f, const Evaluator& g, std::size_t d,
                                   std::uint64_t n_samples, std::uint64_t seed) {
  return estimate_mean(d, n_samples, seed, [&f, &g](std::span<const double> x) {
    const double diff = f(x) - g(x);
    return diff * diff;
  });
}

KlConsistency verify_kl_consistency(const Evaluator& f, const Evaluator& g, double closed_dist_sq,
                                    double sigma, std::uint64_t n, std::size_t d,
                                    std::uint64_t n_samples, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::invalid_argument("verify_kl_consistency: sigma must be > 0");
  const McEstimate dist = estimate_l2_distance_sq(f, g, d, n_samples, seed);
  const double factor = static_cast<double>(n) / (2.0 * sigma * sigma);
  KlConsistency result;
  result.mc_kl = factor * dist.mean;
  result.closed_kl = bounds::kl_n_product(closed_dist_sq, sigma, n);
  result.std_error = factor * dist.std_error;
  result.ok = std::abs(result.mc_kl - result.closed_kl) <= 4.0 * result.std_error;
  return result;
}

std::vector<VerificationRow> run_verification_suite(std::uint64_t n_samples, std::uint64_t seed) {
  constexpr std::size_t d = 10;
  std::vector<VerificationRow> rows;

  const auto push = [&rows, n_samples](const std::string& name, double target,
                                       const McEstimate& est) {
    const bool pass = std::abs(est.mean - target) <= 4.0 * est.std_error;
    rows.push_back({name, target, est.mean, est.std_error, n_samples, est.seed, pass});
  };

  std::vector<double> e1(d, 0.0);
  e1[0] = 1.0;
  std::vector<double> e2(d, 0.0);
  e2[1] = 1.0;
  std::vector<double> diagonal(d, 1.0 / std::sqrt(static_cast<double>(d)));

  push("halfspace_prob_axis", 0.5,
       estimate_halfspace_prob(e1, n_samples, rng::derive(seed, 1)));
  push("halfspace_prob_rotated", 0.5,
       estimate_halfspace_prob(diagonal, n_samples, rng::derive(seed, 2)));
  push("relu_sq_moment", 0.5, estimate_relu_sq_moment(e1, n_samples, rng::derive(seed, 3)));
  push("relu_cross_moment", 1.0 / (2.0 * std::numbers::pi),
       estimate_relu_cross_moment(e1, e2, n_samples, rng::derive(seed, 4)));

  const Evaluator relu_first = [](std::span<const double> x) {
    return x[0] > 0.0 ? x[0] : 0.0;
  };
  const Evaluator zero = [](std::span<const double>) { return 0.0; };
  push("l2_distance_relu_vs_zero", 0.5,
       estimate_l2_distance_sq(relu_first, zero, d, n_samples, rng::derive(seed, 5)));

  // One packing pair: closed-form separation and the KL identity built on it.
  const packing::PackingEnsemble ensemble = packing::build_ensemble(d, 1, 1.0, 1.0);
  const auto& w0 = ensemble.codebook.codewords[0];
  const auto& w1 = ensemble.codebook.codewords[1];
  const double separation = packing::separation_closed_form(w0, w1, ensemble);
  const Evaluator f0 = [&ensemble](std::span<const double> x) { return ensemble.evaluate(0, x); };
  const Evaluator f1 = [&ensemble](std::span<const double> x) { return ensemble.evaluate(1, x); };
  push("packing_pair_separation", separation,
       estimate_l2_distance_sq(f0, f1, d, n_samples, rng::derive(seed, 6)));

  const std::uint64_t kl_seed = rng::derive(seed, 7);
  const KlConsistency kl =
      verify_kl_consistency(f0, f1, separation, 1.0, 10, d, n_samples, kl_seed);
  rows.push_back({"kl_consistency_n10", kl.closed_kl, kl.mc_kl, kl.std_error, n_samples, kl_seed,
                  kl.ok});
  return rows;
}

std::string verification_csv(const std::vector<VerificationRow>& rows) {
  std::string out = "lemma,target,estimate,std_error,n_samples,seed,pass\n";
  for (const VerificationRow& row : rows) {
    out += row.name + "," + textio::format_g17(row.target) + "," +
           textio::format_g17(row.estimate) + "," + textio::format_g17(row.std_error) + "," +
           std::to_string(row.n_samples) + "," + std::to_string(row.seed) + "," +
           (row.pass ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace rrl::montecarlo
