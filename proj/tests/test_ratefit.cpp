#include <stdexcept>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "doctest.h"
#include "rrl/ratefit.hpp"
#include "rrl/rng.hpp"

namespace ratefit = rrl::ratefit;
using ratefit::Curve;
using ratefit::FitPoint;

namespace {

std::vector<FitPoint> series_from(Curve curve, double intercept, double slope,
                                  const std::vector<double>& ns) {
  std::vector<FitPoint> points;
  for (double n : ns) points.push_back({n, intercept + slope * ratefit::regressor(curve, n)});
  return points;
}

// random series with positive ground-truth parameters plus Gaussian noise
std::vector<FitPoint> random_series(std::uint64_t seed) {
  rrl::rng::SplitMix64 uni(seed);
  rrl::rng::GaussianStream gauss(rrl::rng::derive(seed, 1));
  const Curve curve = uni.next_below(2) == 0 ? Curve::kInvSqrtN : Curve::kInvN;
  const double intercept = 2.0 * uni.next_unit();
  const double slope = 0.1 + 3.0 * uni.next_unit();
  const double noise = 0.002 + 0.05 * uni.next_unit();
  std::vector<FitPoint> points;
  const std::size_t count = 4 + uni.next_below(8);
  double n = 50.0 + static_cast<double>(uni.next_below(200));
  for (std::size_t i = 0; i < count; ++i) {
    points.push_back({n, intercept + slope * ratefit::regressor(curve, n) + noise * gauss.next()});
    n *= 1.5 + uni.next_unit();
  }
  return points;
}

// dense grid over [0, 3 max(theta_hat, eps)]^2; objective in expanded form so
// a million evaluations stay cheap
double grid_search_best(const std::vector<FitPoint>& points, Curve curve, double hi_i,
                        double hi_s, std::size_t cells) {
  double sum_e2 = 0.0;
  double sum_e = 0.0;
  double sum_g = 0.0;
  double sum_gg = 0.0;
  double sum_ge = 0.0;
  const double count = static_cast<double>(points.size());
  for (const FitPoint& p : points) {
    const double g = ratefit::regressor(curve, p.n);
    sum_e2 += p.error * p.error;
    sum_e += p.error;
    sum_g += g;
    sum_gg += g * g;
    sum_ge += g * p.error;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < cells; ++a) {
    const double t0 = hi_i * static_cast<double>(a) / static_cast<double>(cells - 1);
    for (std::size_t b = 0; b < cells; ++b) {
      const double t1 = hi_s * static_cast<double>(b) / static_cast<double>(cells - 1);
      const double obj = sum_e2 - 2.0 * t0 * sum_e - 2.0 * t1 * sum_ge + t0 * t0 * count +
                         2.0 * t0 * t1 * sum_g + t1 * t1 * sum_gg;
      if (obj < best) best = obj;
    }
  }
  return best;
}

void check_kkt(const std::vector<FitPoint>& points, const ratefit::FitResult& fit) {
  double scale = 1.0;
  for (const FitPoint& p : points) scale = std::max(scale, p.error * p.error);
  double d_intercept = 0.0;
  double d_slope = 0.0;
  ratefit::objective_gradient(points, fit.curve, fit.intercept, fit.slope, &d_intercept,
                              &d_slope);
  if (fit.intercept > 0.0)
    CHECK(std::abs(d_intercept) <= 1e-8 * scale);
  else
    CHECK(d_intercept >= -1e-8 * scale);
  if (fit.slope > 0.0)
    CHECK(std::abs(d_slope) <= 1e-8 * scale);
  else
    CHECK(d_slope >= -1e-8 * scale);
}

}  // namespace

TEST_SUITE("ratefit") {

TEST_CASE("exact interpolation of a consistent sqrt-rate series") {
  const std::vector<FitPoint> points{{100.0, 0.4}, {400.0, 0.25}, {2500.0, 0.16}};
  const auto fit = ratefit::fit_curve(points, Curve::kInvSqrtN);
  CHECK(fit.intercept == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.mse <= 1e-24);
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(fit.degenerate);
}

TEST_CASE("hand-solved normal equations for e = 2/n") {
  const std::vector<FitPoint> points{{1.0, 2.0}, {2.0, 1.0}, {4.0, 0.5}};

  // oracle: solve the 2x2 normal equations by hand for g = 1/n
  // sums: N=3, sum g = 1.75, sum g^2 = 1.3125, sum e = 3.5, sum ge = 2.625
  // det = 3*1.3125 - 1.75^2 = 0.875; intercept = 0; slope = 2
  const auto inv_fit = ratefit::fit_curve(points, Curve::kInvN);
  CHECK(inv_fit.intercept == 0.0);
  CHECK(inv_fit.slope == 2.0);
  CHECK(inv_fit.mse == 0.0);
  CHECK(inv_fit.r_squared == 1.0);

  const auto sqrt_fit = ratefit::fit_curve(points, Curve::kInvSqrtN);
  CHECK(sqrt_fit.mse > 0.0);
  CHECK(sqrt_fit.r_squared < 1.0);
}

TEST_CASE("constant series is degenerate for both curves") {
  const std::vector<FitPoint> points{{10.0, 0.3}, {100.0, 0.3}, {1000.0, 0.3}};
  for (Curve curve : {Curve::kInvSqrtN, Curve::kInvN}) {
    const auto fit = ratefit::fit_curve(points, curve);
    CHECK(fit.intercept == 0.3);
    CHECK(fit.slope == 0.0);
    CHECK(fit.mse == 0.0);
    CHECK(fit.degenerate);
    CHECK(fit.r_squared == 1.0);  // zero residuals on zero-variance data
  }
  const auto verdict = ratefit::compare(points);
  CHECK(verdict.winner == ratefit::Winner::kTie);
}

TEST_CASE("r squared definitions") {
  const std::vector<FitPoint> points{{10.0, 1.0}, {100.0, 0.5}, {1000.0, 0.4}};

  // mean-only prediction scores exactly zero
  ratefit::FitResult mean_only;
  mean_only.curve = Curve::kInvN;
  mean_only.intercept = (1.0 + 0.5 + 0.4) / 3.0;
  mean_only.slope = 0.0;
  CHECK(ratefit::r_squared(points, mean_only) == 0.0);

  // a bad fit scores negative
  ratefit::FitResult bad;
  bad.curve = Curve::kInvN;
  bad.intercept = 10.0;
  bad.slope = 100.0;
  CHECK(ratefit::r_squared(points, bad) < 0.0);

  // degenerate data with nonzero residuals reports the undefined sentinel
  const std::vector<FitPoint> flat{{10.0, 0.5}, {100.0, 0.5}};
  ratefit::FitResult off;
  off.curve = Curve::kInvN;
  off.intercept = 0.0;
  off.slope = 0.0;
  CHECK(std::isinf(ratefit::r_squared(flat, off)));
}

TEST_CASE("generator recovery picks the generating family") {
  const std::vector<double> ns{250, 500, 1000, 2000, 4000, 8000};

  const auto sqrt_series = series_from(Curve::kInvSqrtN, 0.25, 2.0, ns);
  const auto sqrt_verdict = ratefit::compare(sqrt_series);
  CHECK(sqrt_verdict.winner == ratefit::Winner::kInvSqrtN);
  CHECK(sqrt_verdict.margin > 0.0);
  CHECK(sqrt_verdict.fit_inv_sqrt_n.mse <= 1e-20);
  CHECK(sqrt_verdict.fit_inv_sqrt_n.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  const auto inv_series = series_from(Curve::kInvN, 0.25, 40.0, ns);
  const auto inv_verdict = ratefit::compare(inv_series);
  CHECK(inv_verdict.winner == ratefit::Winner::kInvN);
  CHECK(inv_verdict.fit_inv_n.mse <= 1e-20);
}

TEST_CASE("active set beats a dense grid on random series") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto points = random_series(seed);
    for (Curve curve : {Curve::kInvSqrtN, Curve::kInvN}) {
      const auto fit = ratefit::fit_curve(points, curve);
      check_kkt(points, fit);

      const double my_obj = ratefit::objective(points, curve, fit.intercept, fit.slope);
      const double hi_i = 3.0 * std::max(fit.intercept, 1e-3);
      const double hi_s = 3.0 * std::max(fit.slope, 1e-3);
      const double grid_obj = grid_search_best(points, curve, hi_i, hi_s, 1000);
      CHECK(my_obj <= grid_obj + 1e-6 * std::max(1.0, grid_obj));
    }
  }
}

TEST_CASE("fit is invariant to row order and duplication") {
  const auto points = random_series(314);
  auto reversed = points;
  std::reverse(reversed.begin(), reversed.end());
  auto doubled = points;
  doubled.insert(doubled.end(), points.begin(), points.end());

  for (Curve curve : {Curve::kInvSqrtN, Curve::kInvN}) {
    const auto base = ratefit::fit_curve(points, curve);
    const auto rev = ratefit::fit_curve(reversed, curve);
    const auto dup = ratefit::fit_curve(doubled, curve);
    CHECK(rev.intercept == doctest::Approx(base.intercept).epsilon(1e-12));
    CHECK(rev.slope == doctest::Approx(base.slope).epsilon(1e-12));
    CHECK(dup.intercept == doctest::Approx(base.intercept).epsilon(1e-12));
    CHECK(dup.slope == doctest::Approx(base.slope).epsilon(1e-12));
    CHECK(dup.mse == doctest::Approx(base.mse).epsilon(1e-12));
  }
}

TEST_CASE("reported mse equals the recomputed mean residual") {
  const auto points = random_series(2718);
  const auto fit = ratefit::fit_curve(points, Curve::kInvSqrtN);
  double ss = 0.0;
  for (const FitPoint& p : points) {
    const double r = p.error - fit.intercept - fit.slope * ratefit::regressor(fit.curve, p.n);
    ss += r * r;
  }
  CHECK(fit.mse == doctest::Approx(ss / static_cast<double>(points.size())).epsilon(1e-12));
}

TEST_CASE("underdetermined series are rejected") {
  const std::vector<FitPoint> one{{100.0, 0.5}};
  CHECK_THROWS_AS(ratefit::fit_curve(one, Curve::kInvN), std::invalid_argument);
  const std::vector<FitPoint> same_n{{100.0, 0.5}, {100.0, 0.6}};
  CHECK_THROWS_AS(ratefit::fit_curve(same_n, Curve::kInvN), std::invalid_argument);
}

TEST_CASE("verdict JSON and plot CSV") {
  const std::vector<double> ns{100, 400, 1600};
  const auto points = series_from(Curve::kInvSqrtN, 0.1, 1.0, ns);
  const auto verdict = ratefit::compare(points);
  const std::string json = ratefit::verdict_json(verdict);
  CHECK(json.find("\"winner\":\"inv_sqrt_n\"") != std::string::npos);
  CHECK(json.find("\"inv_sqrt_n\":{\"curve\":\"inv_sqrt_n\"") != std::string::npos);
  CHECK(json.find("\"inv_n\":{\"curve\":\"inv_n\"") != std::string::npos);

  const std::string csv = ratefit::plot_csv(points, verdict);
  CHECK(csv.rfind("n,observed,fitted_sqrt,fitted_inv\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 4);

  // the undefined sentinel serializes as a string
  const std::vector<FitPoint> flat{{10.0, 0.0}, {100.0, 0.0}};
  auto flat_verdict = ratefit::compare(flat);
  flat_verdict.fit_inv_n.r_squared = -std::numeric_limits<double>::infinity();
  CHECK(ratefit::verdict_json(flat_verdict).find("\"undefined\"") != std::string::npos);
}

}  // TEST_SUITE
