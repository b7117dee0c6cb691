#include "rrl/ratefit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rrl/textio.hpp"

namespace rrl::ratefit {

double regressor(Curve curve, double n) {
  return curve == Curve::kInvSqrtN ? 1.0 / std::sqrt(n) : 1.0 / n;
}

double objective(std::span<const FitPoint> points, Curve curve, double intercept, double slope) {
  double total = 0.0;
  for (const FitPoint& p : points) {
    const double r = p.error - intercept - slope * regressor(curve, p.n);
    total += r * r;
  }
  return total;
}

void objective_gradient(std::span<const FitPoint> points, Curve curve, double intercept,
                        double slope, double* d_intercept, double* d_slope) {
  double gi = 0.0;
  double gs = 0.0;
  for (const FitPoint& p : points) {
    const double g = regressor(curve, p.n);
    const double r = p.error - intercept - slope * g;
    gi += -2.0 * r;
    gs += -2.0 * r * g;
  }
  *d_intercept = gi;
  *d_slope = gs;
}

namespace {

void require_fittable(std::span<const FitPoint> points) {
  if (points.size() < 2)
    throw std::invalid_argument("fit_curve: underdetermined, need at least 2 points");
  for (const FitPoint& p : points)
    if (!(p.n >= 1.0)) throw std::invalid_argument("fit_curve: sample sizes must be >= 1");
  bool distinct = false;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].n != points[0].n) distinct = true;
  if (!distinct)
    throw std::invalid_argument("fit_curve: underdetermined, need at least 2 distinct n values");
}

bool constant_errors(std::span<const FitPoint> points) {
  for (const FitPoint& p : points)
    if (p.error != points[0].error) return false;
  return true;
}

}  // namespace

FitResult fit_curve(std::span<const FitPoint> points, Curve curve) {
  require_fittable(points);
  const auto count = static_cast<double>(points.size());

  FitResult fit;
  fit.curve = curve;

  if (constant_errors(points)) {
    fit.intercept = std::max(0.0, points[0].error);
    fit.slope = 0.0;
    fit.degenerate = true;
    fit.mse = objective(points, curve, fit.intercept, fit.slope) / count;
    fit.r_squared = r_squared(points, fit);
    return fit;
  }

  double sum_g = 0.0;
  double sum_gg = 0.0;
  double sum_e = 0.0;
  double sum_ge = 0.0;
  for (const FitPoint& p : points) {
    const double g = regressor(curve, p.n);
    sum_g += g;
    sum_gg += g * g;
    sum_e += p.error;
    sum_ge += g * p.error;
  }

  const double det = count * sum_gg - sum_g * sum_g;
  double best_i = 0.0;
  double best_s = 0.0;
  bool have_solution = false;
  if (det > 0.0) {
    const double unconstrained_i = (sum_e * sum_gg - sum_g * sum_ge) / det;
    const double unconstrained_s = (count * sum_ge - sum_g * sum_e) / det;
    if (unconstrained_i >= 0.0 && unconstrained_s >= 0.0) {
      best_i = unconstrained_i;
      best_s = unconstrained_s;
      have_solution = true;
    }
  }

  if (!have_solution) {
    // Active-set enumeration: one coordinate clamped at zero, or both.
    const double cand_slope = std::max(0.0, sum_ge / sum_gg);
    const double cand_intercept = std::max(0.0, sum_e / count);
    double best_obj = std::numeric_limits<double>::infinity();
    const double candidates[3][2] = {
        {0.0, cand_slope}, {cand_intercept, 0.0}, {0.0, 0.0}};
    for (const auto& cand : candidates) {
      const double obj = objective(points, curve, cand[0], cand[1]);
      if (obj < best_obj) {
        best_obj = obj;
        best_i = cand[0];
        best_s = cand[1];
      }
    }
  }

  fit.intercept = best_i;
  fit.slope = best_s;
  fit.mse = objective(points, curve, best_i, best_s) / count;
  fit.r_squared = r_squared(points, fit);
  return fit;
}

double r_squared(std::span<const FitPoint> points, const FitResult& fit) {
  const double ss_res = objective(points, fit.curve, fit.intercept, fit.slope);
  if (constant_errors(points))
    return ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  const auto count = static_cast<double>(points.size());
  double sum_e = 0.0;
  for (const FitPoint& p : points) sum_e += p.error;
  const double mean = sum_e / count;
  double ss_tot = 0.0;
  for (const FitPoint& p : points) {
    const double dev = p.error - mean;
    ss_tot += dev * dev;
  }
  return 1.0 - ss_res / ss_tot;
}

Verdict compare(std::span<const FitPoint> points) {
  Verdict verdict;
  verdict.fit_inv_sqrt_n = fit_curve(points, Curve::kInvSqrtN);
  verdict.fit_inv_n = fit_curve(points, Curve::kInvN);
  verdict.margin = verdict.fit_inv_sqrt_n.r_squared - verdict.fit_inv_n.r_squared;
  if (std::isnan(verdict.margin)) verdict.margin = 0.0;  // both R^2 undefined
  if ((verdict.fit_inv_sqrt_n.degenerate && verdict.fit_inv_n.degenerate) ||
      std::abs(verdict.margin) <= 1e-9) {
    verdict.winner = Winner::kTie;
  } else {
    verdict.winner = verdict.margin > 0.0 ? Winner::kInvSqrtN : Winner::kInvN;
  }
  return verdict;
}

std::string curve_name(Curve curve) {
  return curve == Curve::kInvSqrtN ? "inv_sqrt_n" : "inv_n";
}

std::string winner_name(Winner winner) {
  switch (winner) {
    case Winner::kInvSqrtN: return "inv_sqrt_n";
    case Winner::kInvN: return "inv_n";
    default: return "tie";
  }
}

namespace {
std::string r_squared_json(double value) {
  if (std::isinf(value) && value < 0.0) return "\"undefined\"";
  return textio::format_g17(value);
}

std::string fit_json(const FitResult& fit) {
  return std::string("{\"curve\":\"") + curve_name(fit.curve) + "\",\"intercept\":" +
         textio::format_g17(fit.intercept) + ",\"slope\":" + textio::format_g17(fit.slope) +
         ",\"mse\":" + textio::format_g17(fit.mse) + ",\"r_squared\":" +
         r_squared_json(fit.r_squared) + ",\"degenerate\":" +
         (fit.degenerate ? "true" : "false") + "}";
}
}  // namespace

std::string verdict_json(const Verdict& verdict) {
  return std::string("{\"inv_sqrt_n\":") + fit_json(verdict.fit_inv_sqrt_n) + ",\"inv_n\":" +
         fit_json(verdict.fit_inv_n) + ",\"winner\":\"" + winner_name(verdict.winner) +
         "\",\"margin\":" + textio::format_g17(verdict.margin) + "}";
}

std::string plot_csv(std::span<const FitPoint> points, const Verdict& verdict) {
  std::string out = "n,observed,fitted_sqrt,fitted_inv\n";
  for (const FitPoint& p : points) {
    const double fitted_sqrt = verdict.fit_inv_sqrt_n.intercept +
                               verdict.fit_inv_sqrt_n.slope * regressor(Curve::kInvSqrtN, p.n);
    const double fitted_inv =
        verdict.fit_inv_n.intercept + verdict.fit_inv_n.slope * regressor(Curve::kInvN, p.n);
    out += textio::format_g17(p.n) + "," + textio::format_g17(p.error) + "," +
           textio::format_g17(fitted_sqrt) + "," + textio::format_g17(fitted_inv) + "\n";
  }
  return out;
}

}  // namespace rrl::ratefit
