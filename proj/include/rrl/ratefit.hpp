#pragma once

#include <span>
#include <string>
#include <vector>

namespace rrl::ratefit {

enum class Curve { kInvSqrtN, kInvN };

// g(n) for the candidate curve: n^{-1/2} or n^{-1}.
double regressor(Curve curve, double n);

struct FitPoint {
  double n = 0.0;
  double error = 0.0;
};

struct FitResult {
  Curve curve = Curve::kInvSqrtN;
  double intercept = 0.0;  // >= 0
  double slope = 0.0;      // >= 0
  double mse = 0.0;
  double r_squared = 0.0;  // <= 1; -inf marks "undefined" on degenerate data
  bool degenerate = false; // zero-variance target
};

enum class Winner { kInvSqrtN, kInvN, kTie };

struct Verdict {
  Winner winner = Winner::kTie;
  FitResult fit_inv_sqrt_n;
  FitResult fit_inv_n;
  double margin = 0.0;  // R^2 difference (inv_sqrt_n minus inv_n)
};

// Sum of squared residuals of error ~ intercept + slope * g(n), and its
// gradient in (intercept, slope). Exposed for KKT checks.
double objective(std::span<const FitPoint> points, Curve curve, double intercept, double slope);
void objective_gradient(std::span<const FitPoint> points, Curve curve, double intercept,
                        double slope, double* d_intercept, double* d_slope);

// Non-negative least squares for the two-parameter curve, solved exactly by
// active-set enumeration: the unconstrained normal-equation solution if it is
// feasible, otherwise the best of the three boundary candidates. Requires at
// least two distinct n values.
FitResult fit_curve(std::span<const FitPoint> points, Curve curve);

// 1 - SS_res/SS_tot about the mean; returns 1 on degenerate data with zero
// residuals and -inf ("undefined") on degenerate data with residuals.
double r_squared(std::span<const FitPoint> points, const FitResult& fit);

// Fits both curves; the higher R^2 wins, with a tie when the difference is
// within 1e-9 or both fits are degenerate.
Verdict compare(std::span<const FitPoint> points);

// {"inv_sqrt_n":{...},"inv_n":{...},"winner":...,"margin":...}; numbers with
// 17 significant digits, undefined R^2 as the string "undefined".
std::string verdict_json(const Verdict& verdict);

// "n,observed,fitted_sqrt,fitted_inv" rows for external plotting.
std::string plot_csv(std::span<const FitPoint> points, const Verdict& verdict);

std::string curve_name(Curve curve);
std::string winner_name(Winner winner);

}  // namespace rrl::ratefit
