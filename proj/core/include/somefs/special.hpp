#pragma once

namespace somefs {

/// Regularized lower incomplete gamma P(a, x), absolute error < 1e-10
/// (series for x < a+1, continued fraction otherwise).
double gamma_p(double a, double x);

/// Upper tail Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// Survival function of the chi-square distribution with df degrees of
/// freedom.
double chi2_sf(double x, double df);

/// Two-sided standard normal tail: P(|Z| >= z).
double normal_two_sided_p(double z);

}  // namespace somefs
