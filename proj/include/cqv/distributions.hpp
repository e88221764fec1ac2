/// @file distributions.hpp
/// @brief Continued-fraction incomplete beta/gamma and the Student's t and
/// chi-square tail probabilities built on them.

#pragma once

namespace cqv::dist {

/// Regularized incomplete beta I_x(a, b), for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Regularized lower incomplete gamma P(a, x) and its complement Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Student's t cumulative distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Two-tailed p-value P(|T| >= |t|).
double student_t_two_tailed(double t, double df);

/// Upper tail P(X >= x) of the chi-square distribution.
double chi_square_sf(double x, double df);

}  // namespace cqv::dist
