#pragma once

namespace vm {

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz),
// relative accuracy about 1e-14 over the ranges used for t tests.
double regularized_incomplete_beta(double a, double b, double x);

// CDF of Student's t with `df` (> 0, may be fractional) degrees of freedom.
double student_t_cdf(double t, double df);

// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

}  // namespace vm
