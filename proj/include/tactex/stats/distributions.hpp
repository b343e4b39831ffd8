#pragma once

namespace tactex::stats {

double normal_cdf(double z);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
/// (modified Lentz) with absolute tolerance 1e-10.
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
/// Inverse of student_t_cdf by bisection on the CDF.
double student_t_quantile(double p, double df);

}  // namespace tactex::stats
