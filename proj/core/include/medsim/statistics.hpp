#pragma once

#include <span>

namespace medsim::stats {

double mean(std::span<const double> xs);
// Sample (n - 1) standard deviation; 0 for fewer than two values.
double sample_std(std::span<const double> xs);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

// Student's t cumulative distribution with df degrees of freedom.
double student_t_cdf(double t, double df);

enum class Alternative { two_sided, greater, less };

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int df = 0;
  // Differences had zero variance but non-zero mean: t is infinite and p is
  // reported as 0 by convention.
  bool degenerate = false;
};

// Paired t-test over d = a - b. `greater` tests mean(a - b) > 0.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                          Alternative alt = Alternative::two_sided);

}  // namespace medsim::stats
