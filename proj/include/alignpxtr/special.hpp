#pragma once

namespace alignpxtr {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile. Returns -inf at 0 and +inf at 1.
double normal_quantile(double p);

double logistic(double t);

}  // namespace alignpxtr
