#pragma once

#include <cstddef>
#include <vector>

namespace sphchaos::stats {

double normal_pdf(double z);
double normal_cdf(double z);
// Inverse of the standard normal CDF (Wichura's AS 241, about 1e-16 relative).
double normal_quantile(double p);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  std::size_t points = 0;
};

// Ordinary least squares y = intercept + slope x. Standard errors are NaN
// with fewer than three points.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sphchaos::stats
