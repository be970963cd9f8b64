#pragma once

#include "sompns/types.hpp"

#include <cmath>

namespace sompns {

/// Wilson score interval for a binomial proportion (default 95%).
struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
  double halfwidth() const { return 0.5 * (hi - lo); }
};

inline WilsonInterval wilson_interval(long long count, long long trials,
                                      double z = 1.959963984540054) {
  if (trials <= 0) throw InvalidInputError("wilson_interval: trials must be positive");
  if (count < 0 || count > trials)
    throw InvalidInputError("wilson_interval: count out of range");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(count) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {center - half, center + half};
}

}  // namespace sompns
