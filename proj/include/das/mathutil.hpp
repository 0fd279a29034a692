#pragma once

#include <cmath>

namespace das {

/// Numerically stable sigmoid: never exponentiates a positive argument.
inline double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + e^z) without overflow on either tail.
inline double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

/// Entropy of a Bernoulli(p) decision in nats.
inline double binary_entropy_nats(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

}  // namespace das
