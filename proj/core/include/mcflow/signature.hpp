#pragma once

#include <stdexcept>

namespace mcflow {

/// Metric signature (n, m): n spacelike dimensions, m timelike.
struct Signature {
  int n = 0;
  int m = 0;

  int dim() const { return n + m; }

  void validate() const {
    if (n < 1 || m < 1)
      throw std::invalid_argument("Signature: need n >= 1 and m >= 1");
  }
};

inline bool operator==(const Signature& a, const Signature& b) {
  return a.n == b.n && a.m == b.m;
}

}  // namespace mcflow
