#pragma once
// Brute-force statistics used as oracles for the library versions.

#include <cmath>
#include <cstddef>
#include <vector>

namespace sqi::test {

inline double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Average rank by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> oracle_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = 1.0 + static_cast<double>(less) + 0.5 * static_cast<double>(equal - 1);
  }
  return r;
}

inline double oracle_mse(const std::vector<double>& p, const std::vector<double>& t) {
  long double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (static_cast<long double>(p[i]) - t[i]) * (static_cast<long double>(p[i]) - t[i]);
  return static_cast<double>(s / p.size());
}

}  // namespace sqi::test
