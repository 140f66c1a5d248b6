// Reference implementations used only by the tests. They are deliberately written from
// textbook definitions and share no code with the library.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace oracle {

/// Classical factor oracle over a string (Allauzen, Crochemore, Raffinot), with
/// symbol-keyed transitions and Lefebvre-Lecroq repeated-suffix lengths.
struct FactorOracle {
  std::vector<std::map<char, int>> delta;
  std::vector<int> sfx;
  std::vector<int> lrs;
};

inline FactorOracle factor_oracle(const std::string& s) {
  const int n = static_cast<int>(s.size());
  FactorOracle fo;
  fo.delta.resize(static_cast<std::size_t>(n) + 1);
  fo.sfx.assign(static_cast<std::size_t>(n) + 1, 0);
  fo.lrs.assign(static_cast<std::size_t>(n) + 1, 0);
  fo.sfx[0] = -1;
  auto lcs = [&](int p1, int p2) {
    if (p2 == fo.sfx[p1]) return fo.lrs[p1];
    while (fo.sfx[p2] != fo.sfx[p1]) p2 = fo.sfx[p2];
    return std::min(fo.lrs[p1], fo.lrs[p2]);
  };
  for (int i = 1; i <= n; ++i) {
    const char c = s[static_cast<std::size_t>(i - 1)];
    fo.delta[i - 1][c] = i;
    int k = fo.sfx[i - 1];
    int pi = i - 1;
    while (k > -1 && !fo.delta[k].count(c)) {
      fo.delta[k][c] = i;
      pi = k;
      k = fo.sfx[k];
    }
    if (k == -1) {
      fo.sfx[i] = 0;
      fo.lrs[i] = 0;
    } else {
      fo.sfx[i] = fo.delta[k][c];
      fo.lrs[i] = lcs(pi, fo.sfx[i] - 1) + 1;
    }
  }
  return fo;
}

/// Brute-force minimum of sum_i v_i 4^(-r_i) over all integer rates with sum r_i = budget.
inline double best_integer_allocation(const std::vector<double>& v, int budget) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> r(v.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == v.size()) {
      r[i] = left;
      double total = 0;
      for (std::size_t k = 0; k < v.size(); ++k) total += v[k] * std::pow(4.0, -r[k]);
      best = std::min(best, total);
      return;
    }
    for (int b = 0; b <= left; ++b) {
      r[i] = b;
      rec(i + 1, left - b);
    }
  };
  rec(0, budget);
  return best;
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Central difference of f at x along a unit perturbation of size h.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
