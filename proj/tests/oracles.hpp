#pragma once

// Reference computations that share no code with the library.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Every word of length n over b symbols, lexicographic.
inline std::vector<std::vector<int>> all_words(int b, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> w(n, 0);
  while (true) {
    out.push_back(w);
    int i = n - 1;
    while (i >= 0 && ++w[i] == b) w[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

/// Stationary chain of a positive weight matrix by power iteration: P = D^-1 M R / lambda.
struct PowerChain {
  std::vector<double> pi;
  Matrix p;
  double lambda = 0.0;
};

inline PowerChain power_chain(const Matrix& m, int iterations = 4000) {
  const std::size_t b = m.size();
  std::vector<double> r(b, 1.0), l(b, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> nr(b, 0.0), nl(b, 0.0);
    for (std::size_t u = 0; u < b; ++u)
      for (std::size_t v = 0; v < b; ++v) {
        nr[u] += m[u][v] * r[v];
        nl[v] += l[u] * m[u][v];
      }
    double sr = 0.0, sl = 0.0;
    for (std::size_t u = 0; u < b; ++u) {
      sr += nr[u];
      sl += nl[u];
    }
    double sum_r = 0.0;
    for (double x : r) sum_r += x;
    lambda = sr / sum_r;
    for (std::size_t u = 0; u < b; ++u) {
      r[u] = nr[u] / sr;
      l[u] = nl[u] / sl;
    }
  }
  PowerChain out;
  out.lambda = lambda;
  out.p.assign(b, std::vector<double>(b));
  double z = 0.0;
  for (std::size_t u = 0; u < b; ++u) z += l[u] * r[u];
  for (std::size_t u = 0; u < b; ++u) {
    out.pi.push_back(l[u] * r[u] / z);
    for (std::size_t v = 0; v < b; ++v) out.p[u][v] = m[u][v] * r[v] / (lambda * r[u]);
  }
  return out;
}

inline double chain_probability(const PowerChain& c, const std::vector<int>& w) {
  double p = c.pi[w[0]];
  for (std::size_t i = 0; i + 1 < w.size(); ++i) p *= c.p[w[i]][w[i + 1]];
  return p;
}

/// Uniform measure on admissible words of a non-homogeneous 0/1 chain restricted to a window:
/// mu(C_n(w)) ~ left(w_0) * [w admissible] * right(w_{n-1}), with `pad` free steps on each side.
/// allowed(i, u, v) gives a_{uv} at step i (i may be negative).
inline double counting_measure(int b, const std::function<bool(long, int, int)>& allowed,
                               const std::vector<int>& w, int pad) {
  auto left = [&](int n_steps) {
    std::vector<double> c(b, 1.0);
    for (long i = -n_steps; i < 0; ++i) {
      std::vector<double> next(b, 0.0);
      for (int u = 0; u < b; ++u)
        for (int v = 0; v < b; ++v)
          if (allowed(i, u, v)) next[v] += c[u];
      double s = 0.0;
      for (double x : next) s += x;
      for (double& x : next) x /= s;
      c = next;
    }
    return c;
  };
  auto right = [&](long start, int n_steps) {
    std::vector<double> c(b, 1.0);
    for (long i = start + n_steps - 1; i >= start; --i) {
      std::vector<double> next(b, 0.0);
      for (int u = 0; u < b; ++u)
        for (int v = 0; v < b; ++v)
          if (allowed(i, u, v)) next[u] += c[v];
      double s = 0.0;
      for (double x : next) s += x;
      for (double& x : next) x /= s;
      c = next;
    }
    return c;
  };
  const long n = static_cast<long>(w.size());
  std::vector<double> lv = left(pad), rv = right(n - 1, pad);
  // Normalizer: sum over all n-words of the same product.
  double total = 0.0, mass = 0.0;
  for (const auto& word : all_words(b, static_cast<int>(n))) {
    bool ok = true;
    for (long i = 0; i + 1 < n && ok; ++i) ok = allowed(i, word[i], word[i + 1]);
    if (!ok) continue;
    double value = lv[word[0]] * rv[word[n - 1]];
    total += value;
    if (word == w) mass = value;
  }
  return mass / total;
}

}  // namespace oracle
