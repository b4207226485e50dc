#pragma once

// Small shared pieces: a stack-allocated point type for dimensions 1..4,
// the error hierarchy mapped to CLI exit codes, and a deterministic RNG
// wrapper whose output does not depend on the standard library's
// distribution implementations.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace fracorn {

inline constexpr int kMaxDim = 4;

// Point / vector in R^n, n <= kMaxDim.  Kept as a POD so the pair loops in
// the quadrature engine never touch the heap.
struct Vec {
  std::array<double, kMaxDim> x{};
  int n = 0;

  Vec() = default;
  Vec(double a, double b) : x{a, b, 0.0, 0.0}, n(2) {}
  Vec(double a, double b, double c) : x{a, b, c, 0.0}, n(3) {}
  static Vec zero(int dim) {
    Vec v;
    v.n = dim;
    return v;
  }

  double& operator[](int i) { return x[static_cast<size_t>(i)]; }
  double operator[](int i) const { return x[static_cast<size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n; ++i) x[i] += o.x[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n; ++i) x[i] -= o.x[i];
    return *this;
  }
  Vec& operator*=(double a) {
    for (int i = 0; i < n; ++i) x[i] *= a;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double a, Vec v) { return v *= a; }

  double dot(const Vec& o) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * o.x[i];
    return s;
  }
  double squaredNorm() const { return dot(*this); }
  double norm() const { return std::sqrt(squaredNorm()); }
  double inftyNorm() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
  }
};

inline std::string to_string(const Vec& v) {
  std::string s = "(";
  for (int i = 0; i < v.n; ++i) {
    s += std::to_string(v[i]);
    if (i + 1 < v.n) s += ", ";
  }
  return s + ")";
}

// ------------------------------------------------------------------ errors --
// ConfigError  -> CLI exit code 2 (bad input / bad config / bad parameters)
// NumericError -> CLI exit code 3 (quadrature blow-up, failed solve, ...)
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// --------------------------------------------------------------------- rng --
// Deterministic across platforms: raw mt19937_64 draws mapped to doubles
// explicitly instead of going through std::uniform_real_distribution.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  // uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  // standard normal via Box-Muller on explicit uniforms
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }
  uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace fracorn
