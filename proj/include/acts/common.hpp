#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace acts {

/// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Rejected input: bad dimensions, malformed files, out-of-range labels,
/// inconsistent configs. Maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Data-dependent runtime failure: diverged training, degenerate
/// perturbations, empty cohorts, undefined aggregates. CLI exit code 2.
class ComputeError : public Error {
 public:
  explicit ComputeError(const std::string& what) : Error(what) {}
};

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_l2(const Vec& v) { return std::sqrt(dot(v, v)); }

inline double norm_linf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// sign with sign(0) = 0, so dead coordinates stay dead.
inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

namespace rng {

// All randomness flows through these helpers instead of <random>
// distributions, whose output is implementation-defined. mt19937_64 itself
// is specified, so seeded runs are reproducible across compilers.

inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

inline double normal(std::mt19937_64& gen) {
  // Box-Muller; one value per call keeps the consumption pattern obvious.
  double u1 = uniform01(gen);
  double u2 = uniform01(gen);
  while (u1 <= 0.0) u1 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[gen() % i]);
}

}  // namespace rng

/// Shortest decimal string that parses back to exactly the same double.
/// Infinities serialize as "inf"/"-inf" to match the JSON/CSV convention
/// for capped scores.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ValidationError(context + ": not a number: '" + s + "'");
  return v;
}

}  // namespace acts
