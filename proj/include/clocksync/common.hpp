#pragma once

// Shared basics: error taxonomy, tiny fixed-size linear algebra, and
// compensated summation used by every module.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace clocksync {

// ---------------------------------------------------------------------------
// Errors. Every precondition violation or degenerate-parameter request is
// reported through one exception type carrying a category, so callers (and
// the CLI exit-code mapping) can react uniformly.
// ---------------------------------------------------------------------------
enum class errc {
  invalid_input,            // malformed values (non-finite, unsorted, ...)
  domain,                   // argument outside a function's domain
  degenerate_rates,         // operation needs a positive total message rate
  forbidden_receiver,       // the reference node never adjusts its clock
  no_stationary_limit,      // long-run limit requested but none exists
  no_synchronization_phase, // phase query needs a positive server rate
  config,                   // configuration file/schema problems
  io,                       // file system failures
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw error(code, message);
}

inline void require(bool condition, errc code, const std::string& message) {
  if (!condition) fail(code, message);
}

// ---------------------------------------------------------------------------
// 2-vectors and 2x2 matrices. The pair of mean-square statistics evolves
// under lower-triangular 2x2 linear maps, so this is all the algebra needed.
// ---------------------------------------------------------------------------
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
};

struct Mat2 {
  double m11 = 0.0, m12 = 0.0;
  double m21 = 0.0, m22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }

  bool lower_triangular() const { return m12 == 0.0; }

  friend Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.m11 * v.x + m.m12 * v.y, m.m21 * v.x + m.m22 * v.y};
  }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
  friend Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
  }
  friend Mat2 operator*(double s, const Mat2& a) {
    return {s * a.m11, s * a.m12, s * a.m21, s * a.m22};
  }
};

// ---------------------------------------------------------------------------
// Compensated (Neumaier) summation: keeps million-term moment accumulations
// accurate to an ulp of the true sum regardless of magnitude ordering.
// ---------------------------------------------------------------------------
class neumaier_sum {
 public:
  void add(double value) {
    double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      comp_ += (sum_ - t) + value;
    } else {
      comp_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace clocksync
