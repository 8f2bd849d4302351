#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>

#include "glens/error.hpp"

namespace glens::stats {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptyInput, "mean of an empty sample");
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

// Sample variance (n-1 denominator), two-pass.
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(ErrorCode::InvalidArgument, "sample variance needs at least two values");
  const double m = mean(xs);
  CompensatedSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(xs.size() - 1);
}

struct GroupStats {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> std;  // absent when n < 2
};

inline GroupStats group_stats(std::span<const double> xs) {
  GroupStats g;
  g.n = xs.size();
  g.mean = mean(xs);
  if (xs.size() >= 2) g.std = std::sqrt(sample_variance(xs));
  return g;
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error(ErrorCode::InvalidArgument, "incomplete beta continued fraction did not converge");
}

// I_x(a,b) given both x and y = 1-x, so callers can pass a precise complement.
inline double incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, y) / b;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::InvalidArgument, "incomplete beta needs x in [0,1]");
  return detail::incomplete_beta(a, b, x, 1.0 - x);
}

// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
inline double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (std::isnan(t)) throw Error(ErrorCode::InvalidArgument, "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double x = dof / (dof + t2);
  const double y = t2 / (dof + t2);
  const double p = detail::incomplete_beta(dof / 2.0, 0.5, x, y);
  return std::min(1.0, std::max(0.0, p));
}

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
  bool significant = false;
};

inline constexpr double kSignificanceLevel = 0.05;

enum class TTestKind { Welch, StudentPooled };

/// Two-sided two-sample t-test. Welch's unequal-variance form (with
/// Welch-Satterthwaite degrees of freedom) by default, the pooled-variance
/// Student test on request. Sign of t follows mean(a) - mean(b).
inline TTestResult t_test(std::span<const double> a, std::span<const double> b,
                          TTestKind kind = TTestKind::Welch) {
  if (a.size() < 2 || b.size() < 2)
    throw Error(ErrorCode::DegenerateSample, "each group needs at least two values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double va = sample_variance(a), vb = sample_variance(b);
  if (va == 0.0 && vb == 0.0) throw Error(ErrorCode::DegenerateSample, "both groups have zero variance");

  TTestResult r;
  if (kind == TTestKind::Welch) {
    const double sa = va / na, sb = vb / nb;
    r.t = (ma - mb) / std::sqrt(sa + sb);
    r.dof = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  } else {
    r.dof = na + nb - 2.0;
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / r.dof;
    r.t = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  }
  r.p = student_t_two_sided_p(r.t, r.dof);
  r.significant = r.p < kSignificanceLevel;
  return r;
}

inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  return t_test(a, b, TTestKind::Welch);
}

}  // namespace glens::stats
