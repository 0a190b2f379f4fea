#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

namespace epsb {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/**
 * Four-point Gauss-Legendre rule on [a,b]. Intervals longer than max_piece
 * are split into equal pieces first, so long holding intervals of a
 * time-dependent integrand keep the accuracy of short ones.
 */
template <class F>
double gauss4(F&& f, double a, double b, double max_piece = 1.0 / 64.0) {
  if (b <= a) return 0.0;
  const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / max_piece));
  const std::size_t m = pieces == 0 ? 1 : pieces;
  const double h = (b - a) / static_cast<double>(m);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double lo = a + h * static_cast<double>(k);
    total += boost::math::quadrature::gauss<double, 4>::integrate(f, lo, lo + h);
  }
  return total;
}

/// Trapezoid rule for samples on a uniform grid with spacing h.
double trapezoid(const std::vector<double>& y, double h);

/// Cumulative trapezoid integral, out[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& y, double h);

/**
 * Tridiagonal system with fixed coefficients, factored once and reused for
 * many right-hand sides (Thomas algorithm).
 */
class TridiagonalSolver {
 public:
  TridiagonalSolver() = default;
  /// lower[0] and upper[size-1] are ignored.
  TridiagonalSolver(std::vector<double> lower, std::vector<double> diag,
                    std::vector<double> upper);

  /// Solves in place.
  void solve(std::vector<double>& rhs) const;

  std::size_t size() const { return diag_.size(); }

 private:
  std::vector<double> lower_;
  std::vector<double> diag_;
  std::vector<double> upper_;
};

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct MeanStderr {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased sample variance
  double std_error = 0.0;
  std::size_t count = 0;
};

MeanStderr summarize(const std::vector<double>& samples);

}  // namespace epsb
