#include "epsb/numerics.hpp"

#include "epsb/error.hpp"

namespace epsb {

double trapezoid(const std::vector<double>& y, double h) {
  if (y.size() < 2) return 0.0;
  CompensatedSum s;
  s.add(0.5 * y.front());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s.add(y[i]);
  s.add(0.5 * y.back());
  return s.value() * h;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& y, double h) {
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t i = 1; i < y.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (y[i - 1] + y[i]);
  return out;
}

TridiagonalSolver::TridiagonalSolver(std::vector<double> lower, std::vector<double> diag,
                                     std::vector<double> upper)
    : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)) {
  // Forward elimination on the coefficients only; diag_ becomes the pivots
  // and lower_ the multipliers.
  const std::size_t m = diag_.size();
  for (std::size_t i = 1; i < m; ++i) {
    if (diag_[i - 1] == 0.0) throw Error(ErrorCode::SingularSystem, "zero pivot in tridiagonal solve");
    const double w = lower_[i] / diag_[i - 1];
    lower_[i] = w;
    diag_[i] -= w * upper_[i - 1];
  }
}

void TridiagonalSolver::solve(std::vector<double>& rhs) const {
  const std::size_t m = diag_.size();
  for (std::size_t i = 1; i < m; ++i) rhs[i] -= lower_[i] * rhs[i - 1];
  rhs[m - 1] /= diag_[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - upper_[i] * rhs[i + 1]) / diag_[i];
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

MeanStderr summarize(const std::vector<double>& samples) {
  MeanStderr out;
  out.count = samples.size();
  if (samples.empty()) return out;
  CompensatedSum s;
  for (double v : samples) s.add(v);
  out.mean = s.value() / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    CompensatedSum q;
    for (double v : samples) q.add((v - out.mean) * (v - out.mean));
    out.variance = q.value() / static_cast<double>(samples.size() - 1);
    out.std_error = std::sqrt(out.variance / static_cast<double>(samples.size()));
  }
  return out;
}

}  // namespace epsb
