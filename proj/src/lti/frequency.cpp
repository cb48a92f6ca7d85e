#include "buckdr/lti/frequency.hpp"

#include <cmath>

#include "buckdr/error.hpp"

namespace buckdr::lti {

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.empty()) throw Error(Errc::InvalidParameter, "empty frequency grid");
  for (std::size_t k = 0; k < omegas_.size(); ++k) {
    if (!(omegas_[k] > 0.0) || !std::isfinite(omegas_[k]))
      throw Error(Errc::InvalidParameter, "grid frequencies must be positive and finite");
    if (k > 0 && !(omegas_[k] > omegas_[k - 1]))
      throw Error(Errc::InvalidParameter, "grid must be strictly increasing");
  }
}

FrequencyGrid FrequencyGrid::log_space(double lo, double hi, std::size_t n) {
  if (n == 0 || !(lo > 0.0) || !(hi >= lo)) throw Error(Errc::InvalidParameter, "bad log-space bounds");
  if (n == 1) return FrequencyGrid({lo});
  std::vector<double> w(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t k = 0; k < n; ++k)
    w[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  w.front() = lo;
  w.back() = hi;
  return FrequencyGrid(std::move(w));
}

FrequencyResponse frequency_response(const RationalTF& g, const FrequencyGrid& grid) {
  FrequencyResponse r{grid, {}};
  r.values.reserve(grid.size());
  for (double w : grid.omegas()) r.values.push_back(g.at_omega(w));
  return r;
}

HinfResult hinf_norm(const RationalTF& g, const FrequencyGrid& grid) {
  HinfResult res;
  if (!g.is_stable()) return res;
  res.stable = true;
  if (!g.is_proper()) return res;

  auto mag = [&g](double w) { return std::abs(g.at_omega(w)); };
  std::size_t best = 0;
  double peak = -1.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double m = mag(grid[k]);
    if (m > peak) {
      peak = m;
      best = k;
    }
  }
  res.value = peak;
  res.peak_omega = grid[best];

  // Golden-section search in log(omega) over the neighbouring grid cells.
  double a = std::log(grid[best == 0 ? 0 : best - 1]);
  double b = std::log(grid[best + 1 < grid.size() ? best + 1 : best]);
  if (b > a) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = mag(std::exp(x1));
    double f2 = mag(std::exp(x2));
    while (b - a > 1e-7) {
      if (f1 > f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = mag(std::exp(x1));
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = mag(std::exp(x2));
      }
    }
    const double x = 0.5 * (a + b);
    const double fx = mag(std::exp(x));
    if (fx > res.value) {
      res.value = fx;
      res.peak_omega = std::exp(x);
    }
  }

  const double dc = std::abs(g(cplx(0.0, 0.0)));
  if (std::isfinite(dc) && dc > res.value) {
    res.value = dc;
    res.peak_omega = 0.0;
  }
  if (g.num().degree() == g.den().degree()) {
    const double hf = std::abs(g.num().leading() / g.den().leading());
    if (hf > res.value) {
      res.value = hf;
      res.peak_omega = std::numeric_limits<double>::infinity();
    }
  }
  return res;
}

}  // namespace buckdr::lti
