#pragma once

#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "buckdr/lti/rational_tf.hpp"

namespace buckdr::lti {

/// Strictly increasing positive angular frequencies in rad/s.
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> omegas);

  static FrequencyGrid log_space(double lo, double hi, std::size_t n);
  /// 2000 log-spaced points over [1e1, 1e9] rad/s.
  static FrequencyGrid standard() { return log_space(1e1, 1e9, 2000); }

  const std::vector<double>& omegas() const& { return omegas_; }
  std::vector<double> omegas() && { return std::move(omegas_); }
  std::size_t size() const { return omegas_.size(); }
  double operator[](std::size_t k) const { return omegas_[k]; }
  double front() const { return omegas_.front(); }
  double back() const { return omegas_.back(); }

 private:
  std::vector<double> omegas_;
};

struct FrequencyResponse {
  FrequencyGrid grid;
  std::vector<cplx> values;
};

FrequencyResponse frequency_response(const RationalTF& g, const FrequencyGrid& grid);

struct HinfResult {
  double value = std::numeric_limits<double>::infinity();
  double peak_omega = 0.0;
  bool stable = false;
};

/// Peak gain over the grid, refined by golden-section search in log(omega)
/// around the grid maximizer. The DC and infinite-frequency limits are
/// included. Unstable systems report value = +inf and stable = false.
HinfResult hinf_norm(const RationalTF& g, const FrequencyGrid& grid);

}  // namespace buckdr::lti
