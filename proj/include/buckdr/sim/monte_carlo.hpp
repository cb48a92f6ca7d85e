#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "buckdr/buck/model.hpp"
#include "buckdr/dr/schemes.hpp"
#include "buckdr/sim/simulate.hpp"

namespace buckdr::sim {

/// Load-step study: R_L and V_in are pinned, everything else is drawn from
/// the box. The controller and schemes are designed once on the nominal
/// values with this R_L and V_in.
struct McScenario {
  buck::BuckParams base = buck::nominal_params();  // everything but R_L and V_in
  double V_in = 20.0;
  double R_L = 5.0;
  double p_H = 1e6;
  LoadProfile load;
  SimConfig sim;
  int envelope_points = 400;  // shared grid from the event to t_end
};

struct MetricStats {
  double mean = 0.0, min = 0.0, max = 0.0;
};

struct Envelope {
  std::vector<double> min, mean, max;
};

struct McRunFailure {
  int run = 0;
  std::string message;
};

struct McSchemeSummary {
  dr::Kind kind = dr::Kind::None;
  int n_ok = 0;
  std::vector<McRunFailure> failures;
  std::vector<int> run_index;  // runs behind `runs`, in order
  std::vector<Metrics> runs;
  MetricStats undershoot_pct, overshoot_pct, settling_time, saturation_fraction, steady_state_error;
  Envelope v_o, v_c_tot, v_inj, i_out_hat;
};

struct McSummary {
  int n_runs = 0;
  std::uint64_t seed = 0;
  std::vector<double> t;  // envelope grid
  std::vector<McSchemeSummary> schemes;
};

/// Sampled plant of run k; the same for every scheme.
buck::BuckParams mc_sample(const buck::UncertaintyBox& box, const McScenario& scenario, std::uint64_t seed, int run);

/// Nominal values the controller and schemes are designed on.
buck::BuckParams mc_nominal(const McScenario& scenario);

/// Per-run failures (buckdr errors) are recorded and skipped. Deterministic
/// for a fixed seed.
McSummary monte_carlo(const buck::UncertaintyBox& box, const McScenario& scenario, const std::vector<dr::Kind>& kinds,
                      int n_runs, std::uint64_t seed);

}  // namespace buckdr::sim
