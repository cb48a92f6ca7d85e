#include "buckdr/sim/monte_carlo.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "buckdr/design/controller.hpp"
#include "buckdr/error.hpp"
#include "buckdr/random.hpp"

namespace buckdr::sim {

namespace {

/// Linear interpolation of (t, y) at each grid point; t is uniform and increasing.
std::vector<double> resample(const std::vector<double>& t, const std::vector<double>& y, const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = grid[i];
    while (j + 2 < t.size() && t[j + 1] < g) ++j;
    if (g <= t.front()) {
      out[i] = y.front();
    } else if (g >= t.back()) {
      out[i] = y.back();
    } else {
      const double w = (g - t[j]) / (t[j + 1] - t[j]);
      out[i] = y[j] + w * (y[j + 1] - y[j]);
    }
  }
  return out;
}

struct EnvelopeAcc {
  std::vector<double> lo, sum, hi;

  explicit EnvelopeAcc(std::size_t n)
      : lo(n, std::numeric_limits<double>::infinity()), sum(n, 0.0), hi(n, -std::numeric_limits<double>::infinity()) {}

  void add(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      lo[i] = std::min(lo[i], v[i]);
      sum[i] += v[i];
      hi[i] = std::max(hi[i], v[i]);
    }
  }

  Envelope finish(int count) const {
    Envelope e;
    if (count == 0) return e;
    e.min = lo;
    e.max = hi;
    e.mean.resize(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) e.mean[i] = std::clamp(sum[i] / count, lo[i], hi[i]);
    return e;
  }
};

MetricStats stats(const std::vector<Metrics>& runs, double Metrics::*field) {
  MetricStats s;
  if (runs.empty()) return s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& m : runs) {
    const double v = m.*field;
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(runs.size());
  return s;
}

}  // namespace

buck::BuckParams mc_nominal(const McScenario& scenario) {
  buck::BuckParams p = scenario.base;
  p.R_L = scenario.R_L;
  p.V_in = scenario.V_in;
  p.V_in_max = std::max(p.V_in_max, scenario.V_in);
  p.V_o_target = scenario.sim.V_ref;
  p.validate();
  return p;
}

buck::BuckParams mc_sample(const buck::UncertaintyBox& box, const McScenario& scenario, std::uint64_t seed, int run) {
  buck::UncertaintyBox pinned = box;
  pinned.R_L = {scenario.R_L, scenario.R_L};
  return buck::sample_params(pinned, mc_nominal(scenario), splitmix64(seed) + static_cast<std::uint64_t>(run));
}

McSummary monte_carlo(const buck::UncertaintyBox& box, const McScenario& scenario, const std::vector<dr::Kind>& kinds,
                      int n_runs, std::uint64_t seed) {
  if (n_runs < 1) throw Error(Errc::Validation, "n_runs must be at least 1");
  if (kinds.empty()) throw Error(Errc::Validation, "no schemes requested");
  if (scenario.envelope_points < 2) throw Error(Errc::Validation, "envelope_points must be at least 2");
  if (!(scenario.p_H > 0.0)) throw Error(Errc::Validation, "p_H must be positive");

  const buck::BuckParams nominal = mc_nominal(scenario);
  scenario.sim.validate(1.0 / nominal.f_sw, scenario.load);
  const lti::RationalTF K = design::design_controller(nominal, lti::FrequencyGrid::standard()).controller.tf();
  std::vector<dr::DRScheme> schemes;
  for (const dr::Kind k : kinds) schemes.push_back(dr::build_scheme(k, nominal, scenario.p_H));

  McSummary out;
  out.n_runs = n_runs;
  out.seed = seed;
  const double t0 = scenario.load.step_time, t1 = scenario.sim.t_end;
  const auto n = static_cast<std::size_t>(scenario.envelope_points);
  out.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.t[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);

  std::vector<std::array<EnvelopeAcc, 4>> acc;
  for (std::size_t s = 0; s < kinds.size(); ++s) {
    acc.push_back({EnvelopeAcc(n), EnvelopeAcc(n), EnvelopeAcc(n), EnvelopeAcc(n)});
    out.schemes.emplace_back();
    out.schemes.back().kind = kinds[s];
  }

  for (int run = 0; run < n_runs; ++run) {
    const buck::BuckParams plant = mc_sample(box, scenario, seed, run);
    for (std::size_t s = 0; s < kinds.size(); ++s) {
      McSchemeSummary& sum = out.schemes[s];
      try {
        const SimTrace tr = simulate(plant, K, schemes[s], scenario.sim, scenario.load);
        sum.runs.push_back(metrics(tr, scenario.sim.V_ref, plant.V_pk(), 1.0 / plant.f_sw));
        sum.run_index.push_back(run);
        acc[s][0].add(resample(tr.t, tr.v_o, out.t));
        acc[s][1].add(resample(tr.t, tr.v_c_tot, out.t));
        acc[s][2].add(resample(tr.t, tr.v_inj, out.t));
        acc[s][3].add(resample(tr.t, tr.i_out_hat, out.t));
        ++sum.n_ok;
      } catch (const Error& e) {
        sum.failures.push_back({run, e.what()});
      }
    }
  }

  for (std::size_t s = 0; s < kinds.size(); ++s) {
    McSchemeSummary& sum = out.schemes[s];
    sum.undershoot_pct = stats(sum.runs, &Metrics::undershoot_pct);
    sum.overshoot_pct = stats(sum.runs, &Metrics::overshoot_pct);
    sum.settling_time = stats(sum.runs, &Metrics::settling_time);
    sum.saturation_fraction = stats(sum.runs, &Metrics::saturation_fraction);
    sum.steady_state_error = stats(sum.runs, &Metrics::steady_state_error);
    sum.v_o = acc[s][0].finish(sum.n_ok);
    sum.v_c_tot = acc[s][1].finish(sum.n_ok);
    sum.v_inj = acc[s][2].finish(sum.n_ok);
    sum.i_out_hat = acc[s][3].finish(sum.n_ok);
  }
  return out;
}

}  // namespace buckdr::sim
