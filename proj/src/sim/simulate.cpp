#include "buckdr/sim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "buckdr/dr/loop.hpp"
#include "buckdr/error.hpp"

namespace buckdr::sim {

using Eigen::VectorXd;

namespace {

constexpr double kBlowup = 1e9;
constexpr double kBand = 0.02;

}  // namespace

const char* mode_name(Mode m) { return m == Mode::Switched ? "switched" : "averaged"; }

Mode parse_mode(const std::string& name) {
  if (name == "switched") return Mode::Switched;
  if (name == "averaged") return Mode::Averaged;
  throw Error(Errc::Validation, "unknown simulation mode '" + name + "'");
}

double LoadProfile::at(double t) const {
  if (t <= step_time) return 0.0;
  return std::min(step_amplitude, step_slope * (t - step_time));
}

void LoadProfile::validate() const {
  if (!(step_slope > 0.0)) throw Error(Errc::Validation, "load step slope must be positive");
  if (!(step_amplitude >= 0.0)) throw Error(Errc::Validation, "load step amplitude must be nonnegative");
  if (!(step_time >= 0.0)) throw Error(Errc::Validation, "load step time must be nonnegative");
}

void SimConfig::validate(double T_sw, const LoadProfile& load) const {
  load.validate();
  if (steps_per_period < 50) throw Error(Errc::Validation, "steps_per_period must be at least 50");
  if (dt < 0.0) throw Error(Errc::Validation, "dt must be nonnegative");
  if (record_stride < 1) throw Error(Errc::Validation, "record_stride must be at least 1");
  if (soft_start < 0.0) throw Error(Errc::Validation, "soft_start must be nonnegative");
  if (!(t_end >= load.step_time + 20.0 * T_sw))
    throw Error(Errc::Validation, "t_end must leave 20 switching periods after the load step");
}

SimTrace simulate(const buck::BuckParams& plant, const lti::RationalTF& K, const dr::DRScheme& scheme,
                  const SimConfig& cfg, const LoadProfile& load) {
  plant.validate();
  const double T = 1.0 / plant.f_sw;
  cfg.validate(T, load);
  const dr::LoopModel lm = dr::LoopModel::build(plant, K, cfg.Gf, scheme);
  if (cfg.mode == Mode::Switched && lm.vsw_feedthrough())
    throw Error(Errc::AlgebraicLoop, "v_c_tot responds instantly to v_SW; the comparator cannot be simulated");

  const bool switched = cfg.mode == Mode::Switched;
  const double h = switched ? T / cfg.steps_per_period : (cfg.dt > 0.0 ? cfg.dt : T / 50.0);
  const double V_in = plant.V_in;
  const double V_pk = plant.V_pk();

  // RK4 is stable for h |lambda| below about 2.78; keep a margin.
  double rho = 0.0;
  for (const auto& ev : lti::StateSpace(lm.A, lm.B, lm.C, lm.D).eigenvalues()) rho = std::max(rho, std::abs(ev));
  for (const auto& ev : lm.averaged(plant.k_FF).eigenvalues()) rho = std::max(rho, std::abs(ev));
  if (h * rho > 2.5) throw Error(Errc::Validation, "integration step too large for the fastest loop mode");

  const Eigen::MatrixXd& A = lm.A;
  const Eigen::MatrixXd& B = lm.B;
  const Eigen::RowVectorXd c_tot = lm.C.row(dr::kVcTot);
  const Eigen::RowVectorXd d_tot = lm.D.row(dr::kVcTot);

  auto ref = [&](double t) { return cfg.soft_start > 0.0 ? cfg.V_ref * std::min(1.0, t / cfg.soft_start) : cfg.V_ref; };
  auto inputs = [&](double t, double vsw) {
    Eigen::Vector3d u;
    u[dr::kVsw] = vsw;
    u[dr::kRef] = ref(t);
    u[dr::kIout] = load.at(t);
    return u;
  };
  auto v_tot = [&](const VectorXd& x, const Eigen::Vector3d& u) { return c_tot.dot(x) + d_tot.dot(u); };
  auto averaged_vsw = [&](const VectorXd& x, double t) {
    const double vt = v_tot(x, inputs(t, 0.0));
    return V_in * std::clamp(vt / V_pk, 0.0, 1.0);
  };
  auto deriv = [&](const VectorXd& x, double t, double vsw_fixed) -> VectorXd {
    const double vsw = switched ? vsw_fixed : averaged_vsw(x, t);
    return A * x + B * inputs(t, vsw);
  };
  auto rk4 = [&](const VectorXd& x, double t, double step, double vsw) -> VectorXd {
    const VectorXd k1 = deriv(x, t, vsw);
    const VectorXd k2 = deriv(x + 0.5 * step * k1, t + 0.5 * step, vsw);
    const VectorXd k3 = deriv(x + 0.5 * step * k2, t + 0.5 * step, vsw);
    const VectorXd k4 = deriv(x + step * k3, t + step, vsw);
    return x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  const long steps = std::lround(cfg.t_end / h);
  const std::size_t samples = static_cast<std::size_t>(steps / cfg.record_stride) + 1;
  SimTrace tr;
  tr.event_time = load.step_time;
  for (auto* v : {&tr.t, &tr.v_o, &tr.v_c_tot, &tr.v_inj, &tr.v_saw, &tr.v_SW, &tr.i_L, &tr.i_out_hat, &tr.i_out_true})
    v->reserve(samples);
  tr.d.reserve(samples);

  auto record = [&](const VectorXd& x, double t, double saw, int d, double vsw) {
    const Eigen::Vector3d u = inputs(t, vsw);
    const VectorXd y = lm.C * x + lm.D * u;
    tr.t.push_back(t);
    tr.v_o.push_back(y[dr::kVo]);
    tr.v_c_tot.push_back(y[dr::kVcTot]);
    tr.v_inj.push_back(y[dr::kVinj]);
    tr.v_saw.push_back(saw);
    tr.v_SW.push_back(vsw);
    tr.i_L.push_back(y[dr::kIL]);
    tr.i_out_hat.push_back(y[dr::kIhat]);
    tr.i_out_true.push_back(u[dr::kIout]);
    tr.d.push_back(d);
  };

  VectorXd x = VectorXd::Zero(lm.states());
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const long phase = switched ? k % cfg.steps_per_period : 0;
    const double saw0 = switched ? V_pk * static_cast<double>(phase) / cfg.steps_per_period : 0.0;
    const double g0 = v_tot(x, inputs(t, 0.0)) - saw0;
    const int d0 = g0 >= 0.0 ? 1 : 0;
    const double vsw0 = switched ? V_in * d0 : averaged_vsw(x, t);
    if (k % cfg.record_stride == 0) record(x, t, saw0, switched ? d0 : (vsw0 > 0.0 ? 1 : 0), vsw0);
    if (k == steps) break;

    if (switched) {
      VectorXd next = rk4(x, t, h, vsw0);
      const double saw1 = V_pk * static_cast<double>(phase + 1) / cfg.steps_per_period;
      const double g1 = v_tot(next, inputs(t + h, 0.0)) - saw1;
      if ((g1 >= 0.0) != (d0 == 1)) {
        // Split at the interpolated crossing and switch there.
        const double theta = std::clamp(g0 / (g0 - g1), 0.0, 1.0);
        const VectorXd mid = rk4(x, t, theta * h, vsw0);
        next = rk4(mid, t + theta * h, (1.0 - theta) * h, V_in * (1 - d0));
      }
      x = std::move(next);
    } else {
      x = rk4(x, t, h, 0.0);
    }
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kBlowup)
      throw Error(Errc::NumericalBlowup, "state diverged at t = " + std::to_string(t + h) + " s");
  }
  return tr;
}

Metrics metrics(const SimTrace& trace, double V_o_target, double V_pk, double period) {
  if (trace.size() == 0) throw Error(Errc::Validation, "empty trace");
  if (!(V_o_target > 0.0) || !(V_pk > 0.0) || !(period > 0.0))
    throw Error(Errc::Validation, "metrics need positive target, V_pk and period");
  const auto first = std::lower_bound(trace.t.begin(), trace.t.end(), trace.event_time);
  const std::size_t i0 = static_cast<std::size_t>(first - trace.t.begin());
  if (i0 == trace.size()) throw Error(Errc::Validation, "trace ends before the load event");

  Metrics m;
  double low = 0.0, high = 0.0;
  std::size_t saturated = 0;
  std::optional<std::size_t> last_out;
  for (std::size_t i = i0; i < trace.size(); ++i) {
    const double e = trace.v_o[i] - V_o_target;
    low = std::max(low, -e);
    high = std::max(high, e);
    if (std::abs(e) > kBand * V_o_target) last_out = i;
    if (trace.v_c_tot[i] < 0.0 || trace.v_c_tot[i] > V_pk) ++saturated;
  }
  m.undershoot_pct = 100.0 * low / V_o_target;
  m.overshoot_pct = 100.0 * high / V_o_target;
  m.saturation_fraction = static_cast<double>(saturated) / static_cast<double>(trace.size() - i0);
  if (last_out) {
    const std::size_t back_in = std::min(*last_out + 1, trace.size() - 1);
    m.settling_time = trace.t[back_in] - trace.event_time;
  }

  const double from = trace.t.back() - period;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = trace.size(); i-- > 0 && trace.t[i] > from;) {
    sum += trace.v_o[i];
    ++count;
  }
  m.steady_state_error = std::abs(sum / static_cast<double>(count) - V_o_target);
  return m;
}

}  // namespace buckdr::sim
