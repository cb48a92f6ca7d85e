// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "buckdr/buck/model.hpp"
#include "buckdr/design/controller.hpp"
#include "buckdr/dr/schemes.hpp"
#include "buckdr/io/report.hpp"
#include "buckdr/io/summaries.hpp"
#include "buckdr/random.hpp"
#include "buckdr/robust/analysis.hpp"
#include "buckdr/sim/monte_carlo.hpp"
#include "buckdr/sim/pwm.hpp"
#include "buckdr/sim/simulate.hpp"

using namespace buckdr;
using lti::cplx;

namespace {

constexpr std::uint64_t kScanSeed = 7;
constexpr std::uint64_t kMcSeed = 2024;
constexpr double kPH = 1e6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const buck::BuckParams& nominal() {
  static const buck::BuckParams p = buck::nominal_params();
  return p;
}

const buck::UncertaintyBox& table_box() {
  static const buck::UncertaintyBox b = buck::default_box(nominal());
  return b;
}

const lti::FrequencyGrid& grid50() {
  static const lti::FrequencyGrid g = lti::FrequencyGrid::log_space(10.0, 1e9, 50);
  return g;
}

const design::Design& tuned() {
  static const design::Design d = design::design_controller(nominal(), lti::FrequencyGrid::standard());
  return d;
}

Outcome delta_p_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = make_rng(101);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto plant = buck::build_plant(buck::sample_params(table_box(), nominal(), rng));
    for (const double w : grid50().omegas()) {
      const cplx p11 = plant.P11.at_omega(w);
      const cplx dp = p11 * plant.P22.at_omega(w) - plant.P12.at_omega(w) * plant.P21.at_omega(w);
      worst = std::max(worst, std::abs(dp - p11) / std::abs(p11));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0,
          fmt("1000 draws x 50 freqs: worst rel %.3e (<= 1e-9), %.2f s (< 10 s)", worst, secs)};
}

Outcome g1_g2_closed_forms() {
  auto rng = make_rng(102);
  double w1 = 0.0, w2 = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto p = buck::sample_params(table_box(), nominal(), rng);
    const auto plant = buck::build_plant(p);
    const auto G1 = dr::g1(p), G2 = dr::g2(p);
    for (const double w : grid50().omegas()) {
      const cplx p11 = plant.P11.at_omega(w);
      w1 = std::max(w1, std::abs(plant.P21.at_omega(w) / p11 - G1.at_omega(w)) / std::abs(G1.at_omega(w)));
      w2 = std::max(w2, std::abs(plant.P12.at_omega(w) / p11 - G2.at_omega(w)) / std::abs(G2.at_omega(w)));
    }
  }
  return {w1 <= 1e-9 && w2 <= 1e-9, fmt("100 draws x 50 freqs: G1 rel %.3e, G2 rel %.3e (<= 1e-9)", w1, w2)};
}

Outcome inner_loop_identity() {
  auto rng = make_rng(103);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto p = buck::sample_params(table_box(), nominal(), rng);
    const auto lec = dr::build_scheme(dr::Kind::LEC, p, kPH);
    worst = std::max(worst, robust::theorem1_check(p, lec, p.k_FF, lti::FrequencyGrid::standard()).max());
  }
  return {worst <= 1e-8, fmt("100 plants x 2000 freqs: worst rel %.3e (<= 1e-8)", worst)};
}

Outcome uio_structure() {
  auto rng = make_rng(104);
  const auto& lambda = dr::kDefaultUioLambda;
  std::vector<double> want(lambda.begin(), lambda.end());
  std::sort(want.begin(), want.end());
  double eig_err = 0.0, resp_err = 0.0;
  int bad_rank = 0, bad_order = 0;
  for (int t = 0; t < 100; ++t) {
    const auto p = buck::sample_params(table_box(), nominal(), rng);
    const auto r = dr::build_uio(p, lambda, kPH).realization;
    Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(r.A_cl).eigenvalues();
    std::vector<cplx> got(ev.data(), ev.data() + ev.size());
    std::sort(got.begin(), got.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    for (std::size_t i = 0; i < 3; ++i) eig_err = std::max(eig_err, std::abs(got[i] - want[i]) / std::abs(want[i]));
    if (lti::row_scaled_rank(lti::observability_matrix(r.A_cl, r.C_o)) != 2) ++bad_rank;
    if (r.reduced.states() != 2) ++bad_order;
    for (int in = 0; in < 3; ++in)
      for (const double w : grid50().omegas()) {
        const cplx s(0.0, w);
        const cplx a = r.full.response(s, in, 0), b = r.reduced.response(s, in, 0);
        resp_err = std::max(resp_err, std::abs(a - b) / std::abs(a));
      }
  }
  return {eig_err <= 1e-6 && bad_rank == 0 && bad_order == 0 && resp_err <= 1e-8,
          fmt("100 plants: eig rel %.3e (<= 1e-6), rank != 2: %d, order != 2: %d, reduced vs full rel %.3e (<= 1e-8)",
              eig_err, bad_rank, bad_order, resp_err)};
}

Outcome pwm_spectrum() {
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = make_rng(105);
  const sim::PwmCarrier carrier{nominal().V_pk(), nominal().omega_sw()};
  int passed = 0;
  double fund_err = 0.0, oracle_err = 0.0, bound_ratio = 0.0;
  for (int k = 0; k < 20; ++k) {
    // Small modulation (R1 <= 0.1 V_pk) at or below omega_sw / 10, on a rational beat.
    const auto b = static_cast<int>(uniform(rng, 20.0, 200.0));
    int a = std::max(1, static_cast<int>(uniform(rng, 1.0, b / 10.0)));
    while (std::gcd(a, b) != 1) --a;
    const double R1 = uniform(rng, 0.01, 0.1) * carrier.V_pk;
    const double R0 = uniform(rng, R1 + 0.05 * carrier.V_pk, 0.95 * carrier.V_pk - R1);
    const sim::PwmTone tone{R0, R1, carrier.omega_sw * a / b, uniform(rng, 0.0, 2.0 * std::numbers::pi)};
    const auto r = sim::pwm_spectrum_check(tone, carrier, 0.0);
    if (r.passed()) ++passed;
    fund_err = std::max(fund_err, std::abs(r.fundamental - r.fundamental_expected) / r.fundamental_expected);
    oracle_err = std::max(oracle_err, std::abs(r.fundamental - r.fundamental_oracle) / r.fundamental_oracle);
    for (const auto& bin : r.bins) {
      bound_ratio = std::max(bound_ratio, bin.amplitude / bin.bound);
      oracle_err = std::max(oracle_err, std::abs(bin.amplitude - bin.oracle) / std::max(bin.oracle, 1e-9));
    }
  }
  const double secs = seconds_since(t0);
  return {passed == 20 && secs < 60.0,
          fmt("%d/20 tones pass: fundamental rel %.3e (<= 2%%), max bin/bound %.4f (<= 1), oracle rel %.3e (<= 2%%), "
              "%.2f s (< 60 s)",
              passed, fund_err, bound_ratio, oracle_err, secs)};
}

Outcome tuned_masks() {
  const auto& d = tuned();
  const lti::RationalTF vc_to_vo = nominal().k_FF * buck::build_plant(nominal()).P11;
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& mc : design::check_mask(d.controller.tf(), vc_to_vo, 1.0, d.mask)) worst = std::min(worst, mc.margin);
  const double t_sw = std::abs(design::loop_at(d.controller.tf(), vc_to_vo, 1.0, nominal().omega_sw()).T);
  return {worst > 0.0 && t_sw <= 1.5708e-2,
          fmt("%zu mask entries, min margin %.3e (> 0), |T(i omega_sw)| %.4e (<= 1.5708e-2)", d.mask.entries.size(), worst,
              t_sw)};
}

Outcome robust_condition() {
  const auto grid = lti::FrequencyGrid::standard();
  const auto lambda = robust::lambda_envelope(table_box(), nominal(), grid, 200, 1);
  const auto n = robust::n_lower_bound(table_box(), nominal(), tuned().controller.tf(), 1.0,
                                       {nominal().k_FF, nominal().k_FF}, grid, 200, 2);
  const auto r = robust::check_condition(lambda, n, nominal(), kPH);
  return {r.condition_holds() && r.condition_margin > 0.0,
          fmt("p_H = 1e6: margin %.4f (> 0), %s (sampled envelopes)", r.condition_margin,
              r.condition_holds() ? "holds on the whole grid" : "violated")};
}

/// Criterion 8 scans; returns their JSON so the determinism check can compare.
io::json stability_scans(Outcome& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto K = tuned().controller.tf();
  const auto none = robust::sampled_stability_scan(table_box(), nominal(), K, 1.0, dr::Kind::None, kPH, 500, kScanSeed);
  const auto lec = robust::sampled_stability_scan(table_box(), nominal(), K, 1.0, dr::Kind::LEC, kPH, 500, kScanSeed);
  const double secs = seconds_since(t0);
  out = {none.stable_fraction == 1.0 && lec.stable_fraction == 1.0 && secs < 120.0,
         fmt("500 samples: none %.4f, lec %.4f (= 1), worst Re %.4g / %.4g rad/s, %.2f s (< 120 s)", none.stable_fraction,
             lec.stable_fraction, none.worst_real_eig, lec.worst_real_eig, secs)};
  return io::json::array({io::scan_json(dr::Kind::None, none), io::scan_json(dr::Kind::LEC, lec)});
}

const std::vector<dr::Kind> kMcKinds{dr::Kind::None, dr::Kind::DOB, dr::Kind::UIO, dr::Kind::LEC};

sim::McScenario load_step(sim::Mode mode) {
  sim::McScenario sc;  // V_in 20 V, R_L 5 ohm, 8 A at 1e6 A/s, p_H 1e6
  sc.sim.mode = mode;
  return sc;
}

const sim::McSchemeSummary& of(const sim::McSummary& s, dr::Kind k) {
  return *std::find_if(s.schemes.begin(), s.schemes.end(), [&](const auto& x) { return x.kind == k; });
}

/// Criterion 9; returns the averaged summary JSON.
io::json monte_carlo_study(Outcome& out) {
  std::string detail;
  bool pass = true;
  io::json averaged_json;
  for (const sim::Mode mode : {sim::Mode::Averaged, sim::Mode::Switched}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sc = load_step(mode);
    const auto s = sim::monte_carlo(table_box(), sc, kMcKinds, 50, kMcSeed);
    const double secs = seconds_since(t0);
    const auto &none = of(s, dr::Kind::None), &dob = of(s, dr::Kind::DOB), &uio = of(s, dr::Kind::UIO),
               &lec = of(s, dr::Kind::LEC);
    int failed = 0;
    for (const auto& x : s.schemes) failed += static_cast<int>(x.failures.size());
    const bool order = lec.undershoot_pct.mean < none.undershoot_pct.mean && dob.undershoot_pct.mean < none.undershoot_pct.mean;
    const double limit = mode == sim::Mode::Averaged ? 300.0 : 1800.0;
    pass = pass && order && failed == 0 && secs < limit;
    detail += fmt("%s: mean undershoot none %.3f%%, dob %.3f%%, uio %.3f%%, lec %.3f%%, failed runs %d, uio saturates in "
                  "%s run, %.1f s (< %.0f s)",
                  sim::mode_name(mode), none.undershoot_pct.mean, dob.undershoot_pct.mean, uio.undershoot_pct.mean,
                  lec.undershoot_pct.mean, failed, uio.saturation_fraction.max > lec.saturation_fraction.max ? "some" : "no",
                  secs, limit);
    if (mode == sim::Mode::Averaged) {
      const double dev = std::max(std::abs(lec.v_o.min.back() - sc.sim.V_ref), std::abs(lec.v_o.max.back() - sc.sim.V_ref));
      pass = pass && dev < 1e-3;
      detail += fmt(", lec |v_o(t_end) - 5| <= %.3e V (< 1e-3); ", dev);
      averaged_json = io::mc_summary_json(s, sc);
    }
  }
  out = {pass, detail};
  return averaged_json;
}

Outcome hardware_echo() {
  sim::McScenario sc = load_step(sim::Mode::Switched);
  sc.load.step_amplitude = 4.0;
  const auto p = sim::mc_nominal(sc);
  const auto K = design::design_controller(p, lti::FrequencyGrid::standard()).controller.tf();
  auto undershoot = [&](dr::Kind k) {
    const auto tr = sim::simulate(p, K, dr::build_scheme(k, p, sc.p_H), sc.sim, sc.load);
    return sim::metrics(tr, sc.sim.V_ref, p.V_pk(), 1.0 / p.f_sw).undershoot_pct;
  };
  const double none = undershoot(dr::Kind::None), lec = undershoot(dr::Kind::LEC);
  return {lec <= 0.5 * none, fmt("switched, 4 A step: none %.4f%%, lec %.4f%%, ratio %.3f (<= 0.5)", none, lec, lec / none)};
}

}  // namespace

int main() {
  struct Row {
    int id;
    const char* name;
    Outcome outcome;
  };
  std::vector<Row> rows;
  auto run = [&](int id, const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %2d %-28s %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    rows.push_back({id, name, o});
  };

  io::json scans_first, mc_first;
  run(1, "plant determinant identity", delta_p_identity);
  run(2, "G1/G2 closed forms", g1_g2_closed_forms);
  run(3, "LEC inner-loop identity", inner_loop_identity);
  run(4, "UIO structure", uio_structure);
  run(5, "PWM spectral bounds", pwm_spectrum);
  run(6, "tuned controller masks", tuned_masks);
  run(7, "robust stability condition", robust_condition);
  run(8, "sampled stability scan", [&] {
    Outcome o;
    scans_first = stability_scans(o);
    return o;
  });
  run(9, "Monte Carlo load step", [&] {
    Outcome o;
    mc_first = monte_carlo_study(o);
    return o;
  });
  run(10, "LEC halves the undershoot", hardware_echo);
  run(11, "determinism", [&] {
    Outcome ignored;
    const std::string a8 = io::to_json_text(scans_first), b8 = io::to_json_text(stability_scans(ignored));
    const auto sc = load_step(sim::Mode::Averaged);
    const std::string a9 = io::to_json_text(mc_first);
    const std::string b9 = io::to_json_text(io::mc_summary_json(sim::monte_carlo(table_box(), sc, kMcKinds, 50, kMcSeed), sc));
    const bool same8 = !scans_first.is_null() && a8 == b8, same9 = !mc_first.is_null() && a9 == b9;
    return Outcome{same8 && same9, fmt("rerun scan JSON %s (sha256 %.12s), Monte Carlo JSON %s (sha256 %.12s)",
                                       same8 ? "identical" : "differs", io::sha256_hex(a8).c_str(),
                                       same9 ? "identical" : "differs", io::sha256_hex(a9).c_str())};
  });

  const auto failed = std::count_if(rows.begin(), rows.end(), [](const Row& r) { return !r.outcome.pass; });
  std::printf("%zu/%zu criteria pass\n", rows.size() - static_cast<std::size_t>(failed), rows.size());
  return failed == 0 ? 0 : 1;
}
