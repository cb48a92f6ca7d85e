#include "buckdr/design/controller.hpp"

#include <algorithm>
#include <cmath>

#include "buckdr/error.hpp"
#include "buckdr/lti/state_space.hpp"

namespace buckdr::design {

using lti::cplx;
using lti::Polynomial;
using lti::RationalTF;

RationalTF TypeIIIParams::tf() const {
  const Polynomial num = Polynomial{1.0, 1.0 / wz0} * Polynomial{1.0, 1.0 / wz1};
  const Polynomial den = Polynomial{0.0, 1.0} * Polynomial{1.0, 1.0 / wp0} * Polynomial{1.0, 1.0 / wp1};
  return {num.scaled(Gc0), den};
}

TypeIIIParams type3_from_components(const TypeIIIComponents& c) {
  TypeIIIParams p;
  p.Gc0 = 1.0 / (c.R1 * (c.C2 + c.C3));
  p.wp0 = 1.0 / (c.R3 * c.C2);
  p.wp1 = (c.C1 + c.C3) / (c.R2 * c.C1 * c.C3);
  p.wz0 = 1.0 / (c.R2 * c.C1);
  p.wz1 = 1.0 / (c.C2 * (c.R1 + c.R3));
  return p;
}

TypeIIIComponents components_from_params(const TypeIIIParams& p, double R1) {
  if (!(R1 > 0.0)) throw Error(Errc::InvalidParameter, "R1 must be positive");
  TypeIIIComponents c;
  c.R1 = R1;
  c.C2 = (1.0 / p.wz1 - 1.0 / p.wp0) / R1;
  c.R3 = 1.0 / (p.wp0 * c.C2);
  c.C3 = 1.0 / (p.Gc0 * R1) - c.C2;
  c.R2 = 1.0 / (c.C3 * (p.wp1 - p.wz0));
  c.C1 = 1.0 / (p.wz0 * c.R2);
  const double values[] = {c.R1, c.R2, c.R3, c.C1, c.C2, c.C3};
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(Errc::Unrealizable, "parameter set requires a nonpositive component");
  return c;
}

TypeIIIParams traditional_type3(const buck::PlantMatrix& plant, const buck::BuckParams& p, double Gf) {
  TypeIIIParams t;
  const double wsw = p.omega_sw();
  t.wz0 = plant.omega_PS;
  t.wz1 = plant.omega_PS;
  t.wp0 = wsw / 2.0;
  t.wp1 = std::min(plant.omega_ESR, wsw / 2.0);
  t.Gc0 = 1.0;
  const double wc = std::sqrt(plant.omega_PS * wsw / 10.0);
  const double mag = std::abs(Gf * p.k_FF * t.tf().at_omega(wc) * plant.P11.at_omega(wc));
  t.Gc0 = 1.0 / mag;
  return t;
}

WeightPair build_weights(double omega_sw) {
  if (!(omega_sw > 0.0)) throw Error(Errc::InvalidParameter, "omega_sw must be positive");
  WeightPair w;
  w.omega_s = 2.0 * omega_sw;
  w.omega_t = omega_sw / 10.0;
  const double ws = w.omega_s, wt = w.omega_t;
  w.W1 = RationalTF(Polynomial{ws * ws, 2.0 * w.zeta_s * ws, 1.0},
                    Polynomial{0.0, 2.0 * w.zeta_s * ws, 1.0}.scaled(w.Sp0));
  w.W2 = RationalTF(Polynomial{wt * wt, 2.0 * w.zeta_t * wt, 1.0}, Polynomial::constant(w.Tp0 * wt * wt));
  return w;
}

double TMask::bound_at(double omega) const {
  double b = std::numeric_limits<double>::infinity();
  for (const auto& e : entries)
    if (e.omega <= omega) b = std::min(b, e.bound);
  return b;
}

TMask t_mask(double R_bar, double V_pk, double omega_sw, int m_max, int n_max) {
  if (m_max < 1 || n_max < 0) throw Error(Errc::InvalidParameter, "mask needs m_max >= 1 and n_max >= 0");
  TMask mask;
  for (int m = 1; m <= m_max; ++m) {
    for (int n = 0; n <= std::min(n_max, 2 * m - 1); ++n) {
      MaskEntry e;
      e.m = m;
      e.n = n;
      e.omega = (m - 0.5 * n) * omega_sw;
      e.bound = buck::epsilon_schedule(m, n) / buck::pwm_bound(m, n, R_bar, V_pk);
      mask.entries.push_back(e);
    }
  }
  return mask;
}

LoopPoint loop_at(const RationalTF& K, const RationalTF& plant, double Gf, double omega) {
  LoopPoint lp;
  lp.L = Gf * K.at_omega(omega) * plant.at_omega(omega);
  lp.S = 1.0 / (1.0 + lp.L);
  lp.T = lp.L / (1.0 + lp.L);
  return lp;
}

std::vector<MaskCheck> check_mask(const RationalTF& K, const RationalTF& plant, double Gf, const TMask& mask) {
  std::vector<MaskCheck> out;
  out.reserve(mask.entries.size());
  for (const auto& e : mask.entries) {
    const double t = std::abs(loop_at(K, plant, Gf, e.omega).T);
    out.push_back({e, t, e.bound - t});
  }
  return out;
}

bool loop_stable(const RationalTF& K, const RationalTF& plant, double Gf, double margin) {
  const lti::StateSpace loop = lti::series(lti::realize(plant), lti::realize(K));
  const double d = Gf * loop.D(0, 0);
  if (std::abs(1.0 + d) < 1e-12) throw Error(Errc::IllPosed, "loop gain equals -1 at infinite frequency");
  if (loop.states() == 0) return true;
  const Eigen::MatrixXd a = loop.A - loop.B * (Gf / (1.0 + d)) * loop.C;
  return lti::StateSpace(a, loop.B, loop.C, loop.D).is_stable(margin);
}

double mixed_sensitivity_objective(const RationalTF& K, const RationalTF& plant, double Gf, const WeightPair& w,
                                   const lti::FrequencyGrid& grid) {
  const double inf = std::numeric_limits<double>::infinity();
  if (K.is_zero() || plant.is_zero() || Gf == 0.0) return inf;
  const RationalTF open = K * plant;
  if (open.den().zero_root_multiplicity() <= open.num().zero_root_multiplicity()) return inf;
  if (!loop_stable(K, plant, Gf, 0.0)) return inf;
  double peak = 0.0;
  for (double om : grid.omegas()) {
    const LoopPoint lp = loop_at(K, plant, Gf, om);
    const double a = std::abs(w.W1.at_omega(om) * lp.S);
    const double b = std::abs(w.W2.at_omega(om) * lp.T);
    peak = std::max(peak, std::hypot(a, b));
  }
  return peak;
}

RationalTF StructuredController::tf() const {
  const Polynomial num = Polynomial{omega_PS, 1.0} * Polynomial{omega_PS, 1.0};
  const Polynomial den = Polynomial{0.0, 1.0} * Polynomial{p1, 1.0} * Polynomial{p2, 1.0};
  return {num.scaled(G), den};
}

TypeIIIParams StructuredController::as_type3() const {
  return {G * omega_PS * omega_PS / (p1 * p2), omega_PS, omega_PS, p1, p2};
}

double baseline_gain(const buck::PlantMatrix& plant, double k_FF, double p1, double p2) {
  const double dc = plant.P11.at_omega(0.0).real();
  return p1 * p2 * plant.omega_PS / (k_FF * dc * plant.omega_PS * plant.omega_PS);
}

StructuredController tune_structured(const buck::PlantMatrix& plant, double k_FF, double omega_sw,
                                     const WeightPair& w, const TMask& mask, const lti::FrequencyGrid& grid,
                                     const TuneOptions& opt) {
  StructuredController k;
  k.omega_PS = plant.omega_PS;
  k.p1 = opt.p1_ratio * omega_sw;
  k.p2 = opt.p2_ratio * omega_sw;
  if (!(k.p1 > 0.0) || !(k.p2 > 0.0)) throw Error(Errc::InvalidParameter, "controller poles must be positive");
  const RationalTF vc_to_vo = k_FF * plant.P11;

  auto feasible = [&](double g) {
    StructuredController c = k;
    c.G = g;
    const RationalTF K = c.tf();
    if (!loop_stable(K, vc_to_vo, opt.Gf, opt.stability_margin)) return false;
    for (const auto& mc : check_mask(K, vc_to_vo, opt.Gf, mask))
      if (!(mc.margin > 0.0)) return false;
    return true;
  };

  const double base = baseline_gain(plant, k_FF, k.p1, k.p2);
  const double lo = std::log10(opt.lo_factor * base);
  const double hi = std::log10(opt.hi_factor * base);
  const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) * opt.points_per_decade)) + 1);
  int best = -1;
  for (int i = 0; i < n; ++i) {
    const double g = std::pow(10.0, lo + (hi - lo) * i / (n - 1));
    if (feasible(g)) best = i;
  }
  if (best < 0) throw Error(Errc::Infeasible, "no gain in the search range meets the masks with a stable loop");

  double g_ok = std::pow(10.0, lo + (hi - lo) * best / (n - 1));
  if (best == n - 1) {
    k.at_ceiling = true;
  } else {
    double g_bad = std::pow(10.0, lo + (hi - lo) * (best + 1) / (n - 1));
    while (g_bad / g_ok > 1.0 + opt.rel_tol) {
      const double mid = std::sqrt(g_ok * g_bad);
      if (feasible(mid)) g_ok = mid; else g_bad = mid;
    }
  }
  k.G = g_ok;
  k.gamma = mixed_sensitivity_objective(k.tf(), vc_to_vo, opt.Gf, w, grid);
  return k;
}

Design design_controller(const buck::BuckParams& p, const lti::FrequencyGrid& grid, const DesignOptions& opt) {
  if (!(opt.R_bar_ratio > 0.0) || !(opt.R_bar_ratio < 1.0))
    throw Error(Errc::InvalidParameter, "R_bar_ratio must lie in (0, 1)");
  Design d;
  const double wsw = p.omega_sw();
  d.weights = build_weights(wsw);
  d.mask = t_mask(opt.R_bar_ratio * p.V_pk(), p.V_pk(), wsw, opt.m_max, opt.n_max);
  d.controller = tune_structured(buck::build_plant(p), p.k_FF, wsw, d.weights, d.mask, grid, opt.tune);
  return d;
}

}  // namespace buckdr::design
