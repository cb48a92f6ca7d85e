#include "buckdr/buck/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "buckdr/error.hpp"
#include "buckdr/random.hpp"

namespace buckdr::buck {

using lti::Polynomial;
using lti::RationalTF;

double BuckParams::omega_sw() const { return 2.0 * std::numbers::pi * f_sw; }

void BuckParams::validate() const {
  const std::pair<const char*, double> positive[] = {{"C", C},     {"L", L},       {"R_C", R_C},
                                                      {"R_i", R_i}, {"R_on", R_on}, {"R_L", R_L},
                                                      {"f_sw", f_sw}, {"k_FF", k_FF}, {"I_max", I_max}};
  for (const auto& [name, v] : positive)
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(Errc::InvalidParameter, std::string(name) + " must be positive");
  if (!(V_o_target > 0.0) || !(V_o_target < V_in) || !(V_in <= V_in_max))
    throw Error(Errc::InvalidParameter, "expected 0 < V_o_target < V_in <= V_in_max");
}

void UncertaintyBox::validate(const BuckParams& p) const {
  const std::tuple<const char*, Interval, double> rows[] = {{"C", C, p.C},         {"L", L, p.L},
                                                            {"R_C", R_C, p.R_C},   {"R_i", R_i, p.R_i},
                                                            {"R_on", R_on, p.R_on}, {"R_L", R_L, p.R_L}};
  for (const auto& [name, iv, nom] : rows) {
    if (!(iv.lo > 0.0) || !(iv.lo <= nom) || !(nom <= iv.hi))
      throw Error(Errc::InvalidParameter, std::string("box.") + name + " must satisfy 0 < lo <= nominal <= hi");
  }
}

CcmInterval ccm_load_interval(const BuckParams& p, const UncertaintyBox& box) {
  if (!(p.V_o_target < p.V_in_max)) throw Error(Errc::InvalidRatio, "V_o_target must be below V_in_max");
  if (!(box.L.lo > 0.0)) throw Error(Errc::InvalidParameter, "L lower bound must be positive");
  CcmInterval r;
  r.lo = p.V_o_target / p.I_max;
  r.hi = 2.0 * box.L.lo * p.f_sw / (1.0 - p.V_o_target / p.V_in_max);
  r.nominal = 0.5 * (r.lo + r.hi);
  return r;
}

namespace {

UncertaintyBox percentage_box(const BuckParams& p) {
  UncertaintyBox b;
  b.C = Interval::around(p.C, 0.10);
  b.L = Interval::around(p.L, 0.20);
  b.R_C = Interval::around(p.R_C, 0.15);
  b.R_i = Interval::around(p.R_i, 0.15);
  b.R_on = Interval::around(p.R_on, 0.15);
  return b;
}

}  // namespace

UncertaintyBox default_box(const BuckParams& nominal) {
  UncertaintyBox b = percentage_box(nominal);
  const CcmInterval ccm = ccm_load_interval(nominal, b);
  b.R_L = {ccm.lo, ccm.hi};
  return b;
}

BuckParams nominal_params() {
  BuckParams p;
  p.R_L = ccm_load_interval(p, percentage_box(p)).nominal;
  return p;
}

PlantMatrix build_plant(const BuckParams& p) {
  p.validate();
  const double ri = p.R_i_prime();
  const double a0 = p.C * p.L * (p.R_L + p.R_C);
  const double a1 = p.L + p.C * p.R_L * (p.R_C + ri) + p.C * p.R_C * ri;
  const double a2 = p.R_L + ri;
  const Polynomial den{a2, a1, a0};
  const Polynomial esr{1.0, p.C * p.R_C};
  const Polynomial impedance{ri, p.L};

  PlantMatrix pm;
  pm.P11 = RationalTF(esr.scaled(p.R_L), den);
  pm.P22 = pm.P11;
  pm.P12 = RationalTF((esr * impedance).scaled(-p.R_L), den);
  pm.P21 = RationalTF(Polynomial{1.0, p.C * (p.R_L + p.R_C)}, den);
  pm.omega_ESR = 1.0 / (p.C * p.R_C);
  pm.omega_PS = std::sqrt(a2 / a0);
  pm.zeta_PS = a1 / (2.0 * std::sqrt(a0 * a2));
  pm.R_i_prime = ri;
  pm.alpha = {a0, a1, a2};
  return pm;
}

lti::StateSpace plant_state_space(const BuckParams& p) {
  p.validate();
  const double k = p.R_L / (p.R_L + p.R_C);
  const double ri = p.R_i_prime();
  Eigen::MatrixXd a(2, 2), b(2, 2), c(2, 2), d(2, 2);
  a << -(ri + k * p.R_C) / p.L, -k / p.L, k / p.C, -1.0 / (p.C * (p.R_L + p.R_C));
  b << k * p.R_C / p.L, 1.0 / p.L, -k / p.C, 0.0;
  c << k * p.R_C, k, 1.0, 0.0;
  d << -k * p.R_C, 0.0, 0.0, 0.0;
  return {a, b, c, d};
}

double pwm_bound(int m, int n, double R_bar, double V_pk) {
  if (m < 1 || n < 0) throw Error(Errc::InvalidParameter, "pwm_bound needs m >= 1 and n >= 0");
  if (n == 0) return 2.0 / (m * std::numbers::pi);
  if (!(R_bar > 0.0) || !(R_bar < V_pk)) throw Error(Errc::InvalidParameter, "pwm_bound needs 0 < R_bar < V_pk");
  return std::pow(m * std::numbers::pi, n - 1) / std::tgamma(n + 1.0) * std::pow(R_bar / V_pk, n);
}

double epsilon_schedule(int m, int n) {
  if (m < 1 || n < 0) throw Error(Errc::InvalidParameter, "epsilon_schedule needs m >= 1 and n >= 0");
  if (n == 0) return m == 1 ? 1e-2 : 1e-3 * std::pow(0.5, m - 2);
  return 1e-3 * std::pow(0.5, n - 1);
}

BuckParams sample_params(const UncertaintyBox& box, const BuckParams& base, std::mt19937_64& rng) {
  BuckParams p = base;
  p.C = uniform(rng, box.C.lo, box.C.hi);
  p.L = uniform(rng, box.L.lo, box.L.hi);
  p.R_C = uniform(rng, box.R_C.lo, box.R_C.hi);
  p.R_i = uniform(rng, box.R_i.lo, box.R_i.hi);
  p.R_on = uniform(rng, box.R_on.lo, box.R_on.hi);
  p.R_L = uniform(rng, box.R_L.lo, box.R_L.hi);
  return p;
}

BuckParams sample_params(const UncertaintyBox& box, const BuckParams& base, std::uint64_t seed) {
  auto rng = make_rng(seed);
  return sample_params(box, base, rng);
}

}  // namespace buckdr::buck
