#include "buckdr/robust/analysis.hpp"

#include <cmath>

#include "buckdr/design/controller.hpp"
#include "buckdr/dr/loop.hpp"
#include "buckdr/random.hpp"

namespace buckdr::robust {

using buck::BuckParams;
using buck::Interval;
using lti::cplx;

namespace {

using Field = double BuckParams::*;

/// Every corner of the box spanned by the non-degenerate intervals.
std::vector<BuckParams> vertices(const BuckParams& base, const std::vector<std::pair<Field, Interval>>& dims) {
  std::vector<std::pair<Field, Interval>> open;
  for (const auto& d : dims)
    if (d.second.width() > 0.0) open.push_back(d);
  std::vector<BuckParams> out;
  const std::size_t count = std::size_t{1} << open.size();
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    BuckParams p = base;
    for (std::size_t k = 0; k < open.size(); ++k) {
      const Interval& iv = open[k].second;
      p.*(open[k].first) = (mask >> k) & 1u ? iv.hi : iv.lo;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

Theorem1Error theorem1_check(const BuckParams& plant, const dr::DRScheme& lec, double k_FF,
                             const lti::FrequencyGrid& grid) {
  if (lec.kind != dr::Kind::LEC) throw Error(Errc::InvalidParameter, "theorem1_check expects an LEC scheme");
  const buck::PlantMatrix pm = buck::build_plant(plant);
  Theorem1Error e;
  for (double w : grid.omegas()) {
    const cplx s(0.0, w);
    const auto got = dr::inner_loop_response(plant, lec, k_FF, s);
    const cplx vc = k_FF * pm.P11.at_omega(w);
    const cplx ld = pm.P12.at_omega(w) * s / (s + lec.p_H);
    e.voltage = std::max(e.voltage, std::abs(got[0] - vc) / std::abs(vc));
    e.load = std::max(e.load, std::abs(got[1] - ld) / std::abs(ld));
    e.load_abs = std::max(e.load_abs, std::abs(got[1] - ld));
  }
  return e;
}

EnvelopeCurve lambda_envelope(const buck::UncertaintyBox& box, const BuckParams& nominal,
                              const lti::FrequencyGrid& grid, int budget, std::uint64_t seed) {
  if (budget < 8) throw Error(Errc::InvalidParameter, "envelope budget must cover the 8 vertices");
  std::vector<BuckParams> samples =
      vertices(nominal, {{&BuckParams::R_L, box.R_L}, {&BuckParams::R_C, box.R_C}, {&BuckParams::C, box.C}});
  auto rng = make_rng(seed);
  for (int k = 0; k < budget; ++k) {
    BuckParams p = nominal;
    p.R_L = uniform(rng, box.R_L.lo, box.R_L.hi);
    p.R_C = uniform(rng, box.R_C.lo, box.R_C.hi);
    p.C = uniform(rng, box.C.lo, box.C.hi);
    samples.push_back(p);
  }
  std::vector<lti::RationalTF> g1s;
  g1s.reserve(samples.size());
  for (const auto& p : samples) g1s.push_back(dr::g1(p));
  const lti::RationalTF g1_nom = dr::g1(nominal);

  EnvelopeCurve env{grid, std::vector<double>(grid.size(), 0.0), Direction::Lower, budget};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx ref = g1_nom.at_omega(grid[i]);
    double m = 0.0;
    for (const auto& g : g1s) m = std::max(m, std::abs(g.at_omega(grid[i]) - ref));
    env.values[i] = kEnvelopeSafety * m;
  }
  return env;
}

EnvelopeCurve n_lower_bound(const buck::UncertaintyBox& box, const BuckParams& nominal, const lti::RationalTF& K,
                            double Gf, const Interval& k_FF_range, const lti::FrequencyGrid& grid, int budget,
                            std::uint64_t seed) {
  if (budget < 0) throw Error(Errc::InvalidParameter, "sample budget must be nonnegative");
  std::vector<BuckParams> samples = vertices(nominal, {{&BuckParams::C, box.C},
                                                       {&BuckParams::L, box.L},
                                                       {&BuckParams::R_C, box.R_C},
                                                       {&BuckParams::R_i, box.R_i},
                                                       {&BuckParams::R_on, box.R_on},
                                                       {&BuckParams::R_L, box.R_L},
                                                       {&BuckParams::k_FF, k_FF_range}});
  auto rng = make_rng(seed);
  for (int k = 0; k < budget; ++k) {
    BuckParams p = buck::sample_params(box, nominal, rng);
    p.k_FF = uniform(rng, k_FF_range.lo, k_FF_range.hi);
    samples.push_back(p);
  }

  std::vector<BuckParams> unstable;
  std::vector<lti::RationalTF> loops;
  loops.reserve(samples.size());
  for (const auto& p : samples) {
    const lti::RationalTF plant = p.k_FF * buck::build_plant(p).P11;
    if (!design::loop_stable(K, plant, Gf, kStabilityMargin)) unstable.push_back(p);
    loops.push_back(plant);
  }
  if (!unstable.empty())
    throw SampledInstabilityError(unstable, std::to_string(unstable.size()) + " of " +
                                                std::to_string(samples.size()) + " sampled plants are unstable");

  EnvelopeCurve env{grid, std::vector<double>(grid.size(), 0.0), Direction::Lower, budget};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid[i];
    const cplx k = Gf * K.at_omega(w);
    double m = 0.0;
    for (const auto& g : loops) {
      const cplx pk = g.at_omega(w);
      m = std::max(m, std::abs(pk / (1.0 + k * pk)));
    }
    env.values[i] = 1.0 / (kEnvelopeSafety * m);
  }
  return env;
}

RobustReport check_condition(const EnvelopeCurve& lambda, const EnvelopeCurve& n, const BuckParams& nominal,
                             double p_H) {
  if (!(p_H > 0.0)) throw Error(Errc::InvalidParameter, "p_H must be positive");
  if (lambda.grid.omegas() != n.grid.omegas()) throw Error(Errc::DimensionMismatch, "envelopes on different grids");
  const lti::RationalTF g2 = dr::g2(nominal);
  const double inf = std::numeric_limits<double>::infinity();
  RobustReport r;
  r.p_H_used = p_H;
  const std::size_t m = lambda.grid.size();
  r.wr_abs.resize(m);
  r.lhs.resize(m);
  r.rhs.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = lambda.grid[i];
    const double g2_abs = std::abs(g2.at_omega(w));
    const double filter = 1.0 / std::abs(cplx(1.0, w / p_H));
    r.wr_abs[i] = g2_abs * lambda.values[i] * filter / nominal.k_FF;
    r.lhs[i] = filter;
    r.rhs[i] = lambda.values[i] > 0.0 ? n.values[i] * nominal.k_FF / (g2_abs * lambda.values[i]) : inf;
    const double margin = r.rhs[i] - r.lhs[i];
    r.condition_margin = std::min(r.condition_margin, margin);
    if (!(r.wr_abs[i] < n.values[i]) && !r.first_violation) r.first_violation = w;
  }
  return r;
}

double critical_p_H(const EnvelopeCurve& lambda, const EnvelopeCurve& n, const BuckParams& nominal, double lo,
                    double hi, double rel_tol) {
  if (!(lo > 0.0) || !(hi > lo)) throw Error(Errc::InvalidParameter, "p_H search needs 0 < lo < hi");
  auto passes = [&](double p) { return check_condition(lambda, n, nominal, p).condition_holds(); };
  if (passes(hi)) return std::numeric_limits<double>::infinity();
  if (!passes(lo)) return 0.0;
  double good = lo, bad = hi;
  while (bad / good > 1.0 + rel_tol) {
    const double mid = std::sqrt(good * bad);
    if (passes(mid)) good = mid; else bad = mid;
  }
  return good;
}

double closed_loop_abscissa(const BuckParams& plant, const lti::RationalTF& K, double Gf, const dr::DRScheme& scheme) {
  const lti::StateSpace cl = dr::LoopModel::build(plant, K, Gf, scheme).averaged(plant.k_FF);
  return dr::max_real_eig(lti::balanced(cl));
}

RobustReport sampled_stability_scan(const buck::UncertaintyBox& box, const BuckParams& nominal,
                                    const lti::RationalTF& K, double Gf, dr::Kind kind, double p_H, int n_samples,
                                    std::uint64_t seed) {
  if (n_samples < 1) throw Error(Errc::InvalidParameter, "scan needs at least one sample");
  const dr::DRScheme scheme = dr::build_scheme(kind, nominal, p_H);
  auto rng = make_rng(seed);
  RobustReport r;
  r.p_H_used = kind == dr::Kind::None ? 0.0 : p_H;
  r.n_samples = n_samples;
  int stable = 0;
  for (int k = 0; k < n_samples; ++k) {
    const BuckParams p = buck::sample_params(box, nominal, rng);
    const double a = closed_loop_abscissa(p, K, Gf, scheme);
    if (a < -kStabilityMargin) ++stable;
    if (!r.worst_sample || a > r.worst_real_eig) {
      r.worst_real_eig = a;
      r.worst_sample = p;
    }
  }
  r.stable_fraction = static_cast<double>(stable) / n_samples;
  return r;
}

}  // namespace buckdr::robust
