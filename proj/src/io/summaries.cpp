#include "buckdr/io/summaries.hpp"

#include <cmath>
#include <numbers>

#include "buckdr/error.hpp"

namespace buckdr::io {

namespace {

double phase_deg(lti::cplx z) { return std::arg(z) * 180.0 / std::numbers::pi; }

json interval_json(const buck::Interval& iv) { return json::array({number(iv.lo), number(iv.hi)}); }

json stats_json(const sim::MetricStats& s) {
  return {{"mean", number(s.mean)}, {"min", number(s.min)}, {"max", number(s.max)}};
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

void add_bode(Table& t, const std::string& name, const lti::RationalTF& g, const lti::FrequencyGrid& grid) {
  std::vector<double> mag, ph;
  for (const double w : grid.omegas()) {
    const auto z = g.at_omega(w);
    mag.push_back(std::abs(z));
    ph.push_back(phase_deg(z));
  }
  t.add(name + "_abs", std::move(mag));
  t.add(name + "_phase_deg", std::move(ph));
}

}  // namespace

const char* channel_name(dr::Channel c) {
  switch (c) {
    case dr::Channel::v_o: return "v_o";
    case dr::Channel::i_L: return "i_L";
    case dr::Channel::v_SW: return "v_SW";
  }
  return "?";
}

json params_json(const buck::BuckParams& p) {
  return {{"C", p.C},       {"L", p.L},       {"R_C", p.R_C},           {"R_i", p.R_i},
          {"R_on", p.R_on}, {"R_L", p.R_L},   {"f_sw", p.f_sw},         {"k_FF", p.k_FF},
          {"V_in", p.V_in}, {"V_in_max", p.V_in_max}, {"V_o_target", p.V_o_target}, {"I_max", p.I_max}};
}

json box_json(const buck::UncertaintyBox& b) {
  return {{"C", interval_json(b.C)},     {"L", interval_json(b.L)},       {"R_C", interval_json(b.R_C)},
          {"R_i", interval_json(b.R_i)}, {"R_on", interval_json(b.R_on)}, {"R_L", interval_json(b.R_L)}};
}

json config_json(const RunConfig& c) {
  return {{"params", params_json(c.params)},
          {"box", box_json(c.box)},
          {"R_bar_ratio", c.design.R_bar_ratio},
          {"m_max", c.design.m_max},
          {"n_max", c.design.n_max},
          {"p1_ratio", c.design.tune.p1_ratio},
          {"p2_ratio", c.design.tune.p2_ratio},
          {"Gf", c.design.tune.Gf},
          {"p_H", number(c.p_H)},
          {"uio_lambda", c.uio_lambda},
          {"n_samples", c.n_samples},
          {"envelope_budget", c.envelope_budget},
          {"seed", c.seed},
          {"mode", sim::mode_name(c.sim.mode)},
          {"t_end", c.sim.t_end},
          {"steps_per_period", c.sim.steps_per_period},
          {"dt", c.sim.dt},
          {"soft_start", c.sim.soft_start},
          {"record_stride", c.sim.record_stride},
          {"step_amplitude", c.load.step_amplitude},
          {"step_slope", c.load.step_slope},
          {"step_time", c.load.step_time},
          {"n_runs", c.n_runs},
          {"envelope_points", c.envelope_points}};
}

json tf_json(const lti::RationalTF& g) {
  return {{"num", g.num().coefficients()}, {"den", g.den().coefficients()}};
}

json model_json(const buck::BuckParams& p, const buck::UncertaintyBox& box) {
  const buck::PlantMatrix m = buck::build_plant(p);
  json j{{"params", params_json(p)},
         {"box", box_json(box)},
         {"omega_ESR", number(m.omega_ESR)},
         {"omega_PS", number(m.omega_PS)},
         {"zeta_PS", number(m.zeta_PS)},
         {"R_i_prime", m.R_i_prime},
         {"alpha", m.alpha},
         {"V_pk", p.V_pk()},
         {"plant", {{"P11", tf_json(m.P11)}, {"P12", tf_json(m.P12)}, {"P21", tf_json(m.P21)}, {"P22", tf_json(m.P22)}}}};
  try {
    const auto ccm = buck::ccm_load_interval(p, box);
    j["ccm_R_L"] = {{"lo", number(ccm.lo)}, {"hi", number(ccm.hi)}, {"nominal", number(ccm.nominal)}};
  } catch (const Error& e) {
    j["ccm_R_L"] = {{"error", e.what()}};
  }
  return j;
}

Table plant_bode(const buck::BuckParams& p, const lti::FrequencyGrid& grid) {
  const buck::PlantMatrix m = buck::build_plant(p);
  Table t;
  t.add("omega", grid.omegas());
  add_bode(t, "P11", m.P11, grid);
  add_bode(t, "P12", m.P12, grid);
  add_bode(t, "P21", m.P21, grid);
  add_bode(t, "P22", m.P22, grid);
  return t;
}

json design_json(const design::Design& d, const buck::BuckParams& p, double Gf, double R1) {
  const auto& k = d.controller;
  const lti::RationalTF vc_to_vo = p.k_FF * buck::build_plant(p).P11;
  const auto t3 = k.as_type3();
  json j{{"G", k.G},
         {"omega_PS", k.omega_PS},
         {"p1", k.p1},
         {"p2", k.p2},
         {"gamma", number(k.gamma)},
         {"at_ceiling", k.at_ceiling},
         {"K", tf_json(k.tf())},
         {"type3", {{"Gc0", t3.Gc0}, {"wz0", t3.wz0}, {"wz1", t3.wz1}, {"wp0", t3.wp0}, {"wp1", t3.wp1}}},
         {"loop_stable", design::loop_stable(k.tf(), vc_to_vo, Gf)},
         {"T_abs_at_omega_sw", std::abs(design::loop_at(k.tf(), vc_to_vo, Gf, p.omega_sw()).T)}};
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& mc : design::check_mask(k.tf(), vc_to_vo, Gf, d.mask)) worst = std::min(worst, mc.margin);
  j["mask_min_margin"] = number(worst);
  try {
    const auto c = design::components_from_params(t3, R1);
    j["components"] = {{"R1", c.R1}, {"R2", c.R2}, {"R3", c.R3}, {"C1", c.C1}, {"C2", c.C2}, {"C3", c.C3}};
  } catch (const Error& e) {
    j["components"] = {{"error", e.what()}};
  }
  return j;
}

Table mask_table(const design::Design& d, const buck::BuckParams& p, double Gf) {
  const lti::RationalTF vc_to_vo = p.k_FF * buck::build_plant(p).P11;
  std::vector<double> m, n, w, bound, T, margin;
  for (const auto& mc : design::check_mask(d.controller.tf(), vc_to_vo, Gf, d.mask)) {
    m.push_back(mc.entry.m);
    n.push_back(mc.entry.n);
    w.push_back(mc.entry.omega);
    bound.push_back(mc.entry.bound);
    T.push_back(mc.T_abs);
    margin.push_back(mc.margin);
  }
  Table t;
  t.add("m", m);
  t.add("n", n);
  t.add("omega", w);
  t.add("bound", bound);
  t.add("T_abs", T);
  t.add("margin", margin);
  return t;
}

Table loop_bode(const design::Design& d, const buck::BuckParams& p, double Gf, const lti::FrequencyGrid& grid) {
  const lti::RationalTF vc_to_vo = p.k_FF * buck::build_plant(p).P11;
  const lti::RationalTF K = d.controller.tf();
  std::vector<double> S, T, Kabs, mask;
  for (const double w : grid.omegas()) {
    const auto lp = design::loop_at(K, vc_to_vo, Gf, w);
    S.push_back(std::abs(lp.S));
    T.push_back(std::abs(lp.T));
    Kabs.push_back(std::abs(K.at_omega(w)));
    mask.push_back(d.mask.bound_at(w));
  }
  Table t;
  t.add("omega", grid.omegas());
  t.add("S_abs", S);
  t.add("T_abs", T);
  t.add("K_abs", Kabs);
  t.add("mask_bound", mask);
  return t;
}

json scheme_json(const dr::DRScheme& s, const buck::BuckParams& p, const std::array<double, 3>& uio_lambda) {
  json est = json::array();
  for (std::size_t i = 0; i < s.inputs.size(); ++i)
    est.push_back({{"channel", channel_name(s.inputs[i])}, {"tf", tf_json(s.estimator[i])}});
  json j{{"kind", dr::kind_name(s.kind)},
         {"p_H", number(s.p_H)},
         {"estimator", est},
         {"compensator", tf_json(s.compensator)},
         {"estimator_states", s.estimator_ss.states()},
         {"compensator_states", s.compensator_ss.states()}};
  if (s.kind == dr::Kind::UIO) {
    const auto u = dr::build_uio(p, uio_lambda, s.p_H).realization;
    j["uio"] = {{"lambda", u.lambda},
                {"F", matrix_json(u.F)},
                {"full_order", u.full.states()},
                {"reduced_order", u.reduced.states()}};
  }
  return j;
}

Table scheme_bode(const dr::DRScheme& s, const lti::FrequencyGrid& grid) {
  Table t;
  t.add("omega", grid.omegas());
  for (std::size_t i = 0; i < s.inputs.size(); ++i)
    add_bode(t, std::string("estimator_") + channel_name(s.inputs[i]), s.estimator[i], grid);
  add_bode(t, "compensator", s.compensator, grid);
  return t;
}

json condition_json(const robust::RobustReport& r, double critical_p_H) {
  return {{"holds", r.condition_holds()},
          {"margin", number(r.condition_margin)},
          {"first_violation", r.first_violation ? number(*r.first_violation) : json(nullptr)},
          {"p_H", number(r.p_H_used)},
          {"critical_p_H", number(critical_p_H)},
          {"evidence", "sampled"}};
}

Table condition_table(const robust::RobustReport& r, const robust::EnvelopeCurve& lambda,
                      const robust::EnvelopeCurve& n) {
  std::vector<double> margin(r.lhs.size());
  for (std::size_t i = 0; i < margin.size(); ++i) margin[i] = r.rhs[i] - r.lhs[i];
  Table t;
  t.add("omega", lambda.grid.omegas());
  t.add("W_r_abs", r.wr_abs);
  t.add("N", n.values);
  t.add("Lambda", lambda.values);
  t.add("lhs", r.lhs);
  t.add("rhs", r.rhs);
  t.add("margin", margin);
  return t;
}

json scan_json(dr::Kind kind, const robust::RobustReport& r) {
  return {{"kind", dr::kind_name(kind)},
          {"n_samples", r.n_samples},
          {"p_H", number(r.p_H_used)},
          {"stable_fraction", r.stable_fraction},
          {"worst_real_eig", number(r.worst_real_eig)},
          {"worst_sample", r.worst_sample ? params_json(*r.worst_sample) : json(nullptr)},
          {"evidence", "sampled"}};
}

json metrics_json(const sim::Metrics& m) {
  return {{"undershoot_pct", number(m.undershoot_pct)},
          {"overshoot_pct", number(m.overshoot_pct)},
          {"settling_time", number(m.settling_time)},
          {"saturation_fraction", number(m.saturation_fraction)},
          {"steady_state_error", number(m.steady_state_error)}};
}

Table trace_table(const sim::SimTrace& tr) {
  Table t;
  t.add("t", tr.t);
  t.add("v_o", tr.v_o);
  t.add("i_L", tr.i_L);
  t.add("v_c_tot", tr.v_c_tot);
  t.add("v_inj", tr.v_inj);
  t.add("d", std::vector<double>(tr.d.begin(), tr.d.end()));
  t.add("i_out_true", tr.i_out_true);
  t.add("i_out_hat", tr.i_out_hat);
  t.add("v_saw", tr.v_saw);
  t.add("v_SW", tr.v_SW);
  return t;
}

std::string envelope_file_name(dr::Kind k) { return std::string("envelope_") + dr::kind_name(k) + ".csv"; }

json mc_summary_json(const sim::McSummary& s, const sim::McScenario& sc) {
  json schemes = json::object();
  for (const auto& x : s.schemes) {
    json runs = json::array();
    for (std::size_t i = 0; i < x.runs.size(); ++i) {
      json r = metrics_json(x.runs[i]);
      r["run"] = x.run_index[i];
      runs.push_back(r);
    }
    json failures = json::array();
    for (const auto& f : x.failures) failures.push_back({{"run", f.run}, {"message", f.message}});
    schemes[dr::kind_name(x.kind)] = {{"n_ok", x.n_ok},
                                      {"failures", failures},
                                      {"metrics",
                                       {{"undershoot_pct", stats_json(x.undershoot_pct)},
                                        {"overshoot_pct", stats_json(x.overshoot_pct)},
                                        {"settling_time", stats_json(x.settling_time)},
                                        {"saturation_fraction", stats_json(x.saturation_fraction)},
                                        {"steady_state_error", stats_json(x.steady_state_error)}}},
                                      {"runs", runs},
                                      {"envelope_file", envelope_file_name(x.kind)}};
  }
  return {{"n_runs", s.n_runs},
          {"seed", s.seed},
          {"scenario",
           {{"V_in", sc.V_in},
            {"R_L", sc.R_L},
            {"p_H", number(sc.p_H)},
            {"mode", sim::mode_name(sc.sim.mode)},
            {"t_end", sc.sim.t_end},
            {"step_amplitude", sc.load.step_amplitude},
            {"step_slope", sc.load.step_slope},
            {"step_time", sc.load.step_time}}},
          {"envelope_points", s.t.size()},
          {"schemes", schemes}};
}

Table envelope_table(const sim::McSummary& s, const sim::McSchemeSummary& x) {
  Table t;
  t.add("t", s.t);
  const std::pair<const char*, const sim::Envelope*> signals[] = {
      {"v_o", &x.v_o}, {"v_c_tot", &x.v_c_tot}, {"v_inj", &x.v_inj}, {"i_out_hat", &x.i_out_hat}};
  const std::size_t n = x.n_ok > 0 ? s.t.size() : 0;
  if (n == 0) t.columns[0].clear();
  for (const auto& [name, e] : signals) {
    t.add(std::string(name) + "_min", n ? e->min : std::vector<double>{});
    t.add(std::string(name) + "_mean", n ? e->mean : std::vector<double>{});
    t.add(std::string(name) + "_max", n ? e->max : std::vector<double>{});
  }
  return t;
}

}  // namespace buckdr::io
