// buckdr: model, design, scheme, analyze, simulate and montecarlo subcommands.
// Exit codes: 0 success, 2 invalid input, 3 the analysis ran and reports a failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "buckdr/design/controller.hpp"
#include "buckdr/error.hpp"
#include "buckdr/io/config.hpp"
#include "buckdr/io/report.hpp"
#include "buckdr/io/summaries.hpp"
#include "buckdr/robust/analysis.hpp"
#include "buckdr/sim/monte_carlo.hpp"
#include "buckdr/sim/simulate.hpp"

#ifndef BUCKDR_VERSION
#define BUCKDR_VERSION "dev"
#endif

using namespace buckdr;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kFailed = 3;

struct Common {
  std::string params_file;
  std::vector<std::string> sets;
  std::string out;
};

struct Options {
  Common common;
  double r1 = 10e3;
  std::string kind = "lec";
  std::string kinds;
  std::optional<double> p_H;
  std::optional<std::string> mode;
  std::optional<int> samples, runs;
  std::optional<std::uint64_t> seed;
};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// File entries first, then flags, then --set overrides; later entries win.
io::RunConfig resolve(const Options& o, std::vector<io::KeyValue> flags) {
  std::vector<io::KeyValue> entries;
  if (!o.common.params_file.empty()) entries = io::read_key_values(o.common.params_file);
  auto merge = [&](io::KeyValue kv) {
    for (auto& e : entries)
      if (e.key == kv.key) {
        e = std::move(kv);
        return;
      }
    entries.push_back(std::move(kv));
  };
  for (auto& kv : flags) merge(std::move(kv));
  int n = 0;
  for (const auto& s : o.common.sets) {
    ++n;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(Errc::Validation, "--set expects key=value, got '" + s + "'");
    auto parsed = io::parse_key_values(s, "--set");
    parsed.front().line = n;
    merge(std::move(parsed.front()));
  }
  return io::load_config(entries);
}

std::vector<io::KeyValue> flag_entries(const Options& o) {
  std::vector<io::KeyValue> f;
  if (o.p_H) f.push_back({"p_H", format_number(*o.p_H), "--p-h", 0});
  if (o.mode) f.push_back({"mode", *o.mode, "--mode", 0});
  if (o.samples) f.push_back({"n_samples", std::to_string(*o.samples), "--samples", 0});
  if (o.runs) f.push_back({"n_runs", std::to_string(*o.runs), "--runs", 0});
  if (o.seed) f.push_back({"seed", std::to_string(*o.seed), "--seed", 0});
  return f;
}

io::ReportBundle open_bundle(const Options& o, const std::string& command, const io::RunConfig& cfg) {
  io::ReportBundle b(o.common.out.empty() ? io::default_output_dir() : std::filesystem::path(o.common.out));
  if (!o.common.params_file.empty()) b.add_input_file(o.common.params_file);
  b.set_config(io::config_json(cfg));
  b.set("command", command);
  b.set("tool", "buckdr");
  b.set("version", BUCKDR_VERSION);
  b.set("seed", cfg.seed);
  return b;
}

std::vector<dr::Kind> parse_kinds(const std::string& list) {
  std::vector<dr::Kind> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const std::string name = list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!name.empty()) out.push_back(dr::parse_kind(name));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw Error(Errc::Validation, "empty scheme list");
  return out;
}

design::Design design_for(const io::RunConfig& cfg) {
  return design::design_controller(cfg.params, lti::FrequencyGrid::standard(), cfg.design);
}

int run_model(const Options& o) {
  const io::RunConfig cfg = resolve(o, flag_entries(o));
  auto b = open_bundle(o, "model", cfg);
  const io::json j = io::model_json(cfg.params, cfg.box);
  b.write_json("model.json", j);
  b.write_csv("plant_bode.csv", io::plant_bode(cfg.params, lti::FrequencyGrid::standard()));
  b.finish();
  std::printf("omega_ESR %.6g rad/s  omega_PS %.6g rad/s  zeta_PS %.6g\n", j["omega_ESR"].get<double>(),
              j["omega_PS"].get<double>(), j["zeta_PS"].get<double>());
  if (j["ccm_R_L"].contains("lo"))
    std::printf("CCM load range [%.6g, %.6g] ohm\n", j["ccm_R_L"]["lo"].get<double>(), j["ccm_R_L"]["hi"].get<double>());
  std::printf("wrote %s\n", b.dir().string().c_str());
  return kOk;
}

int run_design(const Options& o) {
  const io::RunConfig cfg = resolve(o, flag_entries(o));
  auto b = open_bundle(o, "design", cfg);
  const auto d = design_for(cfg);
  const double Gf = cfg.design.tune.Gf;
  const io::json j = io::design_json(d, cfg.params, Gf, o.r1);
  b.write_json("controller.json", j);
  b.write_csv("mask.csv", io::mask_table(d, cfg.params, Gf));
  b.write_csv("loop_bode.csv", io::loop_bode(d, cfg.params, Gf, lti::FrequencyGrid::standard()));
  b.finish();
  const bool ok = j["loop_stable"].get<bool>() && j["mask_min_margin"].is_number() &&
                  j["mask_min_margin"].get<double>() > 0.0;
  std::printf("G %.6g  p1 %.6g  p2 %.6g  gamma %s  min mask margin %s\n", d.controller.G, d.controller.p1,
              d.controller.p2, j["gamma"].dump().c_str(), j["mask_min_margin"].dump().c_str());
  std::printf("wrote %s\n", b.dir().string().c_str());
  return ok ? kOk : kFailed;
}

int run_scheme(const Options& o) {
  const io::RunConfig cfg = resolve(o, flag_entries(o));
  auto b = open_bundle(o, "scheme", cfg);
  const auto s = dr::build_scheme(dr::parse_kind(o.kind), cfg.params, cfg.p_H, cfg.uio_lambda);
  b.write_json("scheme.json", io::scheme_json(s, cfg.params, cfg.uio_lambda));
  b.write_csv("scheme_bode.csv", io::scheme_bode(s, lti::FrequencyGrid::standard()));
  b.finish();
  std::printf("%s scheme: %zu estimator channel(s), %d + %d states\n", dr::kind_name(s.kind), s.inputs.size(),
              s.estimator_ss.states(), s.compensator_ss.states());
  std::printf("wrote %s\n", b.dir().string().c_str());
  return kOk;
}

int run_analyze(const Options& o) {
  const io::RunConfig cfg = resolve(o, flag_entries(o));
  auto b = open_bundle(o, "analyze", cfg);
  const auto grid = lti::FrequencyGrid::standard();
  const lti::RationalTF K = design_for(cfg).controller.tf();
  const double Gf = cfg.design.tune.Gf;
  const auto& p = cfg.params;
  const auto lambda = robust::lambda_envelope(cfg.box, p, grid, cfg.envelope_budget, cfg.seed);
  const auto n = robust::n_lower_bound(cfg.box, p, K, Gf, {p.k_FF, p.k_FF}, grid, cfg.envelope_budget, cfg.seed + 1);
  const auto cond = robust::check_condition(lambda, n, p, cfg.p_H);
  const double crit = robust::critical_p_H(lambda, n, p);

  io::json scans = io::json::array();
  bool all_stable = true;
  for (const dr::Kind k : parse_kinds(o.kinds.empty() ? "none,lec" : o.kinds)) {
    const auto r = robust::sampled_stability_scan(cfg.box, p, K, Gf, k, cfg.p_H, cfg.n_samples, cfg.seed);
    scans.push_back(io::scan_json(k, r));
    all_stable = all_stable && r.stable_fraction == 1.0;
    std::printf("scan %-4s stable fraction %.4f over %d samples\n", dr::kind_name(k), r.stable_fraction, r.n_samples);
  }
  b.write_csv("condition.csv", io::condition_table(cond, lambda, n));
  b.write_json("analysis.json", {{"condition", io::condition_json(cond, crit)}, {"scans", scans}});
  b.finish();
  std::printf("condition %s at p_H = %.6g (margin %s, critical p_H %s)\n", cond.condition_holds() ? "holds" : "fails",
              cfg.p_H, io::number(cond.condition_margin).dump().c_str(), io::number(crit).dump().c_str());
  std::printf("wrote %s\n", b.dir().string().c_str());
  return cond.condition_holds() && all_stable ? kOk : kFailed;
}

int run_simulate(const Options& o) {
  const io::RunConfig cfg = resolve(o, flag_entries(o));
  auto b = open_bundle(o, "simulate", cfg);
  const lti::RationalTF K = design_for(cfg).controller.tf();
  const auto s = dr::build_scheme(dr::parse_kind(o.kind), cfg.params, cfg.p_H, cfg.uio_lambda);
  const auto tr = sim::simulate(cfg.params, K, s, cfg.sim, cfg.load);
  const auto m = sim::metrics(tr, cfg.params.V_o_target, cfg.params.V_pk(), 1.0 / cfg.params.f_sw);
  b.write_csv("trace.csv", io::trace_table(tr));
  b.write_json("simulation.json", {{"kind", dr::kind_name(s.kind)},
                                   {"mode", sim::mode_name(cfg.sim.mode)},
                                   {"samples", tr.size()},
                                   {"event_time", tr.event_time},
                                   {"metrics", io::metrics_json(m)}});
  b.finish();
  std::printf("%s (%s): undershoot %.4f%%  overshoot %.4f%%  settling %.4g s  saturation %.4f  sse %.3g V\n",
              dr::kind_name(s.kind), sim::mode_name(cfg.sim.mode), m.undershoot_pct, m.overshoot_pct,
              m.settling_time, m.saturation_fraction, m.steady_state_error);
  std::printf("wrote %s\n", b.dir().string().c_str());
  return kOk;
}

int run_montecarlo(const Options& o) {
  const io::RunConfig cfg = resolve(o, flag_entries(o));
  auto b = open_bundle(o, "montecarlo", cfg);
  const auto sc = io::scenario(cfg);
  const auto s = sim::monte_carlo(cfg.box, sc, parse_kinds(o.kinds.empty() ? "none,dob,uio,lec" : o.kinds),
                                  cfg.n_runs, cfg.seed);
  bool failures = false;
  for (const auto& x : s.schemes) {
    b.write_csv(io::envelope_file_name(x.kind), io::envelope_table(s, x));
    failures = failures || !x.failures.empty();
    std::printf("%-4s ok %d/%d  undershoot mean %.4f%% [%.4f, %.4f]  saturation max %.4f\n", dr::kind_name(x.kind),
                x.n_ok, s.n_runs, x.undershoot_pct.mean, x.undershoot_pct.min, x.undershoot_pct.max,
                x.saturation_fraction.max);
  }
  b.write_json("summary.json", io::mc_summary_json(s, sc));
  b.finish();
  std::printf("wrote %s\n", b.dir().string().c_str());
  return failures ? kFailed : kOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::Validation:
    case Errc::InvalidParameter:
    case Errc::InvalidRatio:
    case Errc::HypothesisViolated:
    case Errc::DimensionMismatch:
    case Errc::Io:
      return kInvalid;
    default:
      return kFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Buck converter voltage-mode control with load-disturbance rejection"};
  app.set_version_flag("--version", BUCKDR_VERSION);
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--params", o.common.params_file, "key = value parameter/scenario file")->check(CLI::ExistingFile);
    sub->add_option("--set", o.common.sets, "override one key, e.g. --set R_L=5");
    sub->add_option("--out", o.common.out, "output directory (default $BUCKDR_OUT or buckdr-out)");
  };

  auto* model = app.add_subcommand("model", "plant coefficients, corner frequencies, CCM range");
  add_common(model);

  auto* design_cmd = app.add_subcommand("design", "tune the voltage controller and check the T masks");
  add_common(design_cmd);
  design_cmd->add_option("--r1", o.r1, "R1 of the op-amp network, ohm");

  auto* scheme = app.add_subcommand("scheme", "build a disturbance-rejection scheme");
  add_common(scheme);
  scheme->add_option("--kind", o.kind, "none, dob, uio or lec");
  scheme->add_option("--p-h", o.p_H, "filter pole, rad/s");

  auto* analyze = app.add_subcommand("analyze", "robust condition and sampled stability scan");
  add_common(analyze);
  analyze->add_option("--p-h", o.p_H, "filter pole, rad/s");
  analyze->add_option("--samples", o.samples, "scan samples");
  analyze->add_option("--seed", o.seed, "random seed");
  analyze->add_option("--kinds", o.kinds, "comma-separated schemes to scan (default none,lec)");

  auto* simulate = app.add_subcommand("simulate", "one load-step run");
  add_common(simulate);
  simulate->add_option("--kind", o.kind, "none, dob, uio or lec");
  simulate->add_option("--mode", o.mode, "switched or averaged");
  simulate->add_option("--p-h", o.p_H, "filter pole, rad/s");

  auto* mc = app.add_subcommand("montecarlo", "seeded load-step runs over the uncertainty box");
  add_common(mc);
  mc->add_option("--kinds", o.kinds, "comma-separated schemes (default none,dob,uio,lec)");
  mc->add_option("--runs", o.runs, "number of runs");
  mc->add_option("--seed", o.seed, "random seed");
  mc->add_option("--mode", o.mode, "switched or averaged");
  mc->add_option("--p-h", o.p_H, "filter pole, rad/s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*model) return run_model(o);
    if (*design_cmd) return run_design(o);
    if (*scheme) return run_scheme(o);
    if (*analyze) return run_analyze(o);
    if (*simulate) return run_simulate(o);
    if (*mc) return run_montecarlo(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kInvalid;
}
