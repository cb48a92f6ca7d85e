#include "buckdr/io/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "buckdr/error.hpp"

namespace buckdr::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_unit(std::string_view u) {
  static const std::set<std::string_view> units{"", "F", "H", "Ohm", "ohm", "\xce\xa9", "Hz", "V", "A", "s", "rad/s", "A/s"};
  return units.count(u) > 0;
}

std::optional<double> prefix_scale(std::string_view& rest) {
  static const std::map<std::string_view, double> prefixes{{"p", 1e-12}, {"n", 1e-9}, {"u", 1e-6}, {"\xc2\xb5", 1e-6},
                                                           {"m", 1e-3},  {"k", 1e3},  {"M", 1e6},  {"G", 1e9}};
  for (const auto& [p, scale] : prefixes)
    if (rest.substr(0, p.size()) == p) {
      rest.remove_prefix(p.size());
      return scale;
    }
  return std::nullopt;
}

std::string where(const KeyValue& kv) { return kv.origin + ":" + std::to_string(kv.line) + ": "; }

[[noreturn]] void bad(const KeyValue& kv, const std::string& what) {
  throw Error(Errc::Validation, where(kv) + what);
}

double quantity(const KeyValue& kv) {
  try {
    return parse_quantity(kv.value);
  } catch (const Error& e) {
    bad(kv, "key '" + kv.key + "': " + e.what());
  }
}

int integer(const KeyValue& kv) {
  const double v = quantity(kv);
  if (v != std::floor(v) || std::abs(v) > 1e9) bad(kv, "key '" + kv.key + "' needs an integer");
  return static_cast<int>(v);
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != ',') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const KeyValue&)>;

template <typename T>
Setter number_into(T RunConfig::*field) {
  return [field](RunConfig& c, const KeyValue& kv) { c.*field = static_cast<T>(quantity(kv)); };
}

Setter param(double buck::BuckParams::*field) {
  return [field](RunConfig& c, const KeyValue& kv) { c.params.*field = quantity(kv); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["C"] = param(&buck::BuckParams::C);
    t["L"] = param(&buck::BuckParams::L);
    t["R_C"] = param(&buck::BuckParams::R_C);
    t["R_i"] = param(&buck::BuckParams::R_i);
    t["R_on"] = param(&buck::BuckParams::R_on);
    t["R_L"] = param(&buck::BuckParams::R_L);
    t["f_sw"] = param(&buck::BuckParams::f_sw);
    t["k_FF"] = param(&buck::BuckParams::k_FF);
    t["V_in"] = param(&buck::BuckParams::V_in);
    t["V_in_max"] = param(&buck::BuckParams::V_in_max);
    t["V_o_target"] = param(&buck::BuckParams::V_o_target);
    t["I_max"] = param(&buck::BuckParams::I_max);
    // box.* entries are resolved after the nominal values are final.
    for (const char* k : {"box.C", "box.L", "box.R_C", "box.R_i", "box.R_on", "box.R_L"}) t[k] = nullptr;

    t["R_bar_ratio"] = [](RunConfig& c, const KeyValue& kv) { c.design.R_bar_ratio = quantity(kv); };
    t["m_max"] = [](RunConfig& c, const KeyValue& kv) { c.design.m_max = integer(kv); };
    t["n_max"] = [](RunConfig& c, const KeyValue& kv) { c.design.n_max = integer(kv); };
    t["p1_ratio"] = [](RunConfig& c, const KeyValue& kv) { c.design.tune.p1_ratio = quantity(kv); };
    t["p2_ratio"] = [](RunConfig& c, const KeyValue& kv) { c.design.tune.p2_ratio = quantity(kv); };
    t["Gf"] = [](RunConfig& c, const KeyValue& kv) {
      c.design.tune.Gf = quantity(kv);
      c.sim.Gf = c.design.tune.Gf;
    };

    t["p_H"] = number_into(&RunConfig::p_H);
    t["uio_lambda"] = [](RunConfig& c, const KeyValue& kv) {
      const auto w = words(kv.value);
      if (w.size() != 3) bad(kv, "uio_lambda needs three values");
      for (int i = 0; i < 3; ++i) c.uio_lambda[static_cast<std::size_t>(i)] = quantity({kv.key, std::string(w[static_cast<std::size_t>(i)]), kv.origin, kv.line});
    };
    t["n_samples"] = [](RunConfig& c, const KeyValue& kv) { c.n_samples = integer(kv); };
    t["envelope_budget"] = [](RunConfig& c, const KeyValue& kv) { c.envelope_budget = integer(kv); };
    t["seed"] = [](RunConfig& c, const KeyValue& kv) {
      std::uint64_t v = 0;
      const auto* end = kv.value.data() + kv.value.size();
      const auto r = std::from_chars(kv.value.data(), end, v);
      if (r.ec != std::errc() || r.ptr != end) bad(kv, "seed needs a nonnegative integer");
      c.seed = v;
    };

    t["mode"] = [](RunConfig& c, const KeyValue& kv) {
      try {
        c.sim.mode = sim::parse_mode(kv.value);
      } catch (const Error& e) {
        bad(kv, e.what());
      }
    };
    t["t_end"] = [](RunConfig& c, const KeyValue& kv) { c.sim.t_end = quantity(kv); };
    t["steps_per_period"] = [](RunConfig& c, const KeyValue& kv) { c.sim.steps_per_period = integer(kv); };
    t["dt"] = [](RunConfig& c, const KeyValue& kv) { c.sim.dt = quantity(kv); };
    t["soft_start"] = [](RunConfig& c, const KeyValue& kv) { c.sim.soft_start = quantity(kv); };
    t["record_stride"] = [](RunConfig& c, const KeyValue& kv) { c.sim.record_stride = integer(kv); };
    t["step_amplitude"] = [](RunConfig& c, const KeyValue& kv) { c.load.step_amplitude = quantity(kv); };
    t["step_slope"] = [](RunConfig& c, const KeyValue& kv) { c.load.step_slope = quantity(kv); };
    t["step_time"] = [](RunConfig& c, const KeyValue& kv) { c.load.step_time = quantity(kv); };
    t["n_runs"] = [](RunConfig& c, const KeyValue& kv) { c.n_runs = integer(kv); };
    t["envelope_points"] = [](RunConfig& c, const KeyValue& kv) { c.envelope_points = integer(kv); };
    return t;
  }();
  return table;
}

/// "lo hi" absolute or "x%" symmetric around the nominal value.
buck::Interval box_entry(const KeyValue& kv, double nominal) {
  const auto w = words(kv.value);
  if (w.size() == 1 && w[0].back() == '%') return buck::Interval::around(nominal, quantity(kv));
  if (w.size() != 2) bad(kv, "key '" + kv.key + "' needs 'lo hi' or a percentage");
  const double lo = quantity({kv.key, std::string(w[0]), kv.origin, kv.line});
  const double hi = quantity({kv.key, std::string(w[1]), kv.origin, kv.line});
  if (!(lo <= hi)) bad(kv, "key '" + kv.key + "' has lo > hi");
  return {lo, hi};
}

}  // namespace

double parse_quantity(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || text.empty() || text.front() == '+')
    throw Error(Errc::Validation, "not a number: '" + std::string(text) + "'");
  std::string_view rest = trim(std::string_view(r.ptr, static_cast<std::size_t>(text.data() + text.size() - r.ptr)));
  if (rest == "%") return v / 100.0;
  if (is_unit(rest)) return v;
  std::string_view unit = rest;
  if (const auto scale = prefix_scale(unit); scale && is_unit(unit)) return v * *scale;
  throw Error(Errc::Validation, "unknown unit or prefix '" + std::string(rest) + "'");
}

std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& origin) {
  std::vector<KeyValue> out;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    KeyValue kv{{}, {}, origin, line_no};
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad(kv, "expected 'key = value'");
    kv.key = std::string(trim(line.substr(0, eq)));
    kv.value = std::string(trim(line.substr(eq + 1)));
    if (kv.key.empty() || kv.value.empty()) bad(kv, "expected 'key = value'");
    if (!seen.insert(kv.key).second) bad(kv, "key '" + kv.key + "' repeated");
    out.push_back(std::move(kv));
  }
  return out;
}

std::vector<KeyValue> read_key_values(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path);
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : setters()) out.push_back(k);
  return out;
}

RunConfig load_config(const std::vector<KeyValue>& entries) {
  RunConfig c;
  std::map<std::string, const KeyValue*> box;
  for (const auto& kv : entries) {
    const auto it = setters().find(kv.key);
    if (it == setters().end()) bad(kv, "unknown key '" + kv.key + "'");
    if (it->second)
      it->second(c, kv);
    else
      box[kv.key] = &kv;
  }
  c.sim.V_ref = c.params.V_o_target;
  try {
    c.params.validate();
  } catch (const Error& e) {
    throw Error(Errc::Validation, e.what());
  }

  c.box = buck::default_box(c.params);
  const std::pair<const char*, std::pair<buck::Interval buck::UncertaintyBox::*, double>> fields[] = {
      {"box.C", {&buck::UncertaintyBox::C, c.params.C}},       {"box.L", {&buck::UncertaintyBox::L, c.params.L}},
      {"box.R_C", {&buck::UncertaintyBox::R_C, c.params.R_C}}, {"box.R_i", {&buck::UncertaintyBox::R_i, c.params.R_i}},
      {"box.R_on", {&buck::UncertaintyBox::R_on, c.params.R_on}}, {"box.R_L", {&buck::UncertaintyBox::R_L, c.params.R_L}}};
  for (const auto& [name, f] : fields)
    if (const auto it = box.find(name); it != box.end()) c.box.*(f.first) = box_entry(*it->second, f.second);
  try {
    c.box.validate(c.params);
  } catch (const Error& e) {
    throw Error(Errc::Validation, e.what());
  }

  if (!(c.p_H > 0.0)) throw Error(Errc::Validation, "p_H must be positive");
  if (c.n_samples < 1 || c.n_runs < 1) throw Error(Errc::Validation, "n_samples and n_runs must be at least 1");
  if (c.envelope_budget < 8) throw Error(Errc::Validation, "envelope_budget must be at least 8");
  if (c.envelope_points < 2) throw Error(Errc::Validation, "envelope_points must be at least 2");
  c.sim.validate(1.0 / c.params.f_sw, c.load);
  return c;
}

sim::McScenario scenario(const RunConfig& cfg) {
  sim::McScenario s;
  s.base = cfg.params;
  s.V_in = cfg.params.V_in;
  s.R_L = cfg.params.R_L;
  s.p_H = cfg.p_H;
  s.load = cfg.load;
  s.sim = cfg.sim;
  s.envelope_points = cfg.envelope_points;
  return s;
}

}  // namespace buckdr::io
