#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "buckdr/buck/model.hpp"
#include "buckdr/design/controller.hpp"
#include "buckdr/dr/schemes.hpp"
#include "buckdr/sim/monte_carlo.hpp"
#include "buckdr/sim/simulate.hpp"

namespace buckdr::io {

/// Number with optional SI prefix and unit: "249u", "8.2uH", "500kHz",
/// "6.5mOhm", "1e6rad/s", "15%". Throws Validation on anything else.
double parse_quantity(std::string_view text);

struct KeyValue {
  std::string key;
  std::string value;
  std::string origin;  // file name or "--set"
  int line = 0;
};

/// "key = value" per line; '#' starts a comment, blank lines are skipped.
/// Throws Validation (with origin:line) on malformed or repeated keys.
std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& origin);

/// Throws Io when the file cannot be read.
std::vector<KeyValue> read_key_values(const std::string& path);

/// Everything a subcommand can be configured with. Keys mirror the field names.
struct RunConfig {
  buck::BuckParams params = buck::nominal_params();
  buck::UncertaintyBox box;  // default_box(params) unless box.* keys are given
  design::DesignOptions design;
  double p_H = 1e6;
  std::array<double, 3> uio_lambda = dr::kDefaultUioLambda;

  int n_samples = 500;        // stability scan
  int envelope_budget = 200;  // interior draws for the frequency envelopes
  std::uint64_t seed = 1;

  sim::SimConfig sim;
  sim::LoadProfile load;
  int n_runs = 50;
  int envelope_points = 400;
};

/// Sorted list of accepted keys.
std::vector<std::string> known_keys();

/// Applies entries over the defaults in order, then resolves the box and
/// validates. Unknown keys and bad values throw Validation naming origin:line.
RunConfig load_config(const std::vector<KeyValue>& entries);

sim::McScenario scenario(const RunConfig& cfg);

}  // namespace buckdr::io
