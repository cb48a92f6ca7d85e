#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "buckdr/error.hpp"
#include "buckdr/io/config.hpp"
#include "buckdr/io/report.hpp"
#include "buckdr/io/summaries.hpp"
#include "buckdr/random.hpp"

using namespace buckdr;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("buckdr_test_io_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Quantity, PrefixesAndUnits) {
  EXPECT_DOUBLE_EQ(io::parse_quantity("249u"), 249e-6);
  EXPECT_DOUBLE_EQ(io::parse_quantity("0.249mF"), 0.249e-3);
  EXPECT_DOUBLE_EQ(io::parse_quantity("8.2uH"), 8.2e-6);
  EXPECT_DOUBLE_EQ(io::parse_quantity("8.2\xc2\xb5H"), 8.2e-6);
  EXPECT_DOUBLE_EQ(io::parse_quantity("500kHz"), 5e5);
  EXPECT_DOUBLE_EQ(io::parse_quantity("6.5mOhm"), 6.5e-3);
  EXPECT_DOUBLE_EQ(io::parse_quantity("1e6rad/s"), 1e6);
  EXPECT_DOUBLE_EQ(io::parse_quantity("1MA/s"), 1e6);
  EXPECT_DOUBLE_EQ(io::parse_quantity("3ms"), 3e-3);
  EXPECT_DOUBLE_EQ(io::parse_quantity(" 20 V "), 20.0);
  EXPECT_DOUBLE_EQ(io::parse_quantity("15%"), 0.15);
  EXPECT_DOUBLE_EQ(io::parse_quantity("-1e6"), -1e6);
}

TEST(Quantity, RejectsGarbage) {
  for (const char* bad : {"", "abc", "5 parsec", "5kk", "+5", "1.2.3", "mF"})
    EXPECT_EQ(code_of([&] { io::parse_quantity(bad); }), Errc::Validation) << bad;
}

TEST(KeyValues, CommentsBlanksAndLineNumbers) {
  const auto kv = io::parse_key_values("# header\n\nC = 1u  # trailing\n  L=2u\n", "x.cfg");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0].key, "C");
  EXPECT_EQ(kv[0].value, "1u");
  EXPECT_EQ(kv[0].line, 3);
  EXPECT_EQ(kv[1].key, "L");
  EXPECT_EQ(kv[1].line, 4);
}

TEST(KeyValues, MalformedAndRepeatedLinesNameTheLine) {
  EXPECT_NE(error_text([] { io::parse_key_values("C = 1\nnonsense\n", "a.cfg"); }).find("a.cfg:2:"), std::string::npos);
  EXPECT_NE(error_text([] { io::parse_key_values("C = 1\n\nC = 2\n", "a.cfg"); }).find("a.cfg:3:"), std::string::npos);
  EXPECT_EQ(code_of([] { io::parse_key_values("= 1\n", "a.cfg"); }), Errc::Validation);
}

TEST(KeyValues, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { io::read_key_values("/nonexistent/params.cfg"); }), Errc::Io);
}

TEST(Config, UnknownKeyReportsLine) {
  const auto kv = io::parse_key_values("C = 1u\nL = 2u\n\nR_load = 5\n", "bad.cfg");
  const std::string msg = error_text([&] { io::load_config(kv); });
  EXPECT_NE(msg.find("bad.cfg:4:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("R_load"), std::string::npos) << msg;
}

TEST(Config, DefaultsAreNominal) {
  const auto c = io::load_config({});
  const auto nom = buck::nominal_params();
  EXPECT_EQ(c.params.C, nom.C);
  EXPECT_EQ(c.params.R_L, nom.R_L);
  const auto box = buck::default_box(nom);
  EXPECT_EQ(c.box.L.lo, box.L.lo);
  EXPECT_EQ(c.box.R_L.hi, box.R_L.hi);
  EXPECT_EQ(c.sim.V_ref, nom.V_o_target);
}

TEST(Config, CommittedParameterFileIsTheNominalSet) {
  const auto c = io::load_config(io::read_key_values(std::string(BUCKDR_SOURCE_DIR) + "/data/table1.cfg"));
  const auto nom = buck::nominal_params();
  EXPECT_DOUBLE_EQ(c.params.C, nom.C);
  EXPECT_DOUBLE_EQ(c.params.L, nom.L);
  EXPECT_DOUBLE_EQ(c.params.R_C, nom.R_C);
  EXPECT_DOUBLE_EQ(c.params.R_i, nom.R_i);
  EXPECT_DOUBLE_EQ(c.params.R_on, nom.R_on);
  EXPECT_DOUBLE_EQ(c.params.R_L, nom.R_L);
  EXPECT_DOUBLE_EQ(c.params.f_sw, nom.f_sw);
  const auto box = buck::default_box(nom);
  EXPECT_DOUBLE_EQ(c.box.C.lo, box.C.lo);
  EXPECT_DOUBLE_EQ(c.box.R_on.hi, box.R_on.hi);
}

TEST(Config, BoxEntriesAbsoluteAndRelative) {
  const auto c = io::load_config(io::parse_key_values("box.C = 0.2m 0.3m\nbox.L = 5%\n", "b.cfg"));
  EXPECT_DOUBLE_EQ(c.box.C.lo, 0.2e-3);
  EXPECT_DOUBLE_EQ(c.box.C.hi, 0.3e-3);
  EXPECT_DOUBLE_EQ(c.box.L.hi, 1.05 * c.params.L);
  EXPECT_EQ(code_of([] { io::load_config(io::parse_key_values("box.C = 0.3m 0.2m\n", "b.cfg")); }), Errc::Validation);
  EXPECT_EQ(code_of([] { io::load_config(io::parse_key_values("box.C = 0.3m 0.4m\n", "b.cfg")); }), Errc::Validation);
}

TEST(Config, ScenarioKeys) {
  const auto c = io::load_config(io::parse_key_values(
      "R_L = 5\nmode = switched\nstep_amplitude = 4A\nn_runs = 7\nseed = 18446744073709551615\nuio_lambda = -1M, -1M, -950k\n",
      "s.cfg"));
  EXPECT_EQ(c.sim.mode, sim::Mode::Switched);
  EXPECT_EQ(c.load.step_amplitude, 4.0);
  EXPECT_EQ(c.n_runs, 7);
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.uio_lambda[2], -0.95e6);
  const auto sc = io::scenario(c);
  EXPECT_EQ(sc.R_L, 5.0);
  EXPECT_EQ(sc.base.C, c.params.C);
  EXPECT_EQ(code_of([] { io::load_config(io::parse_key_values("n_runs = 2.5\n", "s.cfg")); }), Errc::Validation);
  EXPECT_EQ(code_of([] { io::load_config(io::parse_key_values("mode = fast\n", "s.cfg")); }), Errc::Validation);
  EXPECT_EQ(code_of([] { io::load_config(io::parse_key_values("t_end = 3.01ms\n", "s.cfg")); }), Errc::Validation);
}

TEST(Config, EveryKnownKeyIsAccepted) {
  const auto keys = io::known_keys();
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(std::count(keys.begin(), keys.end(), "box.R_L"), 1);
  EXPECT_EQ(std::count(keys.begin(), keys.end(), "R_L"), 1);
}

TEST(Csv, EmptySeriesIsHeaderOnly) {
  io::Table t;
  t.add("t", {});
  t.add("v_o", {});
  EXPECT_EQ(io::to_csv(t), "t,v_o\n");
  const auto back = io::parse_csv("t,v_o\n");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows(), 0u);
}

TEST(Csv, RoundTripIsBitExact) {
  auto rng = make_rng(3);
  io::Table t;
  for (const char* name : {"a", "b", "c"}) {
    std::vector<double> col;
    for (int i = 0; i < 200; ++i) col.push_back(std::ldexp(uniform(rng, -1.0, 1.0), static_cast<int>(uniform(rng, -60, 60))));
    t.add(name, col);
  }
  t.columns[0][0] = std::numeric_limits<double>::denorm_min();
  t.columns[1][0] = -0.0;
  const auto back = io::parse_csv(io::to_csv(t));
  ASSERT_EQ(back.columns.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < t.rows(); ++i) ASSERT_EQ(back.columns[j][i], t.columns[j][i]) << j << " " << i;
}

TEST(Csv, NumbersUseScientificNotationWithPeriod) {
  io::Table t;
  t.add("x", {1234.5});
  EXPECT_EQ(io::to_csv(t), "x\n1.2345000000000000e+03\n");
}

TEST(Csv, RaggedOrMalformedInputThrows) {
  io::Table t;
  t.add("a", {1.0, 2.0});
  t.add("b", {1.0});
  EXPECT_EQ(code_of([&] { io::to_csv(t); }), Errc::DimensionMismatch);
  EXPECT_EQ(code_of([] { io::parse_csv("a,b\n1,2,3\n"); }), Errc::Validation);
  EXPECT_EQ(code_of([] { io::parse_csv("a,b\n1\n"); }), Errc::Validation);
  EXPECT_EQ(code_of([] { io::parse_csv("a\n1x\n"); }), Errc::Validation);
}

TEST(Json, KeysAreSortedAndNonFiniteIsText) {
  const io::json j{{"zeta", 1}, {"alpha", io::number(std::numeric_limits<double>::infinity())}, {"mid", io::number(NAN)}};
  const std::string text = io::to_json_text(j);
  EXPECT_LT(text.find("alpha"), text.find("mid"));
  EXPECT_LT(text.find("mid"), text.find("zeta"));
  EXPECT_NE(text.find("\"inf\""), std::string::npos);
  const auto back = io::numbers(io::json::array({1.5, "inf", "-inf"}));
  EXPECT_EQ(back[0], 1.5);
  EXPECT_EQ(back[1], std::numeric_limits<double>::infinity());
  EXPECT_EQ(back[2], -std::numeric_limits<double>::infinity());
}

TEST(Json, DoublesRoundTrip) {
  const double x = 0.1 + 0.2;
  EXPECT_EQ(io::json::parse(io::to_json_text({{"x", x}}))["x"].get<double>(), x);
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Bundle, ManifestListsEveryFileWithItsHash) {
  const fs::path dir = scratch_dir("manifest");
  io::ReportBundle b(dir);
  io::Table t;
  t.add("x", {1.0, 2.0});
  b.write_csv("a.csv", t);
  b.write_json("b.json", {{"k", 1}});
  b.set_config({{"seed", 4}});
  const auto m = io::json::parse(slurp(b.finish()));
  ASSERT_EQ(m["files"].size(), 2u);
  for (const auto& f : m["files"]) {
    const std::string body = slurp(dir / f["name"].get<std::string>());
    EXPECT_EQ(f["sha256"], io::sha256_hex(body));
    EXPECT_EQ(f["bytes"], body.size());
  }
  EXPECT_EQ(m["inputs_hash"], io::sha256_hex(io::json{{"seed", 4}}.dump()));
}

TEST(Bundle, SameContentSameBytes) {
  auto make = [](const std::string& name) {
    io::ReportBundle b(scratch_dir(name));
    b.set_config({{"seed", 1}});
    b.write_text("x.txt", "hello\n");
    return slurp(b.finish());
  };
  EXPECT_EQ(make("det1"), make("det2"));
}

TEST(Bundle, OutputDirectoryFromEnvironment) {
  ::setenv("BUCKDR_OUT", "/tmp/some_out", 1);
  EXPECT_EQ(io::default_output_dir(), fs::path("/tmp/some_out"));
  ::unsetenv("BUCKDR_OUT");
  EXPECT_EQ(io::default_output_dir(), fs::path("buckdr-out"));
}

TEST(Bundle, UnwritableDirectoryIsIoError) {
  EXPECT_EQ(code_of([] { io::ReportBundle b("/proc/buckdr_no_such_dir/x"); }), Errc::Io);
}

TEST(Summaries, EnvelopeTableHasOneRowPerGridPoint) {
  sim::McSummary s;
  s.t = {0.0, 1.0, 2.0};
  sim::McSchemeSummary x;
  x.n_ok = 1;
  for (auto* e : {&x.v_o, &x.v_c_tot, &x.v_inj, &x.i_out_hat}) *e = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  const auto t = io::envelope_table(s, x);
  EXPECT_EQ(t.header.size(), 13u);
  EXPECT_EQ(t.rows(), 3u);
  x.n_ok = 0;
  EXPECT_EQ(io::envelope_table(s, x).rows(), 0u);
}
