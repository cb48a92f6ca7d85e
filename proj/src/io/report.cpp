#include "buckdr/io/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "buckdr/error.hpp"

namespace buckdr::io {

void Table::add(std::string name, std::vector<double> values) {
  header.push_back(std::move(name));
  columns.push_back(std::move(values));
}

std::string to_csv(const Table& table) {
  if (table.header.size() != table.columns.size())
    throw Error(Errc::DimensionMismatch, "CSV header and column count differ");
  const std::size_t n = table.rows();
  for (const auto& c : table.columns)
    if (c.size() != n) throw Error(Errc::DimensionMismatch, "CSV columns have different lengths");
  std::string out;
  for (std::size_t j = 0; j < table.header.size(); ++j) out += (j ? "," : "") + table.header[j];
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.16e", table.columns[j][i]);
      if (j) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Table parse_csv(std::string_view text) {
  Table t;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw Error(Errc::Validation, "CSV without header");
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.add(cell, {});
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream rs(line);
    std::size_t j = 0;
    for (std::string cell; std::getline(rs, cell, ','); ++j) {
      if (j >= t.columns.size()) throw Error(Errc::Validation, "CSV row " + std::to_string(row) + " is too long");
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw Error(Errc::Validation, "CSV row " + std::to_string(row) + ": bad number '" + cell + "'");
      t.columns[j].push_back(v);
    }
    if (j != t.columns.size()) throw Error(Errc::Validation, "CSV row " + std::to_string(row) + " is too short");
  }
  return t;
}

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::vector<double> numbers(const json& array) {
  std::vector<double> out;
  for (const auto& v : array) {
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      const auto s = v.get<std::string>();
      out.push_back(s == "nan"   ? std::numeric_limits<double>::quiet_NaN()
                    : s == "inf" ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity());
    }
  }
  return out;
}

std::string to_json_text(const json& j) { return j.dump(2) + "\n"; }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::Io, "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::filesystem::path default_output_dir() {
  const char* env = std::getenv("BUCKDR_OUT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("buckdr-out");
}

ReportBundle::ReportBundle(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(Errc::Io, "cannot create '" + dir_.string() + "': " + ec.message());
}

void ReportBundle::add_input_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  inputs_.push_back({{"path", path}, {"sha256", sha256_hex(ss.str())}});
}

void ReportBundle::set_config(const json& resolved) {
  meta_["config"] = resolved;
  meta_["inputs_hash"] = sha256_hex(resolved.dump());
}

void ReportBundle::write_text(const std::string& name, const std::string& contents) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
  out.close();
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  files_.push_back({{"name", name}, {"bytes", contents.size()}, {"sha256", sha256_hex(contents)}});
}

std::filesystem::path ReportBundle::finish() {
  json m = meta_;
  m["inputs"] = inputs_;
  m["files"] = files_;
  const auto path = dir_ / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << to_json_text(m);
  out.close();
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  return path;
}

}  // namespace buckdr::io
