#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace buckdr::io {

using json = nlohmann::json;

/// Named columns of equal length.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  void add(std::string name, std::vector<double> values);
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// Header row, then one row per sample in %.16e. Throws DimensionMismatch on
/// ragged columns.
std::string to_csv(const Table& table);
/// Throws Validation on malformed input.
Table parse_csv(std::string_view text);

/// Finite values as numbers, others as "inf", "-inf" or "nan".
json number(double x);
std::vector<double> numbers(const json& array);

/// Two-space indent, keys sorted, trailing newline.
std::string to_json_text(const json& j);

std::string sha256_hex(std::string_view data);

/// BUCKDR_OUT when set, else "buckdr-out".
std::filesystem::path default_output_dir();

/// Output directory plus manifest.json listing every emitted file with its
/// SHA-256. No timestamps, so equal inputs give byte-identical bundles.
class ReportBundle {
 public:
  /// Creates the directory; throws Io on failure.
  explicit ReportBundle(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  void add_input_file(const std::string& path);
  /// Resolved configuration; its hash becomes the manifest's inputs_hash.
  void set_config(const json& resolved);
  void set(const std::string& key, json value) { meta_[key] = std::move(value); }

  void write_text(const std::string& name, const std::string& contents);
  void write_csv(const std::string& name, const Table& table) { write_text(name, to_csv(table)); }
  void write_json(const std::string& name, const json& j) { write_text(name, to_json_text(j)); }

  /// Writes manifest.json and returns its path.
  std::filesystem::path finish();

 private:
  std::filesystem::path dir_;
  json meta_ = json::object();
  json inputs_ = json::array();
  json files_ = json::array();
};

}  // namespace buckdr::io
