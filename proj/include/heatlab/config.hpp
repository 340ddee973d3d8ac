#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heatlab/heat_flow.hpp"
#include "heatlab/initial_data.hpp"

namespace heatlab {

/// Flat INI text: "[section]" headers, "key = value" lines, full-line
/// comments starting with '#' or ';'.
class IniDocument {
 public:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
  };

  /// Throws ConfigError ("<source>:<line>: ...") on malformed lines and
  /// duplicate keys.
  static IniDocument parse(std::istream& in, const std::string& source = "<config>");
  static IniDocument parse_string(const std::string& text, const std::string& source = "<config>");

  const std::vector<Entry>& entries() const { return entries_; }
  const Entry* find(const std::string& section, const std::string& key) const;
  const std::string& source() const { return source_; }

  /// "section.key=value" lines sorted by section and key.
  std::string canonical() const;

 private:
  std::string source_;
  std::vector<Entry> entries_;
};

enum class Experiment { simulate, verify, decay_sweep, decompose };

std::string to_string(Experiment e);

struct DataConfig {
  enum class Kind { rough, gaussian };
  Kind kind = Kind::rough;
  RoughDataSpec rough;
  double width = 1.0;  // gaussian
};

struct VerifyConfig {
  double horizon = 2000.0;
  double strichartz_spread = 10.0;
  double tail_fraction = 0.01;
  double embedding_spread = 10.0;
  double embedding_s = 0.75;
  double bernstein_spread = 10.0;
  double bernstein_L = 32.0;
  int bernstein_M = 256;
  int bernstein_points = 64;
  double mismatch_L = 32.0;
  int mismatch_M = 512;
  double mismatch_slope = -0.8;
  double mismatch_spread = 10.0;
  double duhamel_spread = 10.0;
  double smoothing_slack = 1e-3;
};

struct SweepConfig {
  std::vector<double> gamma0s{0.1, 0.2};
  std::vector<double> amplitudes{1.0};
  bool focusing = false;
  double focusing_amplitude = 1e-2;
  double fit_t_a = 1.0;
  double fit_t_b = 0.0;  // 0 selects t_end
  double slope_tol = 0.05;
  double zero_slope_tol = 0.03;
  double r2_min = 0.95;
};

struct DecomposeConfig {
  std::vector<double> scales{4.0, 8.0, 16.0, 32.0, 64.0};
  double leak_slope_max = -0.8;
  double w0_slope_slack = 0.1;
  double control_max = 5.0;
};

struct RunConfig {
  std::optional<Experiment> experiment;
  int dimension = 2;
  double period = 128.0;
  int points = 512;
  DataConfig data;
  SolverConfig solver;
  CutoffSchedule schedule;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "heatlab_out";
  bool emit_plots = false;
  VerifyConfig verify;
  SweepConfig sweep;
  DecomposeConfig decompose;

  std::string canonical_text;
  /// Hex SHA-256 of canonical_text.
  std::string digest;

  Grid grid() const { return Grid(dimension, period, points); }
};

/// Parses and validates; every failure is a ConfigError naming the source
/// line and the offending field.
RunConfig load_run_config(const IniDocument& doc);
RunConfig load_run_config_file(const std::string& path);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);

}  // namespace heatlab
