#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heatlab/config.hpp"
#include "heatlab/estimates.hpp"

namespace heatlab {

inline constexpr const char* kToolVersion = "heatlab 1.0.0";

struct RunOptions {
  int jobs = 0;  // 0: HEATLAB_THREADS or 1
  std::optional<std::string> output_dir;
  bool plots = false;
  std::ostream* log = nullptr;
};

/// Files written by one command, with their SHA-256 checksums.
class ArtifactStore {
 public:
  struct Item {
    std::string path;  // relative to root
    std::string sha256;
    std::size_t bytes = 0;
  };

  explicit ArtifactStore(std::filesystem::path root);
  void write(const std::string& relative, const std::string& bytes);
  std::string read(const std::string& relative) const;
  const std::filesystem::path& root() const { return root_; }
  const std::vector<Item>& items() const { return items_; }

 private:
  std::filesystem::path root_;
  std::vector<Item> items_;
};

/// Writes manifest.json through a temporary file and a rename.
void write_manifest(const ArtifactStore& store, const RunConfig& cfg, const std::string& command,
                    const std::string& started_at, const nlohmann::ordered_json& summary);

/// Exit codes: simulate 0 completed / 2 blow-up / 1 otherwise; the other
/// commands 0 when every verdict passes, 1 otherwise.
int cmd_simulate(const RunConfig& cfg, const RunOptions& opt);
int cmd_verify(const RunConfig& cfg, const RunOptions& opt);
int cmd_decay_sweep(const RunConfig& cfg, const RunOptions& opt);
int cmd_decompose(const RunConfig& cfg, const RunOptions& opt);

/// The verify suite without any file output.
ExperimentReport run_verify_suite(const RunConfig& cfg, int jobs);

/// Loads the config and dispatches; any error is printed and mapped to 1.
int run_command(const std::string& command, const std::string& config_path, const RunOptions& opt);

// Plots from artifacts on disk.  A missing or unreadable artifact throws
// std::runtime_error.

/// Log-log L^2 norm against time with the decay fit over [1, t_end] when
/// enough records exist.
std::string plot_trajectory(const std::filesystem::path& csv);
/// Scatter of a named per-N family of member ratios ("<prefix><N>") from a
/// report JSON.
std::string plot_ratio_scatter(const std::filesystem::path& report_json, const std::string& prefix,
                               const std::string& title);
/// Slope against gamma0 from a sweep table.
std::string plot_sweep(const std::filesystem::path& sweep_csv);

}  // namespace heatlab
