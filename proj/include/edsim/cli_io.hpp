#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "edsim/experiments.hpp"

namespace edsim::io {

/// Malformed or out-of-schema experiment configuration. Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : std::runtime_error(key_path + ": " + message), key_path_(std::move(key_path)) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

/// Malformed recording, sidecar or threshold file. Exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kOk = 0, kUsage = 1, kConfigError = 2, kDataError = 3, kPrecisionError = 4 };

struct SpectraSpec {
  std::size_t n_avg = 200;
};

struct RocSpec {
  int channel = 1;
  SweepParameter parameter = SweepParameter::Beta;
  std::vector<double> values;
  std::vector<double> target_pfa;
};

struct CalibrateSpec {
  std::vector<double> target_pfa;
  /// Empty: every idle channel of the scenario.
  std::vector<int> channels;
  std::optional<std::uint64_t> holdout_seed;
};

struct ExperimentConfig {
  ScenarioConfig scenario;
  ImpairmentConfig impairments;
  std::size_t n_trials = 10000;
  std::uint64_t seed = 0;
  std::optional<unsigned> workers;
  std::optional<SpectraSpec> spectra;
  std::optional<RocSpec> roc;
  std::optional<CalibrateSpec> calibrate;

  unsigned worker_count() const { return workers.value_or(default_workers()); }
};

/// Strict schema: unknown keys, wrong types and invalid values are all
/// reported with their key path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes via a temporary sibling file and renames it into place.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile();

  std::ofstream& stream() { return out_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline constexpr const char* kSpectrumHeader = "freq_hz,power_db";
inline constexpr const char* kRocHeader = "param_value,lambda,pfa,pfa_lo,pfa_hi,pd,pd_lo,pd_hi";
inline constexpr const char* kThresholdHeader = "channel,target_pfa,lambda,achieved_pfa,ci_lo,ci_hi";
inline constexpr const char* kDecisionHeader = "window_index,channel,energy,lambda,decision";

std::string format_number(double v);

/// DC-centred spectrum rows (freq_hz, power_db).
void write_spectrum_csv(std::ostream& os, const ChannelPlan& plan, const Eigen::VectorXd& power);
void write_roc_csv(std::ostream& os, const std::vector<SweepEntry>& sweep);

struct ThresholdRow {
  int channel = 0;
  double target_pfa = 0.0;
  double lambda = 0.0;
  double achieved_pfa = 0.0;
  Interval ci;
};

void write_threshold_csv(std::ostream& os, const std::vector<ThresholdRow>& rows);
std::vector<ThresholdRow> read_threshold_csv(const std::filesystem::path& path);

/// Threshold per channel of `plan`. With several targets per channel,
/// `target_pfa` picks one.
ThresholdVector select_thresholds(const std::vector<ThresholdRow>& rows, const ChannelPlan& plan,
                                  std::optional<double> target_pfa);

/// Interleaved little-endian float32 I,Q with a JSON sidecar at
/// `<path>.json` carrying sample_rate and the plan.
std::filesystem::path sidecar_path(const std::filesystem::path& recording);
void write_recording(const std::filesystem::path& path, const ChannelPlan& plan,
                     const std::vector<Baseband>& windows);
ChannelPlan read_sidecar(const std::filesystem::path& recording);

/// Streams a recording one dft_size window at a time.
class RecordingReader {
 public:
  explicit RecordingReader(const std::filesystem::path& path);
  const ChannelPlan& plan() const { return plan_; }
  std::uint64_t num_windows() const { return num_windows_; }
  /// Next window, or false at end of file.
  bool next(Baseband& window);

 private:
  ChannelPlan plan_;
  std::ifstream in_;
  std::uint64_t num_windows_ = 0;
  std::vector<char> buffer_;
};

/// Rounds through float32, the precision of a recording.
Baseband quantize_to_recording(const Baseband& window);

struct CommandOptions {
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::ostream* log = nullptr;
};

/// Returns the files written.
std::vector<std::filesystem::path> cmd_spectra(const std::filesystem::path& config_path,
                                               const CommandOptions& opts);
std::filesystem::path cmd_roc(const std::filesystem::path& config_path, const CommandOptions& opts);
std::filesystem::path cmd_calibrate(const std::filesystem::path& config_path, const CommandOptions& opts);
std::filesystem::path cmd_record(const std::filesystem::path& config_path, std::size_t n_windows,
                                 const CommandOptions& opts);

struct DetectSummary {
  std::uint64_t windows = 0;
  std::map<int, std::uint64_t> busy_count;
};

DetectSummary cmd_detect(const std::filesystem::path& recording_path,
                         const std::filesystem::path& thresholds_path,
                         const std::filesystem::path& out, std::optional<double> target_pfa = std::nullopt);

}  // namespace edsim::io
