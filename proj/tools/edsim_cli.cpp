// edsim: spectrum-sensing simulator front door.
//
//   edsim spectra   CONFIG [--out DIR]
//   edsim roc       CONFIG [--out FILE]
//   edsim calibrate CONFIG [--out FILE]
//   edsim record    CONFIG --windows N [--out FILE]
//   edsim detect    RECORDING THRESHOLDS [--out FILE] [--target-pfa P]
//
// Exit codes: 0 ok, 1 usage, 2 config error, 3 data error, 4 precision error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "edsim/cli_io.hpp"

namespace {

using namespace edsim;
using namespace edsim::io;

int run(const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const PrecisionError& e) {
    std::cerr << "precision error: " << e.what() << '\n';
    return kPrecisionError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-detection spectrum sensing under receiver RF impairments"};
  app.require_subcommand(1);

  std::string config, out, recording, thresholds;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<double> target_pfa;
  std::size_t windows = 0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--workers", workers, "worker threads (default: $EDSIM_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
  };

  auto* spectra = app.add_subcommand("spectra", "averaged spectra at each front-end stage");
  add_common(spectra);
  spectra->add_option("--out", out, "output directory");

  auto* roc = app.add_subcommand("roc", "ROC sweep over beta or IRR");
  add_common(roc);
  roc->add_option("--out", out, "output CSV");

  auto* calibrate = app.add_subcommand("calibrate", "empirical thresholds for target false-alarm rates");
  add_common(calibrate);
  calibrate->add_option("--out", out, "output CSV");

  auto* record = app.add_subcommand("record", "write simulated received windows as an IQ recording");
  add_common(record);
  record->add_option("--windows", windows, "number of windows")->required()->check(CLI::PositiveNumber);
  record->add_option("--out", out, "recording path (sidecar written to <path>.json)");

  auto* detect = app.add_subcommand("detect", "per-window energy detection on an IQ recording");
  detect->add_option("recording", recording, "cf32_le recording")->required();
  detect->add_option("thresholds", thresholds, "thresholds CSV from `calibrate`")->required();
  detect->add_option("--out", out, "decisions CSV");
  detect->add_option("--target-pfa", target_pfa, "pick thresholds calibrated for this Pfa");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  const auto opts = [&] { return CommandOptions{out, seed, workers, &std::cerr}; };
  if (*spectra)
    return run([&] {
      for (const auto& p : cmd_spectra(config, opts())) std::cout << p.string() << '\n';
    });
  if (*roc) return run([&] { std::cout << cmd_roc(config, opts()).string() << '\n'; });
  if (*calibrate) return run([&] { std::cout << cmd_calibrate(config, opts()).string() << '\n'; });
  if (*record) return run([&] { std::cout << cmd_record(config, windows, opts()).string() << '\n'; });
  return run([&] {
    const auto summary = cmd_detect(recording, thresholds, out, target_pfa);
    std::cout << summary.windows << " windows";
    for (const auto& [k, n] : summary.busy_count) std::cout << "  ch" << k << ":" << n << " busy";
    std::cout << '\n';
  });
}
