#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "ssblab/config_io.hpp"
#include "ssblab/waveform_io.hpp"

namespace ssb {

enum class Command { Simulate, Estimate, Campaign, Analyze };

/// Stable process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitIo = 3,
    kExitNoDetection = 4,
    kExitInternal = 5,
};

struct RunManifest {
    Command command = Command::Simulate;
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
    std::string input;  // estimate: waveform path, default <out>/waveform.<fmt>
    SampleFormat sample_format = SampleFormat::Cf32;
};

/// First 16 hex digits of SHA-256 over the resolved configuration document.
std::string config_hash(const nlohmann::json& resolved);

void cmd_simulate(const RunManifest& m);
void cmd_estimate(const RunManifest& m);
void cmd_campaign(const RunManifest& m);
void cmd_analyze(const RunManifest& m);

/// Parses arguments, dispatches, and maps failures to exit codes. Messages go to err.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace ssb
