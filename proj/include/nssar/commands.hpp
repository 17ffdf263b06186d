/*
 * Experiment orchestration: simulate, sweep, calibrate, analyze, montecarlo.
 * Every artifact starts with a comment header carrying the config hash and
 * seed, and identical (config, seed) pairs produce byte-identical files.
 */
#pragma once

#include <optional>
#include <string>

#include "nssar/calibration.hpp"
#include "nssar/config.hpp"
#include "nssar/decimate.hpp"
#include "nssar/spectrum.hpp"

namespace nssar::cli {

/// Everything one full simulation trial produces. Montecarlo keeps only the
/// metrics; simulate also writes the streams.
struct TrialResult {
    sim::RunOutput out;
    dsp::Spectrum spectrum;
    std::optional<dsp::Metrics> metrics; // present for sine inputs
    std::optional<cal::CalResult> calibration;
    std::string trims_csv;
    std::uint64_t seed_used = 0;
};

/// Build the modulator, run background calibration if enabled, convert
/// n_samples of the configured waveform and analyse the stream.
TrialResult run_trial(const RunConfig& cfg, std::uint64_t trial_index);

/// Dispatch a CLI command. Writes artifacts under cfg.out_dir, prints a
/// one-line summary on stdout, returns a process exit status.
int run_command(const std::string& cmd, const RunConfig& cfg);

/// `# nssar config=<hash> seed=<seed>` header line for artifacts.
std::string artifact_header(const RunConfig& cfg);

} // namespace nssar::cli
