/*
 * Run configuration: flat `section.key = value` text, every key with a
 * documented default, unknown keys rejected. The defaults are the reference
 * operating point of the converter (50 pF, N=10, M=2, tau=5, K=4, D=4, E=2,
 * OSR=16, 1.8 V, 500 kS/s, -3 dBFS sine at 6.5 kHz).
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nssar/analytic.hpp"
#include "nssar/modulator.hpp"
#include "nssar/spectrum.hpp"

namespace nssar::cli {

struct RunConfig {
    analytic::DesignParams design;
    sim::NonIdealities nonideal;
    sim::Waveform waveform;
    std::string waveform_path; // sample list for waveform.kind = file
    long n_samples = 65536;
    bool trace = false;
    std::uint64_t seed = 1;

    struct Analysis {
        dsp::Window window = dsp::Window::hann;
        int n_fft = 0; // 0 = largest power of two <= n_samples
        double power_w = 68e-6;
        std::string input;      // code stream for `analyze`
        bool decimate = false;
        int decimate_order = 3; // ns_order + 1
    } analysis;

    struct Calib {
        bool enabled = true;
        long cycles = 20000;
        int threshold = 4;
        double range_frac = 0.05;
        std::string load; // warm-start trim table
    } calib;

    struct Mc {
        int trials = 16;
    } mc;

    analytic::PowerModel power;
    std::string sweep_preset = "fig2";
    std::string out_dir = "out";
    bool parallel = true;
};

/// Reference-design defaults with derived fields (comparator noise,
/// saturation rail) resolved.
RunConfig default_config();

/// Parse flat key=value text over the defaults. Throws std::runtime_error
/// naming the key on unknown keys, type mismatches or range violations.
RunConfig parse_config(const std::string& text);

/// Apply one `section.key=value` setting (CLI override path).
void apply_setting(RunConfig& cfg, const std::string& key,
                   const std::string& value);

/// Resolve auto fields and validate everything; called by parse_config and
/// after CLI overrides.
void finalize_config(RunConfig& cfg);

/// Stable full dump, one key=value per line, fixed key order.
std::string canonical_dump(const RunConfig& cfg);

/// FNV-1a of the canonical dump; stamped into every emitted artifact.
std::uint64_t config_hash(const RunConfig& cfg);

/// One documentation line per key: "name  default  description".
std::vector<std::string> config_key_docs();

/// Seed for Monte Carlo trial `idx`; trial 0 is the plain simulate seed.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t idx);

} // namespace nssar::cli
