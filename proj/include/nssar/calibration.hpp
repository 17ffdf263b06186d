/*
 * Background MSB-capacitor calibration. Balanced element sets are shuffled
 * out against each other; any voltage left on the DAC node is pure mismatch,
 * and its comparator sign is accumulated into per-element trim codes for the
 * 8-bit sub-DACs. Runs with or without a signal being converted: the
 * balanced sets cancel the input, and the DWA pointer randomises which
 * elements meet in each partition.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nssar/modulator.hpp"

namespace nssar::cal {

struct ShuffleSets {
    std::vector<int> plus;
    std::vector<int> minus;
};

/// Random balanced partition of the MSB elements, rotated by the current
/// DWA pointer. floor(n/2) elements per side; with an odd element count one
/// element sits out per measurement. Deterministic per rng state.
ShuffleSets shuffle_pair(const sim::CapArrayState& a, Rng& rng);
ShuffleSets shuffle_pair(const sim::CapArrayState& a, std::uint64_t seed);

/// Sign of the trimmed mismatch imbalance between the two sets, with one
/// comparator noise draw. Returns -1, 0 or +1.
int measure_mismatch(const sim::CapArrayState& a, const ShuffleSets& sets,
                     const sim::NonIdealities& ni, Rng& rng, double vdd);

/// Accumulate the sign against every member of both sets; a code steps by
/// one (clamped to [0, 255]) when its accumulator reaches the threshold.
void update_trims(sim::TrimTable& t, const ShuffleSets& sets, int sign);

struct CalResult {
    double initial_std = 0.0;  // mismatch std before calibration
    double residual_std = 0.0; // effective mismatch std after
    double effective_bits = 0.0; // log2(initial/residual)
    long code_steps = 0;
    long cycles = 0;
};

/// Mean-removed std of the effective (trimmed) MSB element errors.
double effective_mismatch_std(const sim::CapArrayState& a);

/// Iterate shuffle -> measure -> update for n_cycles. When `concurrent` is
/// given, a conversion of that waveform runs before every calibration cycle,
/// exercising the background-operation property.
CalResult run_calibration(sim::ModulatorState& st, long n_cycles,
                          std::uint64_t seed,
                          const sim::Waveform* concurrent = nullptr);

/// Comma-separated `index,code` lines.
std::string trims_to_csv(const sim::TrimTable& t);
void trims_from_csv(sim::TrimTable& t, const std::string& text);

} // namespace nssar::cal
