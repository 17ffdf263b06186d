/*
 * Capacitor DAC state: thermometer-coded MSB unit elements with Gaussian
 * mismatch and per-element trim codes, two ping-pong binary-weighted LSB
 * arrays, and the DWA rotation pointer.
 */
#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "nssar/rng.hpp"

namespace nssar::sim {

/// Per-MSB-capacitor calibration codes driving an 8-bit trim sub-DAC.
/// A code step changes the element weight by range_frac/256 of one unit.
struct TrimTable {
    std::vector<int> codes;        // [0, 255], mid-code 128 = no correction
    std::vector<int> accumulators; // signed sign-accumulation counters
    double range_frac = 0.05;      // total trim span as fraction of a unit
    int threshold = 4;             // accumulated signs per code step

    explicit TrimTable(std::size_t n_elems = 0)
        : codes(n_elems, 128), accumulators(n_elems, 0) {}

    double step() const { return range_frac / 256.0; }

    /// Correction subtracted from the element's relative error.
    double correction(std::size_t i) const { return (codes[i] - 128) * step(); }
};

struct CapArrayState {
    int msb_bits = 4; // K
    int sar_bits = 10; // N
    std::vector<double> msb_err; // 2^K - 1 relative unit errors
    // Per-bit relative weight errors of the two ping-pong LSB arrays,
    // index [array][bit], bit 0 = LSB.
    std::array<std::vector<double>, 2> lsb_err;
    int dwa_pointer = 0;
    TrimTable trim;

    int n_msb_elems() const { return (1 << msb_bits) - 1; }
    int n_lsb_bits() const { return sar_bits - msb_bits; }

    /// Element error with its trim correction applied.
    double effective_err(std::size_t i) const {
        return msb_err[i] - trim.correction(i);
    }
};

/// Draw a mismatched array. Deterministic per seed; sigma = 0 gives exact
/// nominal weights. Throws std::invalid_argument for K > N or sigma < 0.
CapArrayState build_array(int msb_bits, int sar_bits, double sigma,
                          std::uint64_t seed);

/// Rotating element selection: `code` consecutive indices starting at
/// `pointer` modulo n_elems, new pointer advanced by code.
/// Requires 0 <= code <= n_elems and 0 <= pointer < n_elems.
std::pair<std::vector<int>, int> dwa_select(int pointer, int code, int n_elems);

} // namespace nssar::sim
