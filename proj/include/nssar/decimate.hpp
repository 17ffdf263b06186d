/*
 * Sinc^order (cascaded comb) decimator with droop equalisation. Even ratios
 * run two stages: comb down to twice the output rate, then an equalizing
 * lowpass ahead of the final halving so shaped noise just above the output
 * Nyquist cannot fold onto the band edge. Odd ratios use a single comb stage
 * with an inverse-sinc equaliser. All filtering is direct-form FIR over
 * fully-valid windows, so there is no startup transient, and DC gain is
 * exactly unity.
 */
#pragma once

#include <span>
#include <vector>

namespace nssar::dsp {

/// Downsample by osr with an order-stage comb filter. order >= 1; osr = 1 is
/// the identity. Only fully-valid output samples are emitted.
std::vector<double> decimate(std::span<const double> x, int osr, int order);

/// Single-stage inverse-sinc taps for (osr, order); exposed for tests.
std::vector<double> droop_equalizer_taps(int osr, int order);

} // namespace nssar::dsp
