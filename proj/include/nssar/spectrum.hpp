/*
 * Periodogram and in-band metric computation. Bin powers are normalised by
 * the window's incoherent gain, so summing a tone's leakage cluster recovers
 * its power exactly and summing noise bins recovers the noise power; a
 * full-scale sine reads 0 dBFS against the vdd^2/8 reference.
 */
#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nssar::dsp {

/// Spectral floor sentinel for zero-power bins (dB). Keeps exports finite.
inline constexpr double kFloorDb = -400.0;

enum class Window { rectangular, hann };

struct Spectrum {
    std::vector<double> freq_hz;    // ascending, 0 .. fs/2
    std::vector<double> power;      // single-sided bin power, V^2
    std::vector<double> power_dbfs; // relative to the full-scale sine
    int n_fft = 0;
    Window window = Window::hann;
    double fs = 0.0;
    double ref_power = 0.0; // full-scale sine power, V^2
    double bin_hz() const { return fs / n_fft; }
};

struct Metrics {
    double sndr_db = 0.0;
    double sfdr_db = 0.0;
    double enob_bits = 0.0;
    double signal_freq_hz = 0.0;
    double in_band_edge_hz = 0.0;
    double signal_power = 0.0; // V^2
    double noise_power = 0.0;  // in-band, signal excluded, V^2
    std::optional<double> fom_s_db;
};

/// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& x);

/// Single-sided power spectrum of the first n_fft samples. n_fft must be a
/// power of two and no longer than the stream.
Spectrum periodogram(std::span<const double> x, Window window, int n_fft,
                     double fs, double full_scale_sine_power);

/// In-band SNDR/SFDR/ENOB for a tone at signal_freq. The band edge is
/// fs/(2*osr) exactly; the signal must fall inside it. Leakage guard:
/// +-3 bins for hann, the single bin for rectangular (coherent tones).
Metrics sndr(const Spectrum& spec, double signal_freq, int osr);

/// Least-squares spectral slope in dB/decade over [f_lo, f_hi], after
/// averaging bins into log-spaced buckets to tame periodogram variance.
double fit_slope_db_per_decade(const Spectrum& spec, double f_lo, double f_hi);

std::string spectrum_to_csv(const Spectrum& spec);
std::string metrics_to_text(const Metrics& m);

} // namespace nssar::dsp
