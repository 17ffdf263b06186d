/*
 * Discrete-time behavioral model of one noise-shaping SAR conversion
 * channel. A conversion runs three phases: sample (input plus mismatch-
 * error-shaping offset, optional kT/C draw), asynchronous SAR bit trials
 * against the mismatched capacitor DAC with per-trial settling errors, and
 * quantisation-noise filtering (residue amplification into the cascaded
 * feed-forward integrator pair). DWA rotates the thermometer MSB elements;
 * the two LSB arrays ping-pong to realise first/second-order MES feedback.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "nssar/analytic.hpp"
#include "nssar/caparray.hpp"
#include "nssar/rng.hpp"

namespace nssar::sim {

struct NonIdealities {
    double settle_tau = 5.0;     // DAC settling time constants per bit trial
    double cmp_offset = 0.0;     // comparator offset, volts
    double cmp_noise_rms = 0.0;  // comparator input noise, volts rms
    bool thermal_noise = true;   // kT/C_T sampling-noise injection
    bool mismatch_enabled = true;
    bool dwa_enabled = true;
    int mes_order = 2;           // E in {0,1,2}
    double gain_mismatch = 0.0;  // residue amplification/attenuation error
    double amp_finite_gain = 0.0; // open-loop gain of the integrators, 0 = ideal
    double sat_rail = 0.45;      // integrator clamp, DAC-referred volts

    void validate() const;
};

/// Cascaded feed-forward integrator loop filter. States are kept referred
/// to the DAC node; the physical amplification by gain_a1 and the matched
/// feed-forward attenuation cancel exactly unless gain_mismatch says
/// otherwise. Feedforward weights are binomial, which yields an NTF of
/// (1 - z^-1)^order with unity out-of-band gain.
struct LoopFilterState {
    std::vector<double> ints;    // integrator states, first stage at [0]
    std::vector<double> weights; // feed-forward weights C(order, j+1)
    double feedforward = 0.0;    // comparator summand for the next conversion
    double last_residue = 0.0;   // amplified residue V_X1 sampled during QNF
    double gain_a1 = 30.0;
    double atten = 1.0 / 30.0;
    double leak = 1.0;           // state retention (finite-gain model)
    double sat_rail = 0.45;
    long clip_events = 0;
    bool clipped_last = false;

    double int1() const { return ints.empty() ? 0.0 : ints[0]; }
    double int2() const { return ints.size() < 2 ? 0.0 : ints[1]; }
};

LoopFilterState make_loop_filter(int order, const NonIdealities& ni);

/// One QNF update: delaying-integrator cascade fed by the residue, then the
/// feed-forward sum for the next conversion. Saturation clips and counts.
void loop_update(LoopFilterState& lf, double residue);

/// MES history registers. pingpong selects which LSB array performs the
/// current conversion's bit trials (and therefore holds the code from two
/// conversions ago, closing the (1 - z^-1)^2 kernel).
struct MesState {
    int d1 = 0; // previous conversion's LSB code
    int d2 = 0; // two conversions ago
    int pingpong = 0;
};

/// Nominal MES offset code: 0, d1, or 2*d1 - d2 for order 0/1/2.
int mes_offset(const MesState& m, int order);

struct ConversionDiag {
    int msb_code = 0;
    int dwa_first = 0;       // first rotated element index used
    double settle_err = 0.0; // accumulated settling perturbation
    double int1 = 0.0;
    double int2 = 0.0;
    double feedforward = 0.0;
    bool filter_clipped = false;
    bool overload = false;
};

struct ConversionResult {
    int code = 0;        // raw N-bit SAR code
    int out_code = 0;    // MES-corrected digital output, offset binary
    double output = 0.0; // out_code centered and scaled to volts
    double residue = 0.0;
    ConversionDiag diag;
};

struct SarResult {
    int code = 0;
    double residue = 0.0;
    double settle_err = 0.0;
    int msb_code = 0;
    bool overload = false;
};

/// Actual (mismatched, trimmed) DAC output voltage for a raw code, using
/// the DWA rotation implied by the array's current pointer.
double dac_voltage(const CapArrayState& a, int lsb_array, int code,
                   const NonIdealities& ni, double vdd);

/// N-bit binary search. The comparator sees the DAC node (sampled value
/// minus DAC voltage plus accumulated settling error) plus the attenuated
/// loop-filter feedforward, offset and a fresh noise draw on every trial.
/// The returned residue is the final DAC-node voltage, feedforward excluded.
SarResult sar_convert(const CapArrayState& arrays, int lsb_array, double vdd,
                      double filter_ff, double v_sampled,
                      const NonIdealities& ni, Rng& rng);

struct Waveform {
    enum class Kind { sine, dc, impulse, samples };
    Kind kind = Kind::sine;
    double amp_dbfs = -3.0;
    double freq_hz = 6500.0;
    bool coherent = true; // snap sine tones onto an analysis bin
    double dc_level = 0.0;
    std::vector<double> samples;

    double value(long n, double fs, double vdd) const;
    void validate(double fs) const;

    /// Copy with the tone moved to the nearest bin of an n_fft-point record,
    /// so the analysis sees it leakage-free. No-op for non-sine kinds or
    /// when coherent snapping is off.
    Waveform snapped(double fs, long n_fft) const;
};

class ModulatorState {
  public:
    ModulatorState(const analytic::DesignParams& p, const NonIdealities& ni,
                   std::uint64_t seed);
    /// Variant with a caller-supplied array (pre-trimmed or hand-built).
    ModulatorState(const analytic::DesignParams& p, const NonIdealities& ni,
                   CapArrayState arrays, std::uint64_t seed);

    ConversionResult convert(double v_in) { return convert_inject(v_in, 0); }

    /// convert() with an error injected at the quantiser output.
    ConversionResult convert_inject(double v_in, int inject_lsb);

    const analytic::DesignParams& params() const { return p_; }
    const NonIdealities& nonideal() const { return ni_; }
    CapArrayState& arrays() { return arrays_; }
    const CapArrayState& arrays() const { return arrays_; }
    LoopFilterState& filter() { return lf_; }
    const LoopFilterState& filter() const { return lf_; }
    const MesState& mes() const { return mes_; }
    Rng& noise_rng() { return rng_; }
    double lsb_volts() const { return lsb_v_; }
    double unit_volts() const { return vu_; }
    double thermal_rms() const { return kt_rms_; }

  private:
    analytic::DesignParams p_;
    NonIdealities ni_;
    CapArrayState arrays_;
    LoopFilterState lf_;
    MesState mes_;
    Rng rng_;
    double lsb_v_;
    double vu_;
    double kt_rms_;
};

struct RunOutput {
    std::vector<int> out_codes;   // MES-corrected stream at fs
    std::vector<double> out_volts;
    std::vector<int> raw_codes;
    long filter_clip_events = 0;
    long overload_events = 0;
    std::vector<ConversionResult> trace;
};

RunOutput run(ModulatorState& st, const Waveform& wf, long n_samples,
              bool trace = false);

/// Unit error injected at the quantiser of an otherwise ideal modulator;
/// returns the output error sequence, which must equal the (1 - z^-1)^M
/// kernel. MES is held off so the probe sees the quantisation loop alone.
std::vector<double> ntf_probe(const analytic::DesignParams& p, int len = 16);

} // namespace nssar::sim
