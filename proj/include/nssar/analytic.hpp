/*
 * Closed-form noise-budget models for the noise-shaping SAR converter and
 * the design-space search built on top of them. The three in-band noise
 * powers (sampling, quantisation + settling, DAC mismatch) are evaluated
 * from the full parameter set, combined into an SNDR/ENOB estimate, swept
 * against the oversampling ratio, and ranked by a Schreier figure of merit
 * under a parametric power model.
 */
#pragma once

#include <string>
#include <vector>

#include "nssar/parallel.hpp"

namespace nssar::analytic {

inline constexpr double kBoltzmann = 1.380649e-23; // J/K

/// Full analytic parameter set. Defaults are the reference design point
/// (see the cli module for the simulator-facing defaults, which use
/// msb_bits = 4 to match the 15-element calibrated MSB array).
struct DesignParams {
    double c_total = 50e-12;  // total sampling capacitance C_T, farads
    int osr = 16;             // oversampling ratio
    int sar_bits = 10;        // SAR resolution N, bits
    int ns_order = 2;         // loop-filter order M
    double settle_tau = 5.0;  // DAC settling time constants per bit trial
    int msb_bits = 5;         // thermometer MSB DAC resolution K, bits
    int cal_bits = 4;         // effective calibration bits D
    int mes_order = 2;        // mismatch-error-shaping order E in {0,1,2}
    double cap_sigma = 0.005; // relative unit-capacitor standard deviation
    double vdd = 1.8;         // reference/supply, volts
    double temperature = 300; // kelvin
    double fs = 500e3;        // conversion rate, hertz

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct NoiseBudget {
    double snp = 0;          // in-band sampling noise power, V^2
    double qnp = 0;          // in-band quantisation + settling power, V^2
    double mnp = 0;          // in-band DAC mismatch power, V^2
    double signal_power = 0; // full-scale sine power, V^2
    double sndr_db = 0;
    double enob_bits = 0;
    double total_noise() const { return snp + qnp + mnp; }
};

struct SweepVariant {
    std::string name;
    DesignParams params; // osr is overwritten per sweep point
};

struct SweepCurve {
    std::vector<int> osr;
    std::vector<std::string> names;
    std::vector<std::vector<double>> bits; // bits[variant][osr index]
};

/// In-band sampling noise power (kT/C with the integrator correction).
double snp_eval(const DesignParams& p);

/// In-band quantisation + settling noise power after M-th order shaping.
double qnp_eval(const DesignParams& p);

/// In-band DAC mismatch power: calibrated DWA MSB section plus
/// MES-shaped LSB section.
double mnp_eval(const DesignParams& p);

/// Mean in-band gain of an order-th order (1-z^-1) shaper relative to the
/// unshaped error power: pi^(2*order) / ((1+2*order) * osr^(1+2*order)).
double shaping_factor(int order, int osr);

/// Full-scale sine power used as the SNDR reference: vdd^2 / 8.
double full_scale_signal_power(double vdd);

/// Combine the three evaluators into an SNDR/ENOB estimate.
NoiseBudget precision(const DesignParams& p);

double enob_from_sndr(double sndr_db);

/// Schreier figure of merit, dB. Throws std::domain_error on
/// non-positive bandwidth or power.
double fom_s(double sndr_db, double bw_hz, double power_w);

/// Precision-vs-OSR curves, one series per variant. Grid points may be
/// evaluated in parallel; results are merged in deterministic grid order.
SweepCurve sweep(const std::vector<int>& osr_list,
                 const std::vector<SweepVariant>& variants,
                 ExecPolicy policy = ExecPolicy::serial);

/// Serialize a curve as CSV: header `osr,<name>...`, bits to 4 decimals.
std::string sweep_to_csv(const SweepCurve& curve);

/// Parametric power estimator: array switching + reference driving plus
/// amplifier bias scaled by the first-stage share.
struct PowerModel {
    double alpha = 4.0;     // C*V^2*fs multiplier
    double beta = 1.0;      // amplifier term multiplier
    double i_bias = 1e-6;   // first-stage bias current, amps
    double a1_share = 0.8;  // fraction of amplifier power taken by A1
    double estimate(const DesignParams& p) const;
};

struct SearchSpace {
    DesignParams base;
    std::vector<double> c_total;
    std::vector<int> osr;
    std::vector<int> ns_order;
    std::vector<double> settle_tau;
    std::vector<int> msb_bits;
    std::vector<int> cal_bits;
    std::vector<int> mes_order;
    std::size_t size() const;
};

struct RankedConfig {
    DesignParams params;
    NoiseBudget budget;
    double power_w = 0;
    double bw_hz = 0;
    double fom_db = 0;
};

struct OptimizeResult {
    bool feasible = false;
    std::vector<RankedConfig> ranked; // best FoM first
};

/// Exhaustive grid evaluation; configs meeting target_bits are ranked by
/// estimated FoM. Deterministic: ties break by (c_total, osr, ns_order)
/// ascending. An empty feasible set is reported, not thrown.
OptimizeResult optimize_config(const SearchSpace& space, const PowerModel& pm,
                               double target_bits,
                               ExecPolicy policy = ExecPolicy::serial);

/// Preset sweeps for the precision trade-off curves. Each preset isolates
/// one noise source by pushing the others far below it.
SweepCurve preset_sweep(const std::string& name,
                        ExecPolicy policy = ExecPolicy::serial);

} // namespace nssar::analytic
