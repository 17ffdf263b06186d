#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "nssar/modulator.hpp"
#include "nssar/spectrum.hpp"

using namespace nssar;
using namespace nssar::sim;

namespace {

analytic::DesignParams base_params() {
    analytic::DesignParams p;
    p.msb_bits = 4;
    return p;
}

NonIdealities all_off() {
    NonIdealities ni;
    ni.settle_tau = std::numeric_limits<double>::infinity();
    ni.thermal_noise = false;
    ni.mismatch_enabled = false;
    ni.cmp_noise_rms = 0.0;
    ni.cmp_offset = 0.0;
    ni.mes_order = 0;
    return ni;
}

// Straightforward error-feedback reference: y = v + 2 r[n-1] - r[n-2] with a
// plain floor quantizer. Structurally unlike the integrator realisation, but
// both implement the same (1 - z^-1)^2 shaping.
struct RefDeltaSigma {
    int n_bits;
    double vdd;
    double r1 = 0, r2 = 0;
    int convert(double v) {
        const double lsb = vdd * std::exp2(-n_bits);
        const double y = v + 2 * r1 - r2;
        int c = static_cast<int>(std::floor((y + 0.5 * vdd) / lsb));
        c = std::clamp(c, 0, (1 << n_bits) - 1);
        const double r = y - ((c - (1 << (n_bits - 1))) * lsb);
        r2 = r1;
        r1 = r;
        return c;
    }
};

} // namespace

TEST_CASE("ideal conversion of zero lands on mid-code") {
    ModulatorState st(base_params(), all_off(), 1);
    ConversionResult r = st.convert(0.0);
    CHECK(r.code == 512);
    CHECK(std::abs(r.residue) <= st.lsb_volts() / 2);
    CHECK(r.output == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("ideal conversion quantises exactly") {
    analytic::DesignParams p = base_params();
    ModulatorState st(p, all_off(), 1);
    const double v = 3.0 / 8.0 * (p.vdd / 2.0); // +3/8 of full scale
    ConversionResult r = st.convert(v);
    const double lsb = st.lsb_volts();
    const int expect = static_cast<int>(std::lround(v / lsb)) + 512;
    CHECK(std::abs(r.code - expect) <= 1);
    // Residue is exactly the sampled value minus the selected DAC level.
    const double dac = (r.code - 512) * lsb;
    CHECK(r.residue == doctest::Approx(v - dac).epsilon(1e-12));
    CHECK(std::abs(r.residue) < lsb);
}

TEST_CASE("loop_update: zero residues keep zero state") {
    LoopFilterState lf = make_loop_filter(2, all_off());
    for (int i = 0; i < 10; ++i) loop_update(lf, 0.0);
    CHECK(lf.int1() == 0.0);
    CHECK(lf.int2() == 0.0);
    CHECK(lf.feedforward == 0.0);
}

TEST_CASE("loop_update: unit residue impulse gives feedforward 2,3,4,...") {
    LoopFilterState lf = make_loop_filter(2, all_off());
    lf.sat_rail = 100.0;
    loop_update(lf, 1.0);
    CHECK(lf.feedforward == doctest::Approx(2.0));
    loop_update(lf, 0.0);
    CHECK(lf.feedforward == doctest::Approx(3.0));
    loop_update(lf, 0.0);
    CHECK(lf.feedforward == doctest::Approx(4.0));
    loop_update(lf, 0.0);
    CHECK(lf.feedforward == doctest::Approx(5.0));
}

TEST_CASE("loop_update clips at the rail and records it") {
    NonIdealities ni = all_off();
    ni.sat_rail = 0.1;
    LoopFilterState lf = make_loop_filter(2, ni);
    loop_update(lf, 0.5);
    CHECK(lf.int1() == 0.1);
    CHECK(lf.clipped_last);
    CHECK(lf.clip_events == 1);
    CHECK_THROWS_AS(loop_update(lf, std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
}

TEST_CASE("ntf_probe returns the binomial kernels") {
    analytic::DesignParams p = base_params();
    p.ns_order = 2;
    std::vector<double> h2 = ntf_probe(p, 8);
    REQUIRE(h2.size() == 8);
    CHECK(std::abs(h2[0] - 1.0) < 1e-9);
    CHECK(std::abs(h2[1] + 2.0) < 1e-9);
    CHECK(std::abs(h2[2] - 1.0) < 1e-9);
    for (int i = 3; i < 8; ++i) CHECK(std::abs(h2[i]) < 1e-9);

    p.ns_order = 1;
    std::vector<double> h1 = ntf_probe(p, 5);
    CHECK(std::abs(h1[0] - 1.0) < 1e-9);
    CHECK(std::abs(h1[1] + 1.0) < 1e-9);
    CHECK(std::abs(h1[2]) < 1e-9);

    p.ns_order = 0;
    std::vector<double> h0 = ntf_probe(p, 4);
    CHECK(std::abs(h0[0] - 1.0) < 1e-9);
    CHECK(std::abs(h0[1]) < 1e-9);
}

TEST_CASE("in-band shaping factor at OSR 16, M 2") {
    // 10 log10(pi^4 / (5 * 16^5)) = -47.3097 dB
    const double f = analytic::shaping_factor(2, 16);
    CHECK(10.0 * std::log10(f) == doctest::Approx(-47.3097).epsilon(1e-4));
}

TEST_CASE("per-conversion settling error power tracks the settling budget") {
    analytic::DesignParams p = base_params();
    NonIdealities ni = all_off();
    ni.settle_tau = 5.0;
    ModulatorState st(p, ni, 21);
    Rng drive(3);

    const int n = 10000;
    double s2 = 0;
    for (int i = 0; i < n; ++i) {
        ConversionResult r = st.convert(0.8 * (p.vdd / 2) * drive.uniform_pm());
        s2 += r.diag.settle_err * r.diag.settle_err;
    }
    const double measured = s2 / n;
    // Budget: vdd^2 exp(-3 tau) / 12, the settling share of the shaped
    // error bracket. The model must land within 3 dB.
    const double budget = p.vdd * p.vdd * std::exp(-3.0 * ni.settle_tau) / 12.0;
    const double ratio_db = 10.0 * std::log10(measured / budget);
    CHECK(std::abs(ratio_db) < 3.0);

    // And the power must scale as exp(-3 tau): one tau step is -13 dB.
    NonIdealities ni6 = ni;
    ni6.settle_tau = 6.0;
    ModulatorState st6(p, ni6, 21);
    Rng drive6(3);
    double s26 = 0;
    for (int i = 0; i < n; ++i) {
        ConversionResult r = st6.convert(0.8 * (p.vdd / 2) * drive6.uniform_pm());
        s26 += r.diag.settle_err * r.diag.settle_err;
    }
    const double step_db = 10.0 * std::log10(s2 / s26);
    CHECK(step_db == doctest::Approx(30.0 * std::log10(std::exp(1.0))).epsilon(0.05));
}

TEST_CASE("convert composes sar_convert and loop_update") {
    analytic::DesignParams p = base_params();
    NonIdealities ni = all_off();
    ModulatorState st(p, ni, 9);

    // Preset the filter with two updates, then convert once and replay the
    // pieces by hand.
    st.filter().sat_rail = 10.0;
    loop_update(st.filter(), 0.01);
    loop_update(st.filter(), -0.004);

    LoopFilterState lf_copy = st.filter();
    CapArrayState arr_copy = st.arrays();
    const double v = 0.123;

    Rng scratch(0); // ideal path draws nothing
    SarResult manual = sar_convert(arr_copy, st.mes().pingpong, p.vdd,
                                   lf_copy.feedforward, v, ni, scratch);
    loop_update(lf_copy, manual.residue);

    ConversionResult r = st.convert(v);
    CHECK(r.code == manual.code);
    CHECK(r.residue == doctest::Approx(manual.residue).epsilon(1e-15));
    CHECK(st.filter().int1() == doctest::Approx(lf_copy.int1()).epsilon(1e-15));
    CHECK(st.filter().int2() == doctest::Approx(lf_copy.int2()).epsilon(1e-15));
}

TEST_CASE("dwa pointer advances by the msb code and usage stays balanced") {
    analytic::DesignParams p = base_params();
    NonIdealities ni = all_off();
    ni.thermal_noise = true; // make the codes move around
    ModulatorState st(p, ni, 77);
    Waveform wf;
    wf.amp_dbfs = -3;
    wf.freq_hz = 6500;
    const int n_el = st.arrays().n_msb_elems();
    std::vector<long> counts(n_el, 0);
    int ptr = st.arrays().dwa_pointer;
    for (int i = 0; i < 2000; ++i) {
        ConversionResult r = st.convert(wf.value(i, p.fs, p.vdd));
        CHECK(r.diag.dwa_first == ptr);
        for (int k = 0; k < r.diag.msb_code; ++k) ++counts[(ptr + k) % n_el];
        ptr = (ptr + r.diag.msb_code) % n_el;
        CHECK(st.arrays().dwa_pointer == ptr);
    }
    const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*mx - *mn <= 1);
}

TEST_CASE("finite amplifier gain and gain mismatch degrade gracefully") {
    analytic::DesignParams p = base_params();
    NonIdealities ni = all_off();
    ni.amp_finite_gain = 1000.0;
    LoopFilterState lf = make_loop_filter(2, ni);
    CHECK(lf.leak == doctest::Approx(1000.0 / 1001.0).epsilon(1e-12));

    ni.gain_mismatch = 0.02;
    ModulatorState st(p, ni, 13);
    Waveform wf;
    wf = wf.snapped(p.fs, 8192);
    RunOutput out = run(st, wf, 8192);
    CHECK(out.filter_clip_events == 0);
    for (double v : out.out_volts) CHECK(std::isfinite(v));
    dsp::Spectrum spec = dsp::periodogram(out.out_volts, dsp::Window::hann, 8192,
                                          p.fs, analytic::full_scale_signal_power(p.vdd));
    dsp::Metrics m = dsp::sndr(spec, wf.freq_hz, p.osr);
    CHECK(m.sndr_db > 80.0); // imperfect but still a working shaper
}

TEST_CASE("mes_offset difference equations") {
    MesState m;
    m.d1 = 17;
    m.d2 = 40;
    CHECK(mes_offset(m, 0) == 0);
    CHECK(mes_offset(m, 1) == 17);
    CHECK(mes_offset(m, 2) == 2 * 17 - 40);
    CHECK_THROWS_AS(mes_offset(m, 3), std::invalid_argument);
}

TEST_CASE("identical config and seed give bit-identical streams") {
    analytic::DesignParams p = base_params();
    NonIdealities ni; // defaults: everything on
    ni.cmp_noise_rms = 4.5e-6;
    Waveform wf;
    ModulatorState a(p, ni, 1234), b(p, ni, 1234), c(p, ni, 1235);
    RunOutput ra = run(a, wf, 2048);
    RunOutput rb = run(b, wf, 2048);
    RunOutput rc = run(c, wf, 2048);
    CHECK(ra.out_codes == rb.out_codes);
    CHECK(ra.out_codes != rc.out_codes);
}

TEST_CASE("ideal modulator matches the error-feedback reference exactly") {
    analytic::DesignParams p = base_params();
    NonIdealities ni = all_off();
    ModulatorState st(p, ni, 5);
    RefDeltaSigma ref{p.sar_bits, p.vdd};

    Waveform wf;
    wf.amp_dbfs = -3.0;
    wf.freq_hz = 6500.0;
    int diffs = 0;
    for (int i = 0; i < 4096; ++i) {
        const double v = wf.value(i, p.fs, p.vdd);
        const int mine = st.convert(v).out_code;
        const int theirs = ref.convert(v);
        if (mine != theirs) ++diffs;
    }
    CHECK(diffs == 0);
}

TEST_CASE("measured in-band quantisation noise tracks the analytic budget") {
    for (int m : {1, 2}) {
        for (int osr : {8, 16, 32}) {
            for (int n_bits : {8, 10}) {
                analytic::DesignParams p = base_params();
                p.ns_order = m;
                p.osr = osr;
                p.sar_bits = n_bits;
                p.settle_tau = std::numeric_limits<double>::infinity();
                NonIdealities ni = all_off();
                ModulatorState st(p, ni, 42);
                Waveform wf;
                wf.amp_dbfs = -3.0;
                wf.freq_hz = 5000.0;
                wf = wf.snapped(p.fs, 16384); // leakage-free measurement
                RunOutput out = run(st, wf, 16384);
                dsp::Spectrum spec = dsp::periodogram(
                    out.out_volts, dsp::Window::rectangular, 16384, p.fs,
                    analytic::full_scale_signal_power(p.vdd));
                dsp::Metrics met = dsp::sndr(spec, wf.freq_hz, osr);
                const double predicted = analytic::qnp_eval(p);
                const double ratio_db = 10.0 * std::log10(met.noise_power / predicted);
                INFO("m=", m, " osr=", osr, " n=", n_bits, " ratio_db=", ratio_db);
                CHECK(std::abs(ratio_db) < 3.0);
            }
        }
    }
}

TEST_CASE("first-order MES cancels DC mismatch error") {
    analytic::DesignParams p = base_params();
    NonIdealities ni = all_off();
    ni.mismatch_enabled = true;

    CapArrayState lsb_only = build_array(4, 10, 0.005, 31);
    std::fill(lsb_only.msb_err.begin(), lsb_only.msb_err.end(), 0.0);

    const double dc = 0.3;
    const int n = 8192;
    auto mean_err = [&](int e) {
        NonIdealities nie = ni;
        nie.mes_order = e;
        ModulatorState mm(p, nie, lsb_only, 7);
        ModulatorState id(p, all_off(), 7); // ideal DAC, same loop
        double acc = 0;
        for (int i = 0; i < n; ++i)
            acc += mm.convert(dc).output - id.convert(dc).output;
        return acc / n;
    };
    const double e1 = std::abs(mean_err(1));
    const double e0 = std::abs(mean_err(0));
    CHECK(e1 < 2e-5);
    CHECK(e1 < e0 / 4);
}

TEST_CASE("overload saturates the code and flags it") {
    analytic::DesignParams p = base_params();
    NonIdealities ni = all_off();
    ModulatorState st(p, ni, 3);
    ConversionResult r = st.convert(0.75 * p.vdd); // beyond +FS/2
    CHECK(r.code == 1023);
    CHECK(r.diag.overload);
}

TEST_CASE("filter states stay inside the rail at -1 dBFS") {
    analytic::DesignParams p = base_params();
    NonIdealities ni; // full non-idealities
    ni.cmp_noise_rms = 4.5e-6;
    ModulatorState st(p, ni, 2024);
    Waveform wf;
    wf.amp_dbfs = -1.0;
    wf.freq_hz = 6500.0;
    RunOutput out = run(st, wf, 1 << 20);
    CHECK(out.filter_clip_events == 0);
}

TEST_CASE("zero input leaves a tone-free idle floor") {
    analytic::DesignParams p = base_params();
    NonIdealities ni;
    ni.cmp_noise_rms = 4.5e-6;
    ModulatorState st(p, ni, 11);
    Waveform wf;
    wf.amp_dbfs = -400.0; // effectively zero amplitude
    RunOutput out = run(st, wf, 16384);
    dsp::Spectrum spec =
        dsp::periodogram(out.out_volts, dsp::Window::hann, 16384, p.fs,
                         analytic::full_scale_signal_power(p.vdd));
    // No in-band bin pokes far above the local noise floor.
    const int edge = 16384 / (2 * p.osr);
    std::vector<double> band(spec.power.begin() + 4, spec.power.begin() + edge);
    std::vector<double> sorted = band;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double peak = *std::max_element(band.begin(), band.end());
    CHECK(10.0 * std::log10(peak / median) < 18.0);
}
