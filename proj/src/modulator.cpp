#include "nssar/modulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nssar::sim {

namespace {
constexpr int kMaxMsbBits = 8;

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}
} // namespace

void NonIdealities::validate() const {
    if (settle_tau < 0) throw std::invalid_argument("NonIdealities.settle_tau: must be >= 0");
    if (cmp_noise_rms < 0) throw std::invalid_argument("NonIdealities.cmp_noise_rms: must be >= 0");
    if (mes_order < 0 || mes_order > 2)
        throw std::invalid_argument("NonIdealities.mes_order: must be in {0,1,2}");
    if (amp_finite_gain < 0)
        throw std::invalid_argument("NonIdealities.amp_finite_gain: must be >= 0");
    if (sat_rail <= 0) throw std::invalid_argument("NonIdealities.sat_rail: must be > 0");
}

LoopFilterState make_loop_filter(int order, const NonIdealities& ni) {
    LoopFilterState lf;
    lf.ints.assign(order, 0.0);
    lf.weights.resize(order);
    for (int j = 0; j < order; ++j) lf.weights[j] = binom(order, j + 1);
    lf.sat_rail = ni.sat_rail;
    lf.leak = ni.amp_finite_gain > 0 ? ni.amp_finite_gain / (ni.amp_finite_gain + 1.0) : 1.0;
    return lf;
}

void loop_update(LoopFilterState& lf, double residue) {
    if (!std::isfinite(residue))
        throw std::invalid_argument("loop_update: residue must be finite");
    lf.last_residue = lf.gain_a1 * residue;
    lf.clipped_last = false;
    const int m = static_cast<int>(lf.ints.size());
    // int_j picks up the previous int_{j-1}; the first stage picks up the
    // residue directly. Updating from the back keeps the one-sample delay.
    for (int j = m - 1; j >= 1; --j) lf.ints[j] = lf.leak * lf.ints[j] + lf.ints[j - 1];
    if (m > 0) lf.ints[0] = lf.leak * lf.ints[0] + residue;
    for (auto& s : lf.ints) {
        if (s > lf.sat_rail) {
            s = lf.sat_rail;
            lf.clipped_last = true;
        } else if (s < -lf.sat_rail) {
            s = -lf.sat_rail;
            lf.clipped_last = true;
        }
    }
    if (lf.clipped_last) ++lf.clip_events;
    double ff = 0.0;
    for (int j = 0; j < m; ++j) ff += lf.weights[j] * lf.ints[j];
    lf.feedforward = ff;
}

int mes_offset(const MesState& m, int order) {
    switch (order) {
        case 0: return 0;
        case 1: return m.d1;
        case 2: return 2 * m.d1 - m.d2;
        default: throw std::invalid_argument("mes_offset: order must be in {0,1,2}");
    }
}

double dac_voltage(const CapArrayState& a, int lsb_array, int code,
                   const NonIdealities& ni, double vdd) {
    const int n = a.sar_bits;
    const int nlsb = a.n_lsb_bits();
    const double lsb_v = vdd * std::exp2(-n);
    const double vu = vdd * std::exp2(-a.msb_bits);
    const int n_el = a.n_msb_elems();
    const int m = code >> nlsb;
    const int l = code & ((1 << nlsb) - 1);

    double v = 0.0;
    const int start = ni.dwa_enabled ? a.dwa_pointer : 0;
    for (int i = 0; i < m; ++i) {
        const int idx = (start + i) % n_el;
        v += vu * (1.0 + (ni.mismatch_enabled ? a.effective_err(idx) : 0.0));
    }
    for (int j = 0; j < nlsb; ++j)
        if (l & (1 << j))
            v += lsb_v * static_cast<double>(1 << j) *
                 (1.0 + (ni.mismatch_enabled ? a.lsb_err[lsb_array][j] : 0.0));
    return v - 0.5 * vdd;
}

SarResult sar_convert(const CapArrayState& arrays, int lsb_array, double vdd,
                      double filter_ff, double v_sampled,
                      const NonIdealities& ni, Rng& rng) {
    const int n = arrays.sar_bits;
    const int nlsb = arrays.n_lsb_bits();
    const int n_el = arrays.n_msb_elems();
    const double lsb_v = vdd * std::exp2(-n);
    const double vu = vdd * std::exp2(-arrays.msb_bits);

    // Rotated effective MSB weights, prefix-summed so a bit trial is O(1).
    double pref[(1 << kMaxMsbBits)];
    pref[0] = 0.0;
    const int start = ni.dwa_enabled ? arrays.dwa_pointer : 0;
    for (int i = 0; i < n_el; ++i) {
        const int idx = (start + i) % n_el;
        const double w = 1.0 + (ni.mismatch_enabled ? arrays.effective_err(idx) : 0.0);
        pref[i + 1] = pref[i] + w;
    }

    double lsb_w[64];
    for (int j = 0; j < nlsb; ++j)
        lsb_w[j] = lsb_v * static_cast<double>(1 << j) *
                   (1.0 + (ni.mismatch_enabled ? arrays.lsb_err[lsb_array][j] : 0.0));

    // Settling transient per trial: the voltage step of the bit under test
    // scaled by exp(-1.5 tau), so the per-conversion error power tracks the
    // exp(-3 tau) settling budget. The transient rides on the comparator
    // input and accumulates across trials, corrupting decisions; by the QNF
    // phase the held DAC has settled, so the fed-back residue reflects the
    // corrupted code against the settled levels and the error stays inside
    // the shaped loop.
    const double settle_amp =
        std::isinf(ni.settle_tau) ? 0.0 : std::exp(-1.5 * ni.settle_tau);

    int code = 0;
    double dac_acc = -0.5 * vdd;
    double settle_acc = 0.0;
    for (int b = n - 1; b >= 0; --b) {
        const int try_code = code | (1 << b);
        double add;
        if (b >= nlsb) {
            const int m_cur = code >> nlsb;
            const int m_try = try_code >> nlsb;
            add = vu * (pref[m_try] - pref[m_cur]);
        } else {
            add = lsb_w[b];
        }
        if (settle_amp > 0.0)
            settle_acc += vdd * std::exp2(b - n) * settle_amp * rng.uniform_pm();
        const double node = v_sampled - (dac_acc + add) + settle_acc;
        double cmp = node + filter_ff + ni.cmp_offset;
        if (ni.cmp_noise_rms > 0.0) cmp += ni.cmp_noise_rms * rng.gauss();
        if (cmp >= 0.0) {
            code = try_code;
            dac_acc += add;
        }
    }

    SarResult r;
    r.code = code;
    r.residue = v_sampled - dac_acc;
    r.settle_err = settle_acc;
    r.msb_code = code >> nlsb;
    r.overload = (code == 0 || code == (1 << n) - 1) && std::abs(r.residue) > lsb_v;
    return r;
}

double Waveform::value(long n, double fs, double vdd) const {
    switch (kind) {
        case Kind::sine: {
            const double amp = 0.5 * vdd * std::pow(10.0, amp_dbfs / 20.0);
            return amp * std::sin(2.0 * std::numbers::pi * freq_hz * n / fs);
        }
        case Kind::dc: return dc_level;
        case Kind::impulse:
            return n == 0 ? 0.5 * vdd * std::pow(10.0, amp_dbfs / 20.0) : 0.0;
        case Kind::samples:
            return n < static_cast<long>(samples.size()) ? samples[n] : 0.0;
    }
    return 0.0;
}

void Waveform::validate(double fs) const {
    if (kind == Kind::sine && freq_hz >= fs / 2.0)
        throw std::invalid_argument("waveform: frequency must be below fs/2");
    if (kind == Kind::sine && freq_hz <= 0)
        throw std::invalid_argument("waveform: frequency must be > 0");
}

Waveform Waveform::snapped(double fs, long n_fft) const {
    Waveform w = *this;
    if (kind != Kind::sine || !coherent || n_fft < 2) return w;
    const double bin = std::max(1.0, std::round(freq_hz * n_fft / fs));
    w.freq_hz = bin * fs / n_fft;
    return w;
}

ModulatorState::ModulatorState(const analytic::DesignParams& p,
                               const NonIdealities& ni, std::uint64_t seed)
    : ModulatorState(p, ni,
                     build_array(p.msb_bits, p.sar_bits, p.cap_sigma,
                                 Rng::substream(seed, 1).bits()),
                     seed) {}

ModulatorState::ModulatorState(const analytic::DesignParams& p,
                               const NonIdealities& ni, CapArrayState arrays,
                               std::uint64_t seed)
    : p_(p), ni_(ni), arrays_(std::move(arrays)),
      rng_(Rng::substream(seed, 2)) {
    p_.validate();
    ni_.validate();
    if (p_.msb_bits > kMaxMsbBits)
        throw std::invalid_argument("ModulatorState: msb_bits > 8 not supported");
    if (p_.msb_bits < 1)
        throw std::invalid_argument("ModulatorState: msb_bits must be >= 1");
    lf_ = make_loop_filter(p_.ns_order, ni_);
    lsb_v_ = p_.vdd * std::exp2(-p_.sar_bits);
    vu_ = p_.vdd * std::exp2(-p_.msb_bits);
    kt_rms_ = std::sqrt(analytic::kBoltzmann * p_.temperature / p_.c_total);
}

ConversionResult ModulatorState::convert_inject(double v_in, int inject_lsb) {
    const int nlsb = arrays_.n_lsb_bits();
    const int lsb_mask = (1 << nlsb) - 1;
    const int half = nlsb >= 1 ? 1 << (nlsb - 1) : 0;
    const int e = ni_.mes_order;

    // SMP: sample the input (with one kT/C draw) and preset the MES offset
    // on the ping-pong LSB arrays. The offset is recentred by half the LSB
    // span with a mismatch-free constant so it stays bipolar.
    double v_s = v_in;
    if (ni_.thermal_noise) v_s += kt_rms_ * rng_.gauss();

    const int cur = mes_.pingpong;
    const int prev = cur ^ 1;
    int off_nom = 0;
    double off_act = 0.0;
    auto lsb_value = [&](int arr, int code) {
        double v = 0.0;
        for (int j = 0; j < nlsb; ++j)
            if (code & (1 << j))
                v += lsb_v_ * static_cast<double>(1 << j) *
                     (1.0 + (ni_.mismatch_enabled ? arrays_.lsb_err[arr][j] : 0.0));
        return v;
    };
    if (e == 1) {
        off_nom = mes_offset(mes_, 1) - half;
        off_act = lsb_value(prev, mes_.d1) - half * lsb_v_;
    } else if (e == 2) {
        off_nom = mes_offset(mes_, 2) - half;
        off_act = 2.0 * lsb_value(prev, mes_.d1) - lsb_value(cur, mes_.d2) -
                  half * lsb_v_;
    }
    const double v_eff = v_s + off_act;

    // SAR: binary search with the cached feedforward at the comparator.
    SarResult sar = sar_convert(arrays_, cur, p_.vdd, lf_.feedforward, v_eff,
                                ni_, rng_);
    int code = sar.code;
    double residue = sar.residue;
    if (inject_lsb != 0) {
        code = std::clamp(code + inject_lsb, 0, (1 << p_.sar_bits) - 1);
        residue = v_eff - dac_voltage(arrays_, cur, code, ni_, p_.vdd);
    }

    // QNF: the residue left on the DAC node (amplified and re-attenuated by
    // the matched gain pair) charges the integrator cascade; the loop-filter
    // resampling contributes the second kT/C draw.
    double r_f = residue * (1.0 + ni_.gain_mismatch);
    if (ni_.thermal_noise) r_f += kt_rms_ * rng_.gauss();
    loop_update(lf_, r_f);

    ConversionResult res;
    res.code = code;
    res.out_code = code - off_nom;
    res.output = (res.out_code - (1 << (p_.sar_bits - 1))) * lsb_v_;
    res.residue = residue;
    res.diag.msb_code = code >> nlsb;
    res.diag.dwa_first = ni_.dwa_enabled ? arrays_.dwa_pointer : 0;
    res.diag.settle_err = sar.settle_err;
    res.diag.int1 = lf_.int1();
    res.diag.int2 = lf_.int2();
    res.diag.feedforward = lf_.feedforward;
    res.diag.filter_clipped = lf_.clipped_last;
    res.diag.overload = sar.overload;

    // Feedback bookkeeping for the next conversion.
    mes_.d2 = mes_.d1;
    mes_.d1 = code & lsb_mask;
    mes_.pingpong ^= 1;
    if (ni_.dwa_enabled)
        arrays_.dwa_pointer =
            (arrays_.dwa_pointer + res.diag.msb_code) % arrays_.n_msb_elems();
    return res;
}

RunOutput run(ModulatorState& st, const Waveform& wf, long n_samples, bool trace) {
    if (n_samples < 1) throw std::invalid_argument("run: n_samples must be >= 1");
    wf.validate(st.params().fs);

    RunOutput out;
    out.out_codes.reserve(n_samples);
    out.out_volts.reserve(n_samples);
    out.raw_codes.reserve(n_samples);
    if (trace) out.trace.reserve(n_samples);
    for (long i = 0; i < n_samples; ++i) {
        const double v = wf.value(i, st.params().fs, st.params().vdd);
        ConversionResult r = st.convert(v);
        out.out_codes.push_back(r.out_code);
        out.out_volts.push_back(r.output);
        out.raw_codes.push_back(r.code);
        if (r.diag.filter_clipped) ++out.filter_clip_events;
        if (r.diag.overload) ++out.overload_events;
        if (trace) out.trace.push_back(r);
    }
    return out;
}

std::vector<double> ntf_probe(const analytic::DesignParams& p, int len) {
    NonIdealities off;
    off.settle_tau = std::numeric_limits<double>::infinity();
    off.thermal_noise = false;
    off.mismatch_enabled = false;
    off.cmp_noise_rms = 0.0;
    off.mes_order = 0;

    // Normalised probe: a dyadic reference keeps every DAC level exactly
    // representable, and the half-LSB comparator bias keeps the zero input
    // off the quantiser thresholds, so the kernel comes out exact.
    analytic::DesignParams pn = p;
    pn.vdd = 2.0;
    off.cmp_offset = pn.vdd * std::exp2(-pn.sar_bits) / 2.0;

    ModulatorState clean(pn, off, 0);
    ModulatorState probe(pn, off, 0);
    std::vector<double> diff(len);
    for (int i = 0; i < len; ++i) {
        const int c0 = clean.convert(0.0).out_code;
        const int c1 = probe.convert_inject(0.0, i == 0 ? 1 : 0).out_code;
        diff[i] = static_cast<double>(c1 - c0);
    }
    return diff;
}

} // namespace nssar::sim
