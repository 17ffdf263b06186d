#include "nssar/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nssar::dsp {

namespace {
constexpr double kPi = std::numbers::pi;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

double to_dbfs(double p, double ref) {
    if (p <= 0.0 || ref <= 0.0) return kFloorDb;
    return std::max(kFloorDb, 10.0 * std::log10(p / ref));
}
} // namespace

void fft_radix2(std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    if (!is_pow2(static_cast<int>(n)))
        throw std::invalid_argument("fft_radix2: size must be a power of two");
    // Bit reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = x[i + k];
                const std::complex<double> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

Spectrum periodogram(std::span<const double> x, Window window, int n_fft,
                     double fs, double full_scale_sine_power) {
    if (!is_pow2(n_fft)) throw std::invalid_argument("periodogram: n_fft must be a power of two");
    if (static_cast<std::size_t>(n_fft) > x.size())
        throw std::invalid_argument("periodogram: n_fft longer than the stream");
    if (fs <= 0) throw std::invalid_argument("periodogram: fs must be > 0");

    std::vector<std::complex<double>> buf(n_fft);
    double u = 0.0; // incoherent window gain, sum w^2
    for (int i = 0; i < n_fft; ++i) {
        double w = 1.0;
        if (window == Window::hann)
            w = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n_fft));
        u += w * w;
        buf[i] = w * x[i];
    }
    fft_radix2(buf);

    Spectrum s;
    s.n_fft = n_fft;
    s.window = window;
    s.fs = fs;
    s.ref_power = full_scale_sine_power;
    const int half = n_fft / 2;
    s.freq_hz.resize(half + 1);
    s.power.resize(half + 1);
    s.power_dbfs.resize(half + 1);
    const double norm = 1.0 / (u * n_fft);
    for (int k = 0; k <= half; ++k) {
        const double mag2 = std::norm(buf[k]);
        const double one_sided = (k == 0 || k == half) ? 1.0 : 2.0;
        s.freq_hz[k] = fs * k / n_fft;
        s.power[k] = one_sided * mag2 * norm;
        s.power_dbfs[k] = to_dbfs(s.power[k], full_scale_sine_power);
    }
    return s;
}

Metrics sndr(const Spectrum& spec, double signal_freq, int osr) {
    if (osr < 1) throw std::invalid_argument("sndr: osr must be >= 1");
    const double edge = spec.fs / (2.0 * osr);
    if (signal_freq <= 0 || signal_freq >= edge)
        throw std::invalid_argument("sndr: signal frequency outside the band");

    const int half = spec.n_fft / 2;
    const int guard = spec.window == Window::hann ? 3 : 0;
    const double binw = spec.bin_hz();
    const int k_edge = std::min(half, static_cast<int>(std::floor(edge / binw + 1e-9)));

    // Locate the signal as the strongest bin near the requested frequency.
    const int k_guess = static_cast<int>(std::lround(signal_freq / binw));
    int k_sig = std::max(1, k_guess);
    for (int k = std::max(1, k_guess - 4); k <= std::min(k_edge, k_guess + 4); ++k)
        if (spec.power[k] > spec.power[k_sig]) k_sig = k;

    const int sig_lo = std::max(0, k_sig - guard);
    const int sig_hi = std::min(half, k_sig + guard);
    double p_sig = 0.0;
    for (int k = sig_lo; k <= sig_hi; ++k) p_sig += spec.power[k];

    double p_noise = 0.0;
    for (int k = guard + 1; k <= k_edge; ++k) {
        if (k >= sig_lo && k <= sig_hi) continue;
        p_noise += spec.power[k];
    }

    // Largest in-band spur: strongest non-signal bin with its leakage cluster.
    int k_spur = -1;
    for (int k = guard + 1; k <= k_edge; ++k) {
        if (k >= sig_lo - guard && k <= sig_hi + guard) continue;
        if (k_spur < 0 || spec.power[k] > spec.power[k_spur]) k_spur = k;
    }
    double p_spur = 0.0;
    if (k_spur >= 0)
        for (int k = std::max(0, k_spur - guard); k <= std::min(half, k_spur + guard); ++k)
            if (k < sig_lo || k > sig_hi) p_spur += spec.power[k];

    Metrics m;
    m.signal_freq_hz = k_sig * binw;
    m.in_band_edge_hz = edge;
    m.signal_power = p_sig;
    m.noise_power = p_noise;
    m.sndr_db = p_noise > 0 ? 10.0 * std::log10(p_sig / p_noise)
                            : std::numeric_limits<double>::infinity();
    m.sfdr_db = p_spur > 0 ? 10.0 * std::log10(p_sig / p_spur)
                           : std::numeric_limits<double>::infinity();
    m.enob_bits = (m.sndr_db - 1.76) / 6.02;
    return m;
}

double fit_slope_db_per_decade(const Spectrum& spec, double f_lo, double f_hi) {
    if (f_lo <= 0 || f_hi <= f_lo)
        throw std::invalid_argument("fit_slope: need 0 < f_lo < f_hi");
    const double binw = spec.bin_hz();
    const int k_lo = std::max(1, static_cast<int>(std::ceil(f_lo / binw)));
    const int k_hi = std::min(spec.n_fft / 2, static_cast<int>(std::floor(f_hi / binw)));
    if (k_hi - k_lo < 8) throw std::invalid_argument("fit_slope: too few bins in range");

    // Log-spaced buckets, linear averaging inside each.
    const int n_buckets = 16;
    std::vector<double> bx, by;
    const double lr = std::log10(static_cast<double>(k_hi) / k_lo);
    for (int b = 0; b < n_buckets; ++b) {
        const int a = static_cast<int>(std::floor(k_lo * std::pow(10.0, lr * b / n_buckets)));
        const int z = static_cast<int>(std::floor(k_lo * std::pow(10.0, lr * (b + 1) / n_buckets)));
        double acc = 0.0;
        int cnt = 0;
        double facc = 0.0;
        for (int k = std::max(k_lo, a); k <= std::min(k_hi, z); ++k) {
            acc += spec.power[k];
            facc += spec.freq_hz[k];
            ++cnt;
        }
        if (cnt == 0 || acc <= 0.0) continue;
        bx.push_back(std::log10(facc / cnt));
        by.push_back(10.0 * std::log10(acc / cnt));
    }
    if (bx.size() < 4) throw std::invalid_argument("fit_slope: degenerate bucketing");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(bx.size());
    for (std::size_t i = 0; i < bx.size(); ++i) {
        sx += bx[i];
        sy += by[i];
        sxx += bx[i] * bx[i];
        sxy += bx[i] * by[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string spectrum_to_csv(const Spectrum& spec) {
    std::ostringstream os;
    os << "freq_hz,power_dbfs\n";
    char buf[64];
    for (std::size_t k = 0; k < spec.freq_hz.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.4f,%.4f", spec.freq_hz[k], spec.power_dbfs[k]);
        os << buf << '\n';
    }
    return os.str();
}

std::string metrics_to_text(const Metrics& m) {
    std::ostringstream os;
    char buf[64];
    auto emit = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        os << key << '=' << buf << '\n';
    };
    emit("sndr_db", m.sndr_db);
    emit("sfdr_db", m.sfdr_db);
    emit("enob_bits", m.enob_bits);
    if (m.fom_s_db) emit("fom_s_db", *m.fom_s_db);
    return os.str();
}

} // namespace nssar::dsp
