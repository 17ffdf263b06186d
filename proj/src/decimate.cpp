#include "nssar/decimate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace nssar::dsp {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kEqHalfTaps = 12; // 25-tap equaliser for the single-stage path
constexpr int kLpHalfTaps = 56; // 113-tap lowpass for the final halving stage

// sinc^order amplitude response at normalized output frequency
// u = f / (output Nyquist), unity at DC.
double sinc_response(double u, int osr, int order) {
    if (u == 0.0) return 1.0;
    const double num = std::sin(0.5 * kPi * u);
    const double den = osr * std::sin(0.5 * kPi * u / osr);
    return std::pow(num / den, order);
}

// Solve A x = b in place, partial pivoting; A is n x n row-major.
void solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        const double d = a[col * n + col];
        if (d == 0.0) throw std::runtime_error("decimator fit: singular system");
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / d;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * b[c];
        b[r] = acc / a[r * n + r];
    }
}

// Symmetric FIR from half-tap coefficients a_0..a_L via least squares over
// accumulated normal equations; rows supplied by the caller.
struct NormalEq {
    int nu;
    std::vector<double> ata, atb;
    explicit NormalEq(int n) : nu(n), ata(n * n, 0.0), atb(n, 0.0) {}
    void add(const std::vector<double>& phi, double target, double weight) {
        for (int r = 0; r < nu; ++r) {
            for (int c = 0; c < nu; ++c) ata[r * nu + c] += weight * phi[r] * phi[c];
            atb[r] += weight * phi[r] * target;
        }
    }
    std::vector<double> solve() {
        solve_dense(ata, atb, nu);
        return atb;
    }
};

std::vector<double> cos_basis(int nu, double u) {
    std::vector<double> phi(nu);
    for (int k = 0; k < nu; ++k) phi[k] = k == 0 ? 1.0 : 2.0 * std::cos(kPi * u * k);
    return phi;
}

std::vector<double> expand_symmetric(const std::vector<double>& a) {
    const int half = static_cast<int>(a.size()) - 1;
    std::vector<double> taps(2 * half + 1);
    for (int k = -half; k <= half; ++k) taps[k + half] = a[std::abs(k)];
    return taps;
}

// Intermediate-rate lowpass for the final downsample-by-two: equalizes the
// comb droop across the passband and suppresses the fold region around the
// output Nyquist.
std::vector<double> lowpass_equalizer_taps(int m, int order) {
    const int nu = kLpHalfTaps + 1;
    const int grid = 512;
    NormalEq eq(nu);
    for (int g = 0; g <= grid; ++g) {
        const double u = 0.46 * g / grid; // passband, rel. intermediate Nyquist
        std::vector<double> phi = cos_basis(nu, u);
        const double h1 = sinc_response(u, m, order);
        for (auto& v : phi) v *= h1;
        eq.add(phi, 1.0, 1.0);
    }
    for (int g = 0; g <= grid; ++g) {
        const double u = 0.54 + (1.0 - 0.54) * g / grid; // stopband
        eq.add(cos_basis(nu, u), 0.0, 10.0);
    }
    std::vector<double> a = eq.solve();
    double dc = a[0];
    for (int k = 1; k < nu; ++k) dc += 2.0 * a[k];
    for (auto& v : a) v /= dc; // exact unity DC gain
    return expand_symmetric(a);
}

// Valid-sample comb decimation: box^order FIR, unity DC gain.
std::vector<double> comb_decimate(std::span<const double> x, int m, int order) {
    if (m == 1) return {x.begin(), x.end()};
    std::vector<double> h{1.0};
    for (int s = 0; s < order; ++s) {
        std::vector<double> nh(h.size() + m - 1, 0.0);
        for (std::size_t i = 0; i < h.size(); ++i)
            for (int j = 0; j < m; ++j) nh[i + j] += h[i];
        h = std::move(nh);
    }
    const double inv_gain = 1.0 / std::pow(static_cast<double>(m), order);
    const long lh = static_cast<long>(h.size());
    const long n = static_cast<long>(x.size());
    if (n < lh) return {};
    const long n_out = (n - lh) / m + 1;
    std::vector<double> s(n_out);
    for (long t = 0; t < n_out; ++t) {
        double acc = 0.0;
        const long base = t * m;
        for (long k = 0; k < lh; ++k) acc += h[k] * x[base + k];
        s[t] = acc * inv_gain;
    }
    return s;
}

std::vector<double> fir_decimate2(const std::vector<double>& s,
                                  const std::vector<double>& taps) {
    const long half = (static_cast<long>(taps.size()) - 1) / 2;
    const long n = static_cast<long>(s.size());
    if (n < 2 * half + 1) return {};
    std::vector<double> y;
    y.reserve((n - 2 * half) / 2 + 1);
    for (long c = half; c + half < n; c += 2) {
        double acc = 0.0;
        for (long k = -half; k <= half; ++k) acc += taps[k + half] * s[c + k];
        y.push_back(acc);
    }
    return y;
}

} // namespace

std::vector<double> droop_equalizer_taps(int osr, int order) {
    const int nu = kEqHalfTaps + 1;
    const int grid = 512;
    NormalEq eq(nu);
    for (int g = 0; g <= grid; ++g) {
        const double u = 0.985 * g / grid;
        const double w = u <= 0.92 ? 1.0 : 0.2;
        std::vector<double> phi = cos_basis(nu, u);
        const double h = sinc_response(u, osr, order);
        for (auto& v : phi) v *= h;
        eq.add(phi, 1.0, w);
    }
    std::vector<double> a = eq.solve();
    double dc = a[0];
    for (int k = 1; k < nu; ++k) dc += 2.0 * a[k];
    a[0] += 1.0 - dc; // exact unity DC gain
    return expand_symmetric(a);
}

std::vector<double> decimate(std::span<const double> x, int osr, int order) {
    if (osr < 1) throw std::invalid_argument("decimate: osr must be >= 1");
    if (order < 1) throw std::invalid_argument("decimate: order must be >= 1");
    if (osr == 1) return {x.begin(), x.end()};

    if (osr % 2 == 0) {
        // Comb to twice the output rate, then an equalizing lowpass ahead of
        // the final halving so noise just above the output Nyquist cannot
        // fold back onto the band edge.
        const int m = osr / 2;
        const std::vector<double> s = comb_decimate(x, m, order);
        return fir_decimate2(s, lowpass_equalizer_taps(m, order));
    }

    // Odd ratios: single-stage comb with inverse-sinc droop equalisation.
    std::vector<double> s = comb_decimate(x, osr, order);
    const std::vector<double> eq = droop_equalizer_taps(osr, order);
    const long le = kEqHalfTaps;
    const long n_out = static_cast<long>(s.size());
    if (n_out < 2 * le + 1) return s;
    std::vector<double> y(n_out - 2 * le);
    for (long t = le; t < n_out - le; ++t) {
        double acc = 0.0;
        for (long j = -le; j <= le; ++j) acc += eq[j + le] * s[t + j];
        y[t - le] = acc;
    }
    return y;
}

} // namespace nssar::dsp
