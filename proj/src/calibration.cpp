#include "nssar/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nssar::cal {

using sim::CapArrayState;
using sim::TrimTable;

ShuffleSets shuffle_pair(const CapArrayState& a, Rng& rng) {
    const int n = static_cast<int>(a.msb_err.size());
    if (n < 2) throw std::invalid_argument("shuffle_pair: need >= 2 MSB elements");

    std::vector<int> idx(n);
    // Rotate by the DWA pointer so the partition stream is decorrelated from
    // any concurrent conversion activity.
    for (int i = 0; i < n; ++i) idx[i] = (i + a.dwa_pointer) % n;
    for (int i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.below(static_cast<std::uint32_t>(i + 1))]);

    const int s = n / 2;
    ShuffleSets sets;
    sets.plus.assign(idx.begin(), idx.begin() + s);
    sets.minus.assign(idx.begin() + s, idx.begin() + 2 * s);
    return sets;
}

ShuffleSets shuffle_pair(const CapArrayState& a, std::uint64_t seed) {
    Rng rng(seed);
    return shuffle_pair(a, rng);
}

int measure_mismatch(const CapArrayState& a, const ShuffleSets& sets,
                     const sim::NonIdealities& ni, Rng& rng, double vdd) {
    if (sets.plus.size() != sets.minus.size())
        throw std::invalid_argument("measure_mismatch: sets must be balanced");
    const double vu = vdd * std::exp2(-a.msb_bits);
    double diff = 0.0;
    for (int i : sets.plus) diff += a.effective_err(i);
    for (int i : sets.minus) diff -= a.effective_err(i);
    double v = 0.5 * vu * diff;
    if (ni.cmp_noise_rms > 0.0) v += ni.cmp_noise_rms * rng.gauss();
    return (v > 0.0) - (v < 0.0);
}

void update_trims(TrimTable& t, const ShuffleSets& sets, int sign) {
    if (sign < -1 || sign > 1) throw std::invalid_argument("update_trims: bad sign");
    if (sign == 0) return;
    auto bump = [&](int i, int delta) {
        t.accumulators[i] += delta;
        if (t.accumulators[i] <= -t.threshold) {
            t.codes[i] = std::min(255, t.codes[i] + 1);
            t.accumulators[i] = 0;
        } else if (t.accumulators[i] >= t.threshold) {
            t.codes[i] = std::max(0, t.codes[i] - 1);
            t.accumulators[i] = 0;
        }
    };
    for (int i : sets.plus) bump(i, -sign);
    for (int i : sets.minus) bump(i, sign);
}

double effective_mismatch_std(const CapArrayState& a) {
    const int n = static_cast<int>(a.msb_err.size());
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += a.effective_err(i);
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = a.effective_err(i) - mean;
        var += d * d;
    }
    return std::sqrt(var / n);
}

CalResult run_calibration(sim::ModulatorState& st, long n_cycles,
                          std::uint64_t seed, const sim::Waveform* concurrent) {
    if (n_cycles < 1) throw std::invalid_argument("run_calibration: n_cycles >= 1");
    Rng rng = Rng::substream(seed, 3);

    CalResult res;
    res.initial_std = effective_mismatch_std(st.arrays());
    for (long c = 0; c < n_cycles; ++c) {
        if (concurrent)
            st.convert(concurrent->value(c, st.params().fs, st.params().vdd));
        ShuffleSets sets = shuffle_pair(st.arrays(), rng);
        const int sign = measure_mismatch(st.arrays(), sets, st.nonideal(), rng,
                                          st.params().vdd);
        std::vector<int> prev = st.arrays().trim.codes;
        update_trims(st.arrays().trim, sets, sign);
        for (std::size_t i = 0; i < prev.size(); ++i)
            if (prev[i] != st.arrays().trim.codes[i]) ++res.code_steps;
    }
    res.cycles = n_cycles;
    res.residual_std = effective_mismatch_std(st.arrays());
    res.effective_bits = res.residual_std > 0.0 && res.initial_std > 0.0
                             ? std::log2(res.initial_std / res.residual_std)
                             : 0.0;
    return res;
}

std::string trims_to_csv(const TrimTable& t) {
    std::ostringstream os;
    os << "index,code\n";
    for (std::size_t i = 0; i < t.codes.size(); ++i)
        os << i << ',' << t.codes[i] << '\n';
    return os.str();
}

void trims_from_csv(TrimTable& t, const std::string& text) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("index", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("trims_from_csv: malformed line: " + line);
        const std::size_t i = std::stoul(line.substr(0, comma));
        const int code = std::stoi(line.substr(comma + 1));
        if (i >= t.codes.size() || code < 0 || code > 255)
            throw std::runtime_error("trims_from_csv: out-of-range entry: " + line);
        t.codes[i] = code;
    }
}

} // namespace nssar::cal
