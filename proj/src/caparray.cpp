#include "nssar/caparray.hpp"

#include <stdexcept>

namespace nssar::sim {

CapArrayState build_array(int msb_bits, int sar_bits, double sigma,
                          std::uint64_t seed) {
    if (msb_bits < 0 || sar_bits < 1 || msb_bits > sar_bits)
        throw std::invalid_argument("build_array: need 0 <= msb_bits <= sar_bits");
    if (sigma < 0) throw std::invalid_argument("build_array: sigma must be >= 0");

    CapArrayState a;
    a.msb_bits = msb_bits;
    a.sar_bits = sar_bits;
    a.trim = TrimTable(a.n_msb_elems());

    Rng rng(seed);
    a.msb_err.resize(a.n_msb_elems());
    for (auto& e : a.msb_err) e = sigma == 0 ? 0.0 : sigma * rng.gauss();
    // Each binary weight is one physically scaled capacitor, so every bit
    // carries the full relative sigma.
    for (auto& arr : a.lsb_err) {
        arr.resize(a.n_lsb_bits());
        for (auto& e : arr) e = sigma == 0 ? 0.0 : sigma * rng.gauss();
    }
    return a;
}

std::pair<std::vector<int>, int> dwa_select(int pointer, int code, int n_elems) {
    if (n_elems < 1) throw std::invalid_argument("dwa_select: n_elems must be >= 1");
    if (code < 0 || code > n_elems)
        throw std::invalid_argument("dwa_select: code out of [0, n_elems]");
    if (pointer < 0 || pointer >= n_elems)
        throw std::invalid_argument("dwa_select: pointer out of range");

    std::vector<int> sel;
    sel.reserve(code);
    for (int i = 0; i < code; ++i) sel.push_back((pointer + i) % n_elems);
    return {std::move(sel), (pointer + code) % n_elems};
}

} // namespace nssar::sim
