#include "nssar/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nssar::analytic {

namespace {
constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("DesignParams.") + field + ": " + what);
}
} // namespace

void DesignParams::validate() const {
    require(c_total > 0, "c_total", "must be > 0");
    require(osr >= 1, "osr", "must be >= 1");
    require(sar_bits >= 1, "sar_bits", "must be >= 1");
    require(ns_order >= 0, "ns_order", "must be >= 0");
    require(settle_tau >= 0, "settle_tau", "must be >= 0");
    require(msb_bits >= 0, "msb_bits", "must be >= 0");
    require(msb_bits <= sar_bits, "msb_bits", "must be <= sar_bits");
    require(cal_bits >= 0, "cal_bits", "must be >= 0");
    require(mes_order >= 0 && mes_order <= 2, "mes_order", "must be in {0,1,2}");
    require(cap_sigma >= 0, "cap_sigma", "must be >= 0");
    require(vdd > 0, "vdd", "must be > 0");
    require(temperature > 0, "temperature", "must be > 0");
    require(fs > 0, "fs", "must be > 0");
}

double snp_eval(const DesignParams& p) {
    p.validate();
    return kBoltzmann * p.temperature / p.c_total * (2.4 / p.osr);
}

double shaping_factor(int order, int osr) {
    return std::pow(kPi, 2 * order) /
           ((1.0 + 2.0 * order) * std::pow(static_cast<double>(osr), 1.0 + 2.0 * order));
}

double qnp_eval(const DesignParams& p) {
    p.validate();
    const double v2 = p.vdd * p.vdd;
    const double settle = v2 * std::exp(-3.0 * p.settle_tau);
    const double quant = v2 * std::exp2(-2.0 * p.sar_bits);
    return (settle + quant) * shaping_factor(p.ns_order, p.osr) / 12.0;
}

double mnp_eval(const DesignParams& p) {
    p.validate();
    const double osr = p.osr;
    const double msb = kPi * kPi * std::exp2(-2.0 * p.cal_bits) /
                       (3.0 * std::exp2(p.msb_bits) * osr * osr * osr);
    const double lsb = std::exp2(-2.0 * p.msb_bits) * shaping_factor(p.mes_order, p.osr);
    return (msb + lsb) * p.cap_sigma * p.cap_sigma * p.vdd * p.vdd / 3.0;
}

double full_scale_signal_power(double vdd) { return vdd * vdd / 8.0; }

double enob_from_sndr(double sndr_db) { return (sndr_db - 1.76) / 6.02; }

NoiseBudget precision(const DesignParams& p) {
    NoiseBudget nb;
    nb.snp = snp_eval(p);
    nb.qnp = qnp_eval(p);
    nb.mnp = mnp_eval(p);
    nb.signal_power = full_scale_signal_power(p.vdd);
    const double noise = nb.total_noise();
    // A zero-noise budget is unbounded rather than an overflow.
    nb.sndr_db = noise > 0 ? 10.0 * std::log10(nb.signal_power / noise)
                           : std::numeric_limits<double>::infinity();
    nb.enob_bits = enob_from_sndr(nb.sndr_db);
    return nb;
}

double fom_s(double sndr_db, double bw_hz, double power_w) {
    if (bw_hz <= 0) throw std::domain_error("fom_s: bandwidth must be > 0");
    if (power_w <= 0) throw std::domain_error("fom_s: power must be > 0");
    return sndr_db + 10.0 * std::log10(bw_hz / power_w);
}

SweepCurve sweep(const std::vector<int>& osr_list,
                 const std::vector<SweepVariant>& variants, ExecPolicy policy) {
    if (variants.empty()) throw std::invalid_argument("sweep: no variants given");
    if (osr_list.empty()) throw std::invalid_argument("sweep: empty osr list");
    for (std::size_t i = 1; i < osr_list.size(); ++i)
        if (osr_list[i] <= osr_list[i - 1])
            throw std::invalid_argument("sweep: osr list must be strictly ascending");

    SweepCurve curve;
    curve.osr = osr_list;
    curve.bits.assign(variants.size(), std::vector<double>(osr_list.size(), 0.0));
    for (const auto& v : variants) curve.names.push_back(v.name);

    const std::size_t total = variants.size() * osr_list.size();
    parallel_for(total, policy, [&](std::size_t idx) {
        const std::size_t vi = idx / osr_list.size();
        const std::size_t oi = idx % osr_list.size();
        DesignParams p = variants[vi].params;
        p.osr = osr_list[oi];
        curve.bits[vi][oi] = precision(p).enob_bits;
    });
    return curve;
}

std::string sweep_to_csv(const SweepCurve& curve) {
    std::ostringstream os;
    os << "osr";
    for (const auto& n : curve.names) os << ',' << n;
    os << '\n';
    char buf[32];
    for (std::size_t oi = 0; oi < curve.osr.size(); ++oi) {
        os << curve.osr[oi];
        for (std::size_t vi = 0; vi < curve.names.size(); ++vi) {
            std::snprintf(buf, sizeof buf, "%.4f", curve.bits[vi][oi]);
            os << ',' << buf;
        }
        os << '\n';
    }
    return os.str();
}

double PowerModel::estimate(const DesignParams& p) const {
    const double array = alpha * p.c_total * p.vdd * p.vdd * p.fs;
    const double amps = beta * (p.ns_order + 1.0) * (i_bias / a1_share) * p.vdd;
    return array + amps;
}

std::size_t SearchSpace::size() const {
    return c_total.size() * osr.size() * ns_order.size() * settle_tau.size() *
           msb_bits.size() * cal_bits.size() * mes_order.size();
}

OptimizeResult optimize_config(const SearchSpace& space, const PowerModel& pm,
                               double target_bits, ExecPolicy policy) {
    const std::size_t n = space.size();
    if (n == 0) throw std::invalid_argument("optimize_config: empty search space");

    std::vector<RankedConfig> all(n);
    std::vector<char> meets(n, 0);

    // Deterministic nested enumeration: c_total, osr, M, tau, K, D, E.
    auto decode = [&](std::size_t idx) {
        DesignParams p = space.base;
        std::size_t r = idx;
        p.mes_order = space.mes_order[r % space.mes_order.size()];
        r /= space.mes_order.size();
        p.cal_bits = space.cal_bits[r % space.cal_bits.size()];
        r /= space.cal_bits.size();
        p.msb_bits = space.msb_bits[r % space.msb_bits.size()];
        r /= space.msb_bits.size();
        p.settle_tau = space.settle_tau[r % space.settle_tau.size()];
        r /= space.settle_tau.size();
        p.ns_order = space.ns_order[r % space.ns_order.size()];
        r /= space.ns_order.size();
        p.osr = space.osr[r % space.osr.size()];
        r /= space.osr.size();
        p.c_total = space.c_total[r];
        return p;
    };

    parallel_for(n, policy, [&](std::size_t idx) {
        RankedConfig rc;
        rc.params = decode(idx);
        rc.budget = precision(rc.params);
        rc.power_w = pm.estimate(rc.params);
        rc.bw_hz = rc.params.fs / (2.0 * rc.params.osr);
        rc.fom_db = fom_s(rc.budget.sndr_db, rc.bw_hz, rc.power_w);
        all[idx] = rc;
        meets[idx] = rc.budget.enob_bits >= target_bits;
    });

    OptimizeResult res;
    for (std::size_t i = 0; i < n; ++i)
        if (meets[i]) res.ranked.push_back(all[i]);
    res.feasible = !res.ranked.empty();
    std::stable_sort(res.ranked.begin(), res.ranked.end(),
                     [](const RankedConfig& a, const RankedConfig& b) {
                         if (a.fom_db != b.fom_db) return a.fom_db > b.fom_db;
                         if (a.params.c_total != b.params.c_total)
                             return a.params.c_total < b.params.c_total;
                         if (a.params.osr != b.params.osr) return a.params.osr < b.params.osr;
                         return a.params.ns_order < b.params.ns_order;
                     });
    return res;
}

SweepCurve preset_sweep(const std::string& name, ExecPolicy policy) {
    // Each preset isolates one noise source: the inactive sources are pushed
    // many orders of magnitude below the active one so the plotted precision
    // is that source's bound.
    DesignParams quiet;
    quiet.msb_bits = 4;

    auto osr_range = [](int lo, int hi) {
        std::vector<int> v;
        for (int o = lo; o <= hi; ++o) v.push_back(o);
        return v;
    };

    std::vector<SweepVariant> variants;
    std::vector<int> osrs;
    if (name == "fig2") { // sampling-noise bound vs C_T
        osrs = osr_range(1, 256);
        DesignParams p = quiet;
        p.cap_sigma = 0.0;
        p.settle_tau = 200.0;
        p.sar_bits = 30;
        for (double c : {5e-12, 50e-12, 500e-12}) {
            p.c_total = c;
            std::ostringstream nm;
            nm << "ct_" << c * 1e12 << "pF";
            variants.push_back({nm.str(), p});
        }
    } else if (name == "fig3") { // quantisation/settling bound vs (tau, M)
        osrs = osr_range(4, 256);
        DesignParams p = quiet;
        p.cap_sigma = 0.0;
        p.c_total = 1.0; // push sampling noise away
        for (auto [tau, m] : {std::pair<double, int>{3, 1}, {5, 1}, {3, 2}, {5, 2}}) {
            p.settle_tau = tau;
            p.ns_order = m;
            std::ostringstream nm;
            nm << "tau" << tau << "_m" << m;
            variants.push_back({nm.str(), p});
        }
    } else if (name == "fig4") { // mismatch bound vs (D, E)
        osrs = osr_range(4, 256);
        DesignParams p = quiet;
        p.c_total = 1.0;
        p.settle_tau = 200.0;
        p.sar_bits = 30;
        p.msb_bits = 4;
        p.cap_sigma = 0.005;
        for (auto [d, e] : {std::pair<int, int>{0, 1}, {4, 1}, {0, 2}, {4, 2}}) {
            p.cal_bits = d;
            p.mes_order = e;
            std::ostringstream nm;
            nm << "d" << d << "_e" << e;
            variants.push_back({nm.str(), p});
        }
    } else {
        throw std::invalid_argument("unknown sweep preset: " + name);
    }
    return sweep(osrs, variants, policy);
}

} // namespace nssar::analytic
