/*
 * Wall-clock comparison of the serial reference kernels against their
 * OpenMP counterparts: analytic sweep grids, optimizer grid search, and
 * Monte Carlo modulator trials. Also checks that both paths agree exactly.
 */
#include <chrono>
#include <cmath>
#include <iostream>

#include "nssar/analytic.hpp"
#include "nssar/commands.hpp"
#include "nssar/parallel.hpp"

using namespace nssar;
namespace chrono = std::chrono;

namespace {

double ms_since(chrono::steady_clock::time_point t0) {
    return chrono::duration<double, std::milli>(chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial_ms, double omp_ms, bool equal) {
    std::cout << name << ": serial " << serial_ms << " ms, openmp " << omp_ms
              << " ms, speedup " << serial_ms / omp_ms
              << (equal ? "" : "  [MISMATCH]") << '\n';
}

} // namespace

int main() {
    std::cout << "threads: " << hardware_threads() << '\n';

    { // sweep grid
        std::vector<analytic::SweepVariant> variants;
        analytic::DesignParams p;
        for (double c : {5e-12, 10e-12, 20e-12, 50e-12, 100e-12, 200e-12, 500e-12, 1e-9}) {
            p.c_total = c;
            variants.push_back({"v", p});
        }
        std::vector<int> osrs;
        for (int o = 1; o <= 1024; ++o) osrs.push_back(o);

        auto t0 = chrono::steady_clock::now();
        auto a = analytic::sweep(osrs, variants, ExecPolicy::serial);
        const double ts = ms_since(t0);
        t0 = chrono::steady_clock::now();
        auto b = analytic::sweep(osrs, variants, ExecPolicy::openmp);
        const double tp = ms_since(t0);
        report("sweep", ts, tp, a.bits == b.bits);
    }

    { // optimizer grid
        analytic::SearchSpace space;
        space.c_total = {5e-12, 10e-12, 20e-12, 50e-12, 100e-12, 200e-12};
        space.osr = {4, 8, 16, 32, 64, 128};
        space.ns_order = {1, 2};
        space.settle_tau = {3, 5, 7};
        space.msb_bits = {4, 5};
        space.cal_bits = {0, 2, 4};
        space.mes_order = {1, 2};
        analytic::PowerModel pm;

        auto t0 = chrono::steady_clock::now();
        auto a = analytic::optimize_config(space, pm, 16.0, ExecPolicy::serial);
        const double ts = ms_since(t0);
        t0 = chrono::steady_clock::now();
        auto b = analytic::optimize_config(space, pm, 16.0, ExecPolicy::openmp);
        const double tp = ms_since(t0);
        bool equal = a.ranked.size() == b.ranked.size();
        for (std::size_t i = 0; equal && i < a.ranked.size(); ++i)
            equal = a.ranked[i].fom_db == b.ranked[i].fom_db;
        report("optimize", ts, tp, equal);
    }

    { // Monte Carlo modulator trials
        cli::RunConfig cfg = cli::default_config();
        cfg.n_samples = 8192;
        cfg.calib.cycles = 2000;
        const int trials = 8;

        auto run_all = [&](ExecPolicy pol) {
            std::vector<double> sndr(trials);
            parallel_for(trials, pol, [&](std::size_t t) {
                sndr[t] = cli::run_trial(cfg, t).metrics->sndr_db;
            });
            return sndr;
        };
        auto t0 = chrono::steady_clock::now();
        auto a = run_all(ExecPolicy::serial);
        const double ts = ms_since(t0);
        t0 = chrono::steady_clock::now();
        auto b = run_all(ExecPolicy::openmp);
        const double tp = ms_since(t0);
        report("montecarlo", ts, tp, a == b);
    }
    return 0;
}
