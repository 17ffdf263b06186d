#include "nssar/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "nssar/parallel.hpp"

namespace nssar::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_artifact(const RunConfig& cfg, const std::string& name,
                    const std::string& body) {
    fs::create_directories(cfg.out_dir);
    const fs::path p = fs::path(cfg.out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + p.string());
    out << artifact_header(cfg) << body;
}

std::vector<double> load_samples(const std::string& path) {
    std::istringstream is(read_file(path));
    std::vector<double> v;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        v.push_back(std::stod(line));
    }
    if (v.empty()) throw std::runtime_error("no samples in " + path);
    return v;
}

int auto_nfft(long n_samples, int requested) {
    if (requested > 0) return requested;
    int n = 1;
    while (2LL * n <= n_samples && n < (1 << 24)) n *= 2;
    return n;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string codes_to_text(const std::vector<int>& codes) {
    std::ostringstream os;
    for (int c : codes) os << c << '\n';
    return os.str();
}

std::string trace_to_text(const std::vector<sim::ConversionResult>& trace) {
    std::ostringstream os;
    long i = 0;
    for (const auto& r : trace) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "n=%ld code=%d out=%d residue=%.9e msb=%d dwa=%d "
                      "settle=%.3e int1=%.6e int2=%.6e clip=%d overload=%d",
                      i++, r.code, r.out_code, r.residue, r.diag.msb_code,
                      r.diag.dwa_first, r.diag.settle_err, r.diag.int1,
                      r.diag.int2, r.diag.filter_clipped ? 1 : 0,
                      r.diag.overload ? 1 : 0);
        os << buf << '\n';
    }
    return os.str();
}

dsp::Metrics analyse_stream(const RunConfig& cfg, const std::vector<double>& volts,
                            dsp::Spectrum& spec_out, double f_sig, double fs, int osr) {
    const int n_fft = auto_nfft(static_cast<long>(volts.size()), cfg.analysis.n_fft);
    spec_out = dsp::periodogram(volts, cfg.analysis.window, n_fft, fs,
                                analytic::full_scale_signal_power(cfg.design.vdd));
    dsp::Metrics m = dsp::sndr(spec_out, f_sig, osr);
    if (cfg.analysis.power_w > 0)
        m.fom_s_db = analytic::fom_s(m.sndr_db, fs / (2.0 * osr), cfg.analysis.power_w);
    return m;
}

} // namespace

std::string artifact_header(const RunConfig& cfg) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "# nssar config=%016llx seed=%llu\n",
                  static_cast<unsigned long long>(config_hash(cfg)),
                  static_cast<unsigned long long>(cfg.seed));
    return buf;
}

TrialResult run_trial(const RunConfig& cfg, std::uint64_t trial_index) {
    TrialResult tr;
    tr.seed_used = trial_seed(cfg.seed, trial_index);

    sim::ModulatorState st(cfg.design, cfg.nonideal, tr.seed_used);
    if (!cfg.calib.load.empty()) {
        cal::trims_from_csv(st.arrays().trim, read_file(cfg.calib.load));
    } else if (cfg.calib.enabled) {
        st.arrays().trim.threshold = cfg.calib.threshold;
        st.arrays().trim.range_frac = cfg.calib.range_frac;
        tr.calibration = cal::run_calibration(st, cfg.calib.cycles, tr.seed_used);
    }
    tr.trims_csv = cal::trims_to_csv(st.arrays().trim);

    sim::Waveform wf = cfg.waveform;
    if (wf.kind == sim::Waveform::Kind::samples)
        wf.samples = load_samples(cfg.waveform_path);
    wf = wf.snapped(cfg.design.fs, auto_nfft(cfg.n_samples, cfg.analysis.n_fft));

    tr.out = sim::run(st, wf, cfg.n_samples, cfg.trace);

    if (wf.kind == sim::Waveform::Kind::sine) {
        tr.metrics = analyse_stream(cfg, tr.out.out_volts, tr.spectrum, wf.freq_hz,
                                    cfg.design.fs, cfg.design.osr);
    } else {
        const int n_fft = auto_nfft(cfg.n_samples, cfg.analysis.n_fft);
        tr.spectrum = dsp::periodogram(tr.out.out_volts, cfg.analysis.window, n_fft,
                                       cfg.design.fs,
                                       analytic::full_scale_signal_power(cfg.design.vdd));
    }
    return tr;
}

namespace {

int cmd_simulate(const RunConfig& cfg) {
    TrialResult tr = run_trial(cfg, 0);
    write_artifact(cfg, "codes.txt", codes_to_text(tr.out.out_codes));
    write_artifact(cfg, "spectrum.csv", dsp::spectrum_to_csv(tr.spectrum));
    if (tr.metrics)
        write_artifact(cfg, "metrics.txt", dsp::metrics_to_text(*tr.metrics));
    write_artifact(cfg, "trims.csv", tr.trims_csv);
    if (cfg.trace) write_artifact(cfg, "trace.txt", trace_to_text(tr.out.trace));

    std::ostringstream os;
    os << "simulate:";
    if (tr.metrics)
        os << " sndr_db=" << fmt(tr.metrics->sndr_db)
           << " enob_bits=" << fmt(tr.metrics->enob_bits)
           << " sfdr_db=" << fmt(tr.metrics->sfdr_db);
    if (tr.calibration)
        os << " cal_residual=" << fmt(tr.calibration->residual_std * 100) << "%";
    os << " clip=" << tr.out.filter_clip_events
       << " overload=" << tr.out.overload_events << " -> " << cfg.out_dir;
    std::cout << os.str() << '\n';
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    const ExecPolicy pol = cfg.parallel ? ExecPolicy::openmp : ExecPolicy::serial;
    analytic::SweepCurve curve = analytic::preset_sweep(cfg.sweep_preset, pol);
    write_artifact(cfg, "sweep.csv", analytic::sweep_to_csv(curve));
    std::cout << "sweep: preset=" << cfg.sweep_preset << " series="
              << curve.names.size() << " points=" << curve.osr.size() << " -> "
              << cfg.out_dir << '\n';
    return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
    const std::uint64_t seed0 = trial_seed(cfg.seed, 0);
    sim::ModulatorState st(cfg.design, cfg.nonideal, seed0);
    st.arrays().trim.threshold = cfg.calib.threshold;
    st.arrays().trim.range_frac = cfg.calib.range_frac;
    cal::CalResult res = cal::run_calibration(st, cfg.calib.cycles, seed0);

    write_artifact(cfg, "trims.csv", cal::trims_to_csv(st.arrays().trim));
    std::ostringstream body;
    body << "cycles=" << res.cycles << '\n'
         << "initial_std=" << fmt(res.initial_std * 100) << '\n'
         << "residual_std=" << fmt(res.residual_std * 100) << '\n'
         << "effective_bits=" << fmt(res.effective_bits) << '\n'
         << "code_steps=" << res.code_steps << '\n';
    write_artifact(cfg, "calib.txt", body.str());
    std::cout << "calibrate: residual_std=" << fmt(res.residual_std * 100)
              << "% effective_bits=" << fmt(res.effective_bits) << " -> "
              << cfg.out_dir << '\n';
    return 0;
}

int cmd_analyze(const RunConfig& cfg) {
    if (cfg.analysis.input.empty())
        throw std::runtime_error("analyze: set analysis.input to a code stream file");
    const std::vector<double> raw = load_samples(cfg.analysis.input);
    const double lsb = cfg.design.vdd * std::exp2(-cfg.design.sar_bits);
    const double mid = std::exp2(cfg.design.sar_bits - 1);
    std::vector<double> volts(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) volts[i] = (raw[i] - mid) * lsb;

    dsp::Spectrum spec;
    dsp::Metrics m = analyse_stream(cfg, volts, spec, cfg.waveform.freq_hz,
                                    cfg.design.fs, cfg.design.osr);
    write_artifact(cfg, "spectrum.csv", dsp::spectrum_to_csv(spec));
    write_artifact(cfg, "metrics.txt", dsp::metrics_to_text(m));

    std::ostringstream os;
    os << "analyze: sndr_db=" << fmt(m.sndr_db) << " enob_bits=" << fmt(m.enob_bits);
    if (cfg.analysis.decimate) {
        std::vector<double> dec =
            dsp::decimate(volts, cfg.design.osr, cfg.analysis.decimate_order);
        const double fs_dec = cfg.design.fs / cfg.design.osr;
        const int n_fft = auto_nfft(static_cast<long>(dec.size()), 0);
        dsp::Spectrum dspec =
            dsp::periodogram(dec, cfg.analysis.window, n_fft, fs_dec,
                             analytic::full_scale_signal_power(cfg.design.vdd));
        dsp::Metrics dm = dsp::sndr(dspec, cfg.waveform.freq_hz, 1);
        std::ostringstream body;
        for (double v : dec) body << fmt(v) << '\n';
        write_artifact(cfg, "decimated.txt", body.str());
        write_artifact(cfg, "metrics_decimated.txt", dsp::metrics_to_text(dm));
        os << " decimated_sndr_db=" << fmt(dm.sndr_db);
    }
    os << " -> " << cfg.out_dir;
    std::cout << os.str() << '\n';
    return 0;
}

int cmd_montecarlo(const RunConfig& cfg) {
    const int trials = cfg.mc.trials;
    std::vector<TrialResult> results(trials);
    const ExecPolicy pol = cfg.parallel ? ExecPolicy::openmp : ExecPolicy::serial;
    parallel_for(trials, pol, [&](std::size_t t) {
        RunConfig local = cfg;
        local.trace = false;
        results[t] = run_trial(local, t);
    });

    std::ostringstream body;
    body << "trial,seed,sndr_db,sfdr_db,enob_bits\n";
    std::vector<double> sndrs;
    for (int t = 0; t < trials; ++t) {
        const auto& m = results[t].metrics;
        body << t << ',' << results[t].seed_used;
        if (m) {
            body << ',' << fmt(m->sndr_db) << ',' << fmt(m->sfdr_db) << ','
                 << fmt(m->enob_bits);
            sndrs.push_back(m->sndr_db);
        } else {
            body << ",,,";
        }
        body << '\n';
    }
    write_artifact(cfg, "mc.csv", body.str());

    double median = 0;
    if (!sndrs.empty()) {
        std::sort(sndrs.begin(), sndrs.end());
        median = sndrs[sndrs.size() / 2];
    }
    std::cout << "montecarlo: trials=" << trials
              << " median_sndr_db=" << fmt(median) << " -> " << cfg.out_dir << '\n';
    return 0;
}

} // namespace

int run_command(const std::string& cmd, const RunConfig& cfg) {
    if (cmd == "simulate") return cmd_simulate(cfg);
    if (cmd == "sweep") return cmd_sweep(cfg);
    if (cmd == "calibrate") return cmd_calibrate(cfg);
    if (cmd == "analyze") return cmd_analyze(cfg);
    if (cmd == "montecarlo") return cmd_montecarlo(cfg);
    throw std::runtime_error("unknown command: " + cmd);
}

} // namespace nssar::cli
