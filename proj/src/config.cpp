#include "nssar/config.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace nssar::cli {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw std::runtime_error("config key '" + key + "': " + why);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) bad(key, "trailing characters in number '" + v + "'");
        return d;
    } catch (const std::invalid_argument&) {
        bad(key, "expected a number, got '" + v + "'");
    } catch (const std::out_of_range&) {
        bad(key, "number out of range: '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long l = std::stol(v, &pos);
        if (pos != v.size()) bad(key, "trailing characters in integer '" + v + "'");
        return l;
    } catch (const std::invalid_argument&) {
        bad(key, "expected an integer, got '" + v + "'");
    } catch (const std::out_of_range&) {
        bad(key, "integer out of range: '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    bad(key, "expected a boolean, got '" + v + "'");
}

std::string fmt_double(double d) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", d);
    return buf;
}

struct KeyDef {
    const char* name;
    const char* doc;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyDef>& key_table() {
    auto dkey = [](auto member, const char* name, const char* doc) {
        return KeyDef{name, doc,
                      [member, name](RunConfig& c, const std::string& v) {
                          c.*member = to_double(name, v);
                      },
                      [member](const RunConfig& c) { return fmt_double(c.*member); }};
    };
    (void)dkey;
    static const std::vector<KeyDef> table = {
        {"seed", "base 64-bit seed for all randomness",
         [](RunConfig& c, const std::string& v) {
             c.seed = static_cast<std::uint64_t>(to_long("seed", v));
         },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        {"design.c_total", "total sampling capacitance, farads",
         [](RunConfig& c, const std::string& v) { c.design.c_total = to_double("design.c_total", v); },
         [](const RunConfig& c) { return fmt_double(c.design.c_total); }},
        {"design.osr", "oversampling ratio (>= 1)",
         [](RunConfig& c, const std::string& v) {
             const long o = to_long("design.osr", v);
             if (o < 1) bad("design.osr", "must be >= 1");
             c.design.osr = static_cast<int>(o);
         },
         [](const RunConfig& c) { return std::to_string(c.design.osr); }},
        {"design.sar_bits", "SAR resolution N, bits",
         [](RunConfig& c, const std::string& v) {
             const long n = to_long("design.sar_bits", v);
             if (n < 1 || n > 24) bad("design.sar_bits", "must be in [1, 24]");
             c.design.sar_bits = static_cast<int>(n);
         },
         [](const RunConfig& c) { return std::to_string(c.design.sar_bits); }},
        {"design.ns_order", "loop-filter order M",
         [](RunConfig& c, const std::string& v) {
             const long m = to_long("design.ns_order", v);
             if (m < 0 || m > 4) bad("design.ns_order", "must be in [0, 4]");
             c.design.ns_order = static_cast<int>(m);
         },
         [](const RunConfig& c) { return std::to_string(c.design.ns_order); }},
        {"design.settle_tau", "DAC settling time constants per bit trial",
         [](RunConfig& c, const std::string& v) {
             c.design.settle_tau = to_double("design.settle_tau", v);
             c.nonideal.settle_tau = c.design.settle_tau;
         },
         [](const RunConfig& c) { return fmt_double(c.design.settle_tau); }},
        {"design.msb_bits", "thermometer MSB DAC bits K",
         [](RunConfig& c, const std::string& v) {
             const long k = to_long("design.msb_bits", v);
             if (k < 1 || k > 8) bad("design.msb_bits", "must be in [1, 8]");
             c.design.msb_bits = static_cast<int>(k);
         },
         [](const RunConfig& c) { return std::to_string(c.design.msb_bits); }},
        {"design.cal_bits", "effective calibration bits D (analytic model)",
         [](RunConfig& c, const std::string& v) {
             const long d = to_long("design.cal_bits", v);
             if (d < 0) bad("design.cal_bits", "must be >= 0");
             c.design.cal_bits = static_cast<int>(d);
         },
         [](const RunConfig& c) { return std::to_string(c.design.cal_bits); }},
        {"design.mes_order", "mismatch-error-shaping order E in {0,1,2}",
         [](RunConfig& c, const std::string& v) {
             const long e = to_long("design.mes_order", v);
             if (e < 0 || e > 2) bad("design.mes_order", "must be in {0,1,2}");
             c.design.mes_order = static_cast<int>(e);
             c.nonideal.mes_order = static_cast<int>(e);
         },
         [](const RunConfig& c) { return std::to_string(c.design.mes_order); }},
        {"design.cap_sigma", "relative unit-capacitor sigma",
         [](RunConfig& c, const std::string& v) {
             c.design.cap_sigma = to_double("design.cap_sigma", v);
             if (c.design.cap_sigma < 0) bad("design.cap_sigma", "must be >= 0");
         },
         [](const RunConfig& c) { return fmt_double(c.design.cap_sigma); }},
        {"design.vdd", "reference voltage, volts",
         [](RunConfig& c, const std::string& v) { c.design.vdd = to_double("design.vdd", v); },
         [](const RunConfig& c) { return fmt_double(c.design.vdd); }},
        {"design.temperature", "kelvin",
         [](RunConfig& c, const std::string& v) {
             c.design.temperature = to_double("design.temperature", v);
         },
         [](const RunConfig& c) { return fmt_double(c.design.temperature); }},
        {"design.fs", "conversion rate, hertz",
         [](RunConfig& c, const std::string& v) { c.design.fs = to_double("design.fs", v); },
         [](const RunConfig& c) { return fmt_double(c.design.fs); }},
        {"nonideal.thermal", "inject kT/C sampling noise",
         [](RunConfig& c, const std::string& v) {
             c.nonideal.thermal_noise = to_bool("nonideal.thermal", v);
         },
         [](const RunConfig& c) { return c.nonideal.thermal_noise ? "true" : "false"; }},
        {"nonideal.mismatch", "apply capacitor mismatch to the DACs",
         [](RunConfig& c, const std::string& v) {
             c.nonideal.mismatch_enabled = to_bool("nonideal.mismatch", v);
         },
         [](const RunConfig& c) { return c.nonideal.mismatch_enabled ? "true" : "false"; }},
        {"nonideal.dwa", "rotate MSB element selection",
         [](RunConfig& c, const std::string& v) {
             c.nonideal.dwa_enabled = to_bool("nonideal.dwa", v);
         },
         [](const RunConfig& c) { return c.nonideal.dwa_enabled ? "true" : "false"; }},
        {"nonideal.cmp_offset", "comparator offset, volts",
         [](RunConfig& c, const std::string& v) {
             c.nonideal.cmp_offset = to_double("nonideal.cmp_offset", v);
         },
         [](const RunConfig& c) { return fmt_double(c.nonideal.cmp_offset); }},
        {"nonideal.cmp_noise_rms", "comparator noise, volts rms (-1 = auto)",
         [](RunConfig& c, const std::string& v) {
             c.nonideal.cmp_noise_rms = to_double("nonideal.cmp_noise_rms", v);
         },
         [](const RunConfig& c) { return fmt_double(c.nonideal.cmp_noise_rms); }},
        {"nonideal.gain_mismatch", "residue gain-pair cancellation error",
         [](RunConfig& c, const std::string& v) {
             c.nonideal.gain_mismatch = to_double("nonideal.gain_mismatch", v);
         },
         [](const RunConfig& c) { return fmt_double(c.nonideal.gain_mismatch); }},
        {"nonideal.amp_finite_gain", "integrator open-loop gain (0 = ideal)",
         [](RunConfig& c, const std::string& v) {
             c.nonideal.amp_finite_gain = to_double("nonideal.amp_finite_gain", v);
         },
         [](const RunConfig& c) { return fmt_double(c.nonideal.amp_finite_gain); }},
        {"nonideal.sat_rail", "integrator clamp, DAC-referred volts (-1 = auto)",
         [](RunConfig& c, const std::string& v) {
             c.nonideal.sat_rail = to_double("nonideal.sat_rail", v);
         },
         [](const RunConfig& c) { return fmt_double(c.nonideal.sat_rail); }},
        {"waveform.kind", "sine | dc | impulse | file",
         [](RunConfig& c, const std::string& v) {
             if (v == "sine") c.waveform.kind = sim::Waveform::Kind::sine;
             else if (v == "dc") c.waveform.kind = sim::Waveform::Kind::dc;
             else if (v == "impulse") c.waveform.kind = sim::Waveform::Kind::impulse;
             else if (v == "file") c.waveform.kind = sim::Waveform::Kind::samples;
             else bad("waveform.kind", "expected sine|dc|impulse|file, got '" + v + "'");
         },
         [](const RunConfig& c) {
             switch (c.waveform.kind) {
                 case sim::Waveform::Kind::sine: return std::string("sine");
                 case sim::Waveform::Kind::dc: return std::string("dc");
                 case sim::Waveform::Kind::impulse: return std::string("impulse");
                 default: return std::string("file");
             }
         }},
        {"waveform.amp_dbfs", "tone amplitude relative to full scale",
         [](RunConfig& c, const std::string& v) {
             c.waveform.amp_dbfs = to_double("waveform.amp_dbfs", v);
         },
         [](const RunConfig& c) { return fmt_double(c.waveform.amp_dbfs); }},
        {"waveform.freq_hz", "tone frequency, hertz",
         [](RunConfig& c, const std::string& v) {
             c.waveform.freq_hz = to_double("waveform.freq_hz", v);
         },
         [](const RunConfig& c) { return fmt_double(c.waveform.freq_hz); }},
        {"waveform.coherent", "snap sine tones onto an analysis bin",
         [](RunConfig& c, const std::string& v) {
             c.waveform.coherent = to_bool("waveform.coherent", v);
         },
         [](const RunConfig& c) { return c.waveform.coherent ? "true" : "false"; }},
        {"waveform.dc_level", "DC input level, volts",
         [](RunConfig& c, const std::string& v) {
             c.waveform.dc_level = to_double("waveform.dc_level", v);
         },
         [](const RunConfig& c) { return fmt_double(c.waveform.dc_level); }},
        {"waveform.path", "sample list file for waveform.kind = file",
         [](RunConfig& c, const std::string& v) { c.waveform_path = v; },
         [](const RunConfig& c) { return c.waveform_path; }},
        {"sim.n_samples", "conversions per run",
         [](RunConfig& c, const std::string& v) {
             c.n_samples = to_long("sim.n_samples", v);
             if (c.n_samples < 1) bad("sim.n_samples", "must be >= 1");
         },
         [](const RunConfig& c) { return std::to_string(c.n_samples); }},
        {"sim.trace", "emit per-conversion diagnostic records",
         [](RunConfig& c, const std::string& v) { c.trace = to_bool("sim.trace", v); },
         [](const RunConfig& c) { return c.trace ? "true" : "false"; }},
        {"analysis.window", "hann | rect",
         [](RunConfig& c, const std::string& v) {
             if (v == "hann") c.analysis.window = dsp::Window::hann;
             else if (v == "rect") c.analysis.window = dsp::Window::rectangular;
             else bad("analysis.window", "expected hann|rect, got '" + v + "'");
         },
         [](const RunConfig& c) {
             return c.analysis.window == dsp::Window::hann ? std::string("hann")
                                                           : std::string("rect");
         }},
        {"analysis.n_fft", "FFT length (0 = auto)",
         [](RunConfig& c, const std::string& v) {
             c.analysis.n_fft = static_cast<int>(to_long("analysis.n_fft", v));
             if (c.analysis.n_fft < 0) bad("analysis.n_fft", "must be >= 0");
         },
         [](const RunConfig& c) { return std::to_string(c.analysis.n_fft); }},
        {"analysis.power_w", "power used for FoM_S (0 disables)",
         [](RunConfig& c, const std::string& v) {
             c.analysis.power_w = to_double("analysis.power_w", v);
             if (c.analysis.power_w < 0) bad("analysis.power_w", "must be >= 0");
         },
         [](const RunConfig& c) { return fmt_double(c.analysis.power_w); }},
        {"analysis.input", "code stream consumed by `analyze`",
         [](RunConfig& c, const std::string& v) { c.analysis.input = v; },
         [](const RunConfig& c) { return c.analysis.input; }},
        {"analysis.decimate", "also emit the decimated stream and metrics",
         [](RunConfig& c, const std::string& v) {
             c.analysis.decimate = to_bool("analysis.decimate", v);
         },
         [](const RunConfig& c) { return c.analysis.decimate ? "true" : "false"; }},
        {"analysis.decimate_order", "comb decimator order",
         [](RunConfig& c, const std::string& v) {
             c.analysis.decimate_order = static_cast<int>(to_long("analysis.decimate_order", v));
             if (c.analysis.decimate_order < 1) bad("analysis.decimate_order", "must be >= 1");
         },
         [](const RunConfig& c) { return std::to_string(c.analysis.decimate_order); }},
        {"calib.enabled", "run background calibration before simulating",
         [](RunConfig& c, const std::string& v) { c.calib.enabled = to_bool("calib.enabled", v); },
         [](const RunConfig& c) { return c.calib.enabled ? "true" : "false"; }},
        {"calib.cycles", "background calibration cycles",
         [](RunConfig& c, const std::string& v) {
             c.calib.cycles = to_long("calib.cycles", v);
             if (c.calib.cycles < 1) bad("calib.cycles", "must be >= 1");
         },
         [](const RunConfig& c) { return std::to_string(c.calib.cycles); }},
        {"calib.threshold", "sign accumulations per trim-code step",
         [](RunConfig& c, const std::string& v) {
             c.calib.threshold = static_cast<int>(to_long("calib.threshold", v));
             if (c.calib.threshold < 1) bad("calib.threshold", "must be >= 1");
         },
         [](const RunConfig& c) { return std::to_string(c.calib.threshold); }},
        {"calib.range_frac", "trim span as fraction of a unit capacitor",
         [](RunConfig& c, const std::string& v) {
             c.calib.range_frac = to_double("calib.range_frac", v);
             if (c.calib.range_frac <= 0) bad("calib.range_frac", "must be > 0");
         },
         [](const RunConfig& c) { return fmt_double(c.calib.range_frac); }},
        {"calib.load", "warm-start trim table (index,code CSV)",
         [](RunConfig& c, const std::string& v) { c.calib.load = v; },
         [](const RunConfig& c) { return c.calib.load; }},
        {"mc.trials", "Monte Carlo trial count",
         [](RunConfig& c, const std::string& v) {
             c.mc.trials = static_cast<int>(to_long("mc.trials", v));
             if (c.mc.trials < 1) bad("mc.trials", "must be >= 1");
         },
         [](const RunConfig& c) { return std::to_string(c.mc.trials); }},
        {"power.alpha", "array-switching power multiplier",
         [](RunConfig& c, const std::string& v) { c.power.alpha = to_double("power.alpha", v); },
         [](const RunConfig& c) { return fmt_double(c.power.alpha); }},
        {"power.beta", "amplifier power multiplier",
         [](RunConfig& c, const std::string& v) { c.power.beta = to_double("power.beta", v); },
         [](const RunConfig& c) { return fmt_double(c.power.beta); }},
        {"power.i_bias", "first-stage bias current, amps",
         [](RunConfig& c, const std::string& v) { c.power.i_bias = to_double("power.i_bias", v); },
         [](const RunConfig& c) { return fmt_double(c.power.i_bias); }},
        {"power.a1_share", "fraction of amplifier power in the first stage",
         [](RunConfig& c, const std::string& v) {
             c.power.a1_share = to_double("power.a1_share", v);
             if (c.power.a1_share <= 0 || c.power.a1_share > 1)
                 bad("power.a1_share", "must be in (0, 1]");
         },
         [](const RunConfig& c) { return fmt_double(c.power.a1_share); }},
        {"sweep.preset", "fig2 | fig3 | fig4",
         [](RunConfig& c, const std::string& v) {
             if (v != "fig2" && v != "fig3" && v != "fig4")
                 bad("sweep.preset", "expected fig2|fig3|fig4, got '" + v + "'");
             c.sweep_preset = v;
         },
         [](const RunConfig& c) { return c.sweep_preset; }},
        {"output.dir", "artifact directory",
         [](RunConfig& c, const std::string& v) { c.out_dir = v; },
         [](const RunConfig& c) { return c.out_dir; }},
        {"parallel.enabled", "evaluate grids and trials with OpenMP",
         [](RunConfig& c, const std::string& v) { c.parallel = to_bool("parallel.enabled", v); },
         [](const RunConfig& c) { return c.parallel ? "true" : "false"; }},
    };
    return table;
}

} // namespace

RunConfig default_config() {
    RunConfig cfg;
    cfg.design.msb_bits = 4; // 15-element calibrated MSB array
    cfg.nonideal.cmp_noise_rms = -1.0; // auto
    cfg.nonideal.sat_rail = -1.0;      // auto
    finalize_config(cfg);
    return cfg;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& def : key_table()) {
        if (key == def.name) {
            def.set(cfg, value);
            return;
        }
    }
    throw std::runtime_error("unknown config key '" + key + "'");
}

void finalize_config(RunConfig& cfg) {
    // Derived defaults: comparator noise at half the sampled thermal rms,
    // integrator rail at a quarter of the supply (DAC-referred).
    if (cfg.nonideal.cmp_noise_rms < 0)
        cfg.nonideal.cmp_noise_rms =
            0.5 * std::sqrt(analytic::kBoltzmann * cfg.design.temperature /
                            cfg.design.c_total);
    if (cfg.nonideal.sat_rail < 0) cfg.nonideal.sat_rail = cfg.design.vdd / 4.0;
    cfg.nonideal.settle_tau = cfg.design.settle_tau;
    cfg.nonideal.mes_order = cfg.design.mes_order;
    cfg.design.validate();
    cfg.nonideal.validate();
    cfg.waveform.validate(cfg.design.fs);
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.design.msb_bits = 4;
    cfg.nonideal.cmp_noise_rms = -1.0;
    cfg.nonideal.sat_rail = -1.0;

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    finalize_config(cfg);
    return cfg;
}

std::string canonical_dump(const RunConfig& cfg) {
    std::ostringstream os;
    for (const auto& def : key_table()) os << def.name << " = " << def.get(cfg) << '\n';
    return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    // Output location and execution policy do not affect results, so they
    // stay out of the hash; identical experiments hash identically wherever
    // the artifacts land.
    std::istringstream is(canonical_dump(cfg));
    std::string line;
    std::uint64_t h = 0xcbf29ce484222325ull;
    while (std::getline(is, line)) {
        if (line.rfind("output.dir", 0) == 0 || line.rfind("parallel.enabled", 0) == 0)
            continue;
        for (unsigned char c : line) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        h ^= '\n';
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<std::string> config_key_docs() {
    RunConfig def = default_config();
    std::vector<std::string> out;
    for (const auto& d : key_table()) {
        std::ostringstream os;
        os << d.name << " = " << d.get(def) << "  # " << d.doc;
        out.push_back(os.str());
    }
    return out;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t idx) {
    return splitmix64(seed ^ splitmix64(idx * 0x9e3779b97f4a7c15ull + 0x7f4a));
}

} // namespace nssar::cli
