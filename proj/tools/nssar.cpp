/*
 * Command-line front end. Subcommands: simulate, sweep, calibrate, analyze,
 * montecarlo. A flat key=value config file supplies parameters; flags and
 * --set overrides win over the file.
 */
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nssar/commands.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise-shaping SAR ADC behavioral simulator and design explorer"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string out_dir;
    std::string preset;
    std::string input;
    std::vector<std::string> sets;
    long long seed = -1;
    long trials = 0;
    long cycles = 0;
    bool serial = false;
    bool trace = false;
    bool decimate_flag = false;
    bool list_keys = false;

    app.add_option("-c,--config", config_path, "flat key=value config file");
    app.add_option("-s,--seed", seed, "override the 64-bit seed");
    app.add_option("-o,--out", out_dir, "artifact directory");
    app.add_option("--set", sets, "override one config key, e.g. --set design.osr=32");
    app.add_flag("--serial", serial, "disable OpenMP grid/trial parallelism");
    app.add_flag("--list-keys", list_keys, "print all config keys with defaults");

    auto* c_sim = app.add_subcommand("simulate", "one full conversion run with spectrum and metrics");
    c_sim->add_flag("--trace", trace, "emit per-conversion diagnostics");
    auto* c_sweep = app.add_subcommand("sweep", "precision-vs-OSR trade-off curves");
    c_sweep->add_option("--preset", preset, "fig2 | fig3 | fig4");
    auto* c_cal = app.add_subcommand("calibrate", "background MSB calibration only");
    c_cal->add_option("--cycles", cycles, "calibration cycles");
    auto* c_an = app.add_subcommand("analyze", "spectrum/metrics of an existing code stream");
    c_an->add_option("--input", input, "newline-delimited code stream");
    c_an->add_flag("--decimate", decimate_flag, "also emit the decimated stream");
    auto* c_mc = app.add_subcommand("montecarlo", "repeated trials over derived seeds");
    c_mc->add_option("--trials", trials, "trial count");

    // Global flags are accepted after the subcommand as well.
    for (auto* sub : {c_sim, c_sweep, c_cal, c_an, c_mc}) sub->fallthrough(true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_keys) {
            for (const auto& line : nssar::cli::config_key_docs()) std::cout << line << '\n';
            return 0;
        }

        nssar::cli::RunConfig cfg = config_path.empty()
                                        ? nssar::cli::default_config()
                                        : nssar::cli::parse_config(slurp(config_path));
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("--set expects key=value, got '" + kv + "'");
            nssar::cli::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!preset.empty()) nssar::cli::apply_setting(cfg, "sweep.preset", preset);
        if (!input.empty()) cfg.analysis.input = input;
        if (trials > 0) cfg.mc.trials = static_cast<int>(trials);
        if (cycles > 0) cfg.calib.cycles = cycles;
        if (serial) cfg.parallel = false;
        if (trace) cfg.trace = true;
        if (decimate_flag) cfg.analysis.decimate = true;
        nssar::cli::finalize_config(cfg);

        std::string cmd;
        if (c_sim->parsed()) cmd = "simulate";
        else if (c_sweep->parsed()) cmd = "sweep";
        else if (c_cal->parsed()) cmd = "calibrate";
        else if (c_an->parsed()) cmd = "analyze";
        else if (c_mc->parsed()) cmd = "montecarlo";
        else {
            std::cout << app.help();
            return 0;
        }
        return nssar::cli::run_command(cmd, cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
