#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nssar/commands.hpp"
#include "nssar/config.hpp"

using namespace nssar;
using namespace nssar::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("nssar_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("empty input yields the reference defaults") {
    RunConfig cfg = parse_config("");
    CHECK(cfg.design.c_total == 50e-12);
    CHECK(cfg.design.osr == 16);
    CHECK(cfg.design.sar_bits == 10);
    CHECK(cfg.design.ns_order == 2);
    CHECK(cfg.design.settle_tau == 5.0);
    CHECK(cfg.design.msb_bits == 4); // 15-element calibrated MSB array
    CHECK(cfg.design.cal_bits == 4);
    CHECK(cfg.design.mes_order == 2);
    CHECK(cfg.design.cap_sigma == 0.005);
    CHECK(cfg.design.vdd == 1.8);
    CHECK(cfg.design.fs == 500e3);
    CHECK(cfg.n_samples == 65536);
    CHECK(cfg.waveform.amp_dbfs == -3.0);
    CHECK(cfg.waveform.freq_hz == 6500.0);
    CHECK(cfg.nonideal.cmp_noise_rms > 0); // auto-resolved
    CHECK(cfg.nonideal.sat_rail == doctest::Approx(0.45));
}

TEST_CASE("range and type errors name the key") {
    CHECK_THROWS_WITH_AS(parse_config("design.osr = 0\n"),
                         doctest::Contains("design.osr"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config("design.sar_bits = banana\n"),
                         doctest::Contains("design.sar_bits"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config("no.such.key = 1\n"),
                         doctest::Contains("no.such.key"), std::runtime_error);
    CHECK_THROWS_AS(parse_config("waveform.freq_hz = 4e5\n"), std::exception);
}

TEST_CASE("comments, spacing and overrides parse") {
    RunConfig cfg = parse_config(
        "# comment line\n"
        "design.osr = 32   # trailing comment\n"
        "\n"
        "waveform.amp_dbfs = -6\n");
    CHECK(cfg.design.osr == 32);
    CHECK(cfg.waveform.amp_dbfs == -6.0);

    apply_setting(cfg, "seed", "99");
    finalize_config(cfg);
    CHECK(cfg.seed == 99);
    CHECK(canonical_dump(cfg).find("seed = 99\n") != std::string::npos);
}

TEST_CASE("config hash tracks content") {
    RunConfig a = default_config();
    RunConfig b = default_config();
    CHECK(config_hash(a) == config_hash(b));
    apply_setting(b, "design.osr", "32");
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("trial seeds are stable and distinct") {
    CHECK(trial_seed(1, 0) == trial_seed(1, 0));
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}

TEST_CASE("simulate writes headed artifacts") {
    TempDir td("simulate");
    RunConfig cfg = default_config();
    cfg.n_samples = 4096;
    cfg.calib.cycles = 500;
    cfg.out_dir = (td.path / "out").string();
    REQUIRE(run_command("simulate", cfg) == 0);

    for (const char* name : {"codes.txt", "spectrum.csv", "metrics.txt", "trims.csv"}) {
        const fs::path p = td.path / "out" / name;
        REQUIRE_MESSAGE(fs::exists(p), name);
        const std::string head = slurp(p).substr(0, 8);
        CHECK(head == "# nssar ");
    }
    const std::string metrics = slurp(td.path / "out" / "metrics.txt");
    CHECK(metrics.find("sndr_db=") != std::string::npos);
    CHECK(metrics.find("fom_s_db=") != std::string::npos);
}

TEST_CASE("montecarlo with one trial reproduces simulate") {
    TempDir td("mc1");
    RunConfig cfg = default_config();
    cfg.n_samples = 4096;
    cfg.calib.cycles = 500;
    cfg.mc.trials = 1;

    cfg.out_dir = (td.path / "sim").string();
    REQUIRE(run_command("simulate", cfg) == 0);
    cfg.out_dir = (td.path / "mc").string();
    REQUIRE(run_command("montecarlo", cfg) == 0);

    const std::string metrics = slurp(td.path / "sim" / "metrics.txt");
    const std::string mc = slurp(td.path / "mc" / "mc.csv");
    auto field = [](const std::string& text, const std::string& key) {
        const auto at = text.find(key + "=");
        REQUIRE(at != std::string::npos);
        return text.substr(at + key.size() + 1, text.find('\n', at) - at - key.size() - 1);
    };
    const std::string sndr = field(metrics, "sndr_db");
    CHECK(mc.find("," + sndr + ",") != std::string::npos);
}

TEST_CASE("sweep command emits the three-series csv") {
    TempDir td("sweep");
    RunConfig cfg = default_config();
    cfg.sweep_preset = "fig2";
    cfg.out_dir = (td.path / "out").string();
    REQUIRE(run_command("sweep", cfg) == 0);
    const std::string csv = slurp(td.path / "out" / "sweep.csv");
    const auto header_at = csv.find("osr,");
    REQUIRE(header_at != std::string::npos);
    const std::string header = csv.substr(header_at, csv.find('\n', header_at) - header_at);
    CHECK(std::count(header.begin(), header.end(), ',') == 3);
    // 256 OSR points follow.
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 257);
}

TEST_CASE("analyze round-trips a simulated stream") {
    TempDir td("analyze");
    RunConfig cfg = default_config();
    cfg.n_samples = 8192;
    cfg.calib.cycles = 500;
    cfg.out_dir = (td.path / "sim").string();
    REQUIRE(run_command("simulate", cfg) == 0);

    RunConfig ac = cfg;
    ac.analysis.input = (td.path / "sim" / "codes.txt").string();
    ac.analysis.decimate = true;
    ac.out_dir = (td.path / "an").string();
    REQUIRE(run_command("analyze", ac) == 0);
    CHECK(fs::exists(td.path / "an" / "spectrum.csv"));
    CHECK(fs::exists(td.path / "an" / "metrics.txt"));
    CHECK(fs::exists(td.path / "an" / "decimated.txt"));
    CHECK(fs::exists(td.path / "an" / "metrics_decimated.txt"));

    // The two analysis paths agree on the stream's SNDR.
    const std::string a = slurp(td.path / "sim" / "metrics.txt");
    const std::string b = slurp(td.path / "an" / "metrics.txt");
    CHECK(a.substr(a.find("sndr_db=")) == b.substr(b.find("sndr_db=")));
}

TEST_CASE("calibrate command reports convergence") {
    TempDir td("cal");
    RunConfig cfg = default_config();
    cfg.calib.cycles = 4000;
    cfg.out_dir = (td.path / "out").string();
    REQUIRE(run_command("calibrate", cfg) == 0);
    const std::string txt = slurp(td.path / "out" / "calib.txt");
    CHECK(txt.find("residual_std=") != std::string::npos);
    CHECK(txt.find("effective_bits=") != std::string::npos);
    CHECK(fs::exists(td.path / "out" / "trims.csv"));
}

TEST_CASE("seed override is reflected in artifact metadata") {
    TempDir td("seedmeta");
    RunConfig cfg = default_config();
    cfg.seed = 99;
    cfg.n_samples = 2048;
    cfg.calib.cycles = 200;
    cfg.out_dir = (td.path / "out").string();
    REQUIRE(run_command("simulate", cfg) == 0);
    const std::string head = slurp(td.path / "out" / "metrics.txt");
    CHECK(head.find("seed=99") != std::string::npos);
}

TEST_CASE("external sample-list waveforms are consumed") {
    TempDir td("wavefile");
    const fs::path wav = td.path / "input.txt";
    {
        std::ofstream out(wav);
        for (int i = 0; i < 4096; ++i) out << 0.3 * std::sin(0.01 * i) << "\n";
    }
    RunConfig cfg = default_config();
    apply_setting(cfg, "waveform.kind", "file");
    apply_setting(cfg, "waveform.path", wav.string());
    finalize_config(cfg);
    cfg.n_samples = 4096;
    cfg.calib.cycles = 200;
    cfg.out_dir = (td.path / "out").string();
    REQUIRE(run_command("simulate", cfg) == 0);
    CHECK(fs::exists(td.path / "out" / "codes.txt"));
    CHECK(fs::exists(td.path / "out" / "spectrum.csv"));
}

TEST_CASE("unknown command is rejected") {
    RunConfig cfg = default_config();
    CHECK_THROWS(run_command("frobnicate", cfg));
}
