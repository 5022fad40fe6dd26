#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qtnet/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("qtnet_cli_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    [[nodiscard]] std::string str() const { return path.string(); }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = qtnet::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

}  // namespace

TEST_CASE("usage and version") {
    CHECK(run({"--version"}).code == qtnet::cli::kOk);
    CHECK(run({"--version"}).out == qtnet::cli::tool_version() + "\n");
    CHECK(run({"--help"}).code == qtnet::cli::kOk);
    CHECK(run({}).code == qtnet::cli::kValidation);
    CHECK(run({"bogus"}).code == qtnet::cli::kValidation);
    CHECK(run({"ensemble", "--no-such-flag"}).code == qtnet::cli::kValidation);
}

TEST_CASE("validation errors exit 2 and write nothing") {
    TempDir d;
    CHECK(run({"ensemble", "--n", "7", "--out-dir", d.str()}).code == qtnet::cli::kValidation);
    CHECK(run({"ensemble", "--xi", "-1", "--out-dir", d.str()}).code == qtnet::cli::kValidation);
    CHECK(run({"ensemble", "--kind", "poisson", "--out-dir", d.str()}).code == qtnet::cli::kValidation);
    CHECK(run({"analytic", "--vbar2", "-0.1", "--xi", "2", "--n", "10", "--out-dir", d.str()}).code ==
          qtnet::cli::kValidation);
    CHECK(run({"analytic", "--xi", "2", "--n", "10", "--out-dir", d.str()}).code == qtnet::cli::kValidation);
    CHECK(run({"fmo", "optimize", "--free", "1,3", "--out-dir", d.str()}).code == qtnet::cli::kValidation);
    CHECK(fs::is_empty(d.path));
}

TEST_CASE("ensemble goe outputs") {
    TempDir d;
    const Run r = run({"ensemble", "--kind", "goe", "--samples", "20", "--seed", "3", "--out-dir", d.str()});
    REQUIRE(r.code == qtnet::cli::kOk);
    for (const char* f : {"records.csv", "ratio_hist.csv", "efficiency_hist.csv", "metadata.json", "manifest.json"}) {
        CHECK(fs::exists(d.path / f));
    }
    CHECK_FALSE(fs::exists(d.path / "analytic_curve.csv"));
    std::istringstream recs(slurp(d.path / "records.csv"));
    std::string line;
    std::getline(recs, line);
    std::size_t rows = 0;
    while (std::getline(recs, line)) {
        ++rows;
        // alpha .. resonant_flag are empty except the accepted column.
        CHECK(line.find(",,,,,,,,,") != std::string::npos);
    }
    CHECK(rows == 20);
    const json meta = load_json(d.path / "metadata.json");
    CHECK(meta["records"] == 20);
    CHECK(meta["config"]["kind"] == "goe");
    CHECK(meta["vbar2"].is_null());
    const json man = load_json(d.path / "manifest.json");
    CHECK(man["master_seed"] == 3);
    CHECK(man.contains("timestamp"));
    CHECK(man["outputs"].size() == 4);
}

TEST_CASE("ensemble partial campaign exits 4 with outputs") {
    TempDir d;
    const Run r = run({"ensemble", "--samples", "5", "--attempt-cap", "5000", "--out-dir", d.str()});
    CHECK(r.code == qtnet::cli::kPartial);
    const json meta = load_json(d.path / "metadata.json");
    CHECK(meta["partial"] == true);
    CHECK(meta["attempts"] == 5000);
}

TEST_CASE("analytic command") {
    TempDir d;
    const Run r = run({"analytic", "--vbar2", "0.311962", "--xi", "2", "--n", "10", "--bins", "100",
                       "--out-dir", d.str()});
    REQUIRE(r.code == qtnet::cli::kOk);
    const json meta = load_json(d.path / "metadata.json");
    CHECK(meta["s0"].get<double>() == doctest::Approx(0.150893772).epsilon(1e-8));
    CHECK(meta["x0"].get<double>() == doctest::Approx(0.03899525).epsilon(1e-6));
    CHECK(meta["mass_on_grid"].get<double>() > 0.9);
    CHECK(meta["mass_on_grid"].get<double>() < 1.0);
    std::istringstream curve(slurp(d.path / "analytic_curve.csv"));
    std::string line;
    std::getline(curve, line);
    CHECK(line == "bin_left,bin_right,density");
    std::size_t rows = 0;
    while (std::getline(curve, line)) ++rows;
    CHECK(rows == 100);
}

TEST_CASE("analytic from records agrees with the flag path") {
    TempDir d;
    const fs::path ens = d.path / "ens";
    REQUIRE(run({"ensemble", "--samples", "3", "--seed", "1", "--out-dir", ens.string()}).code ==
            qtnet::cli::kOk);
    const json em = load_json(ens / "metadata.json");
    REQUIRE(em["vbar2"].is_number());
    const fs::path a = d.path / "a";
    REQUIRE(run({"analytic", "--from-records", (ens / "records.csv").string(), "--out-dir", a.string()}).code ==
            qtnet::cli::kOk);
    const json am = load_json(a / "metadata.json");
    CHECK(am["vbar2"] == em["vbar2"]);
    CHECK(am["s0"] == em["s0"]);
    CHECK(am["config"]["n"] == 10);

    write_file(d.path / "bad.csv", "index,seed\n");
    const Run bad = run({"analytic", "--from-records", (d.path / "bad.csv").string(), "--out-dir", a.string()});
    CHECK(bad.code == qtnet::cli::kValidation);
    CHECK(bad.err.find("line") != std::string::npos);
    CHECK(run({"analytic", "--from-records", "x.csv", "--vbar2", "1", "--out-dir", a.string()}).code ==
          qtnet::cli::kValidation);
}

TEST_CASE("config file: precedence, sections and errors") {
    TempDir d;
    const fs::path cfg = d.path / "run.conf";
    write_file(cfg,
               "# campaign\n"
               "samples = 7\n"
               "seed = 9\n"
               "[ensemble]\n"
               "kind = goe\n"
               "[fmo.build]\n"
               "coupling = 3\n");
    const fs::path out = d.path / "o";
    REQUIRE(run({"ensemble", "--config", cfg.string(), "--seed", "4", "--out-dir", out.string()}).code ==
            qtnet::cli::kOk);
    const json meta = load_json(out / "metadata.json");
    CHECK(meta["config"]["samples"] == 7);
    CHECK(meta["config"]["seed"] == 4);
    CHECK(meta["config"]["kind"] == "goe");

    write_file(cfg, "samples = 7\nwindoww = 3\n");
    const Run unknown = run({"ensemble", "--config", cfg.string(), "--out-dir", out.string()});
    CHECK(unknown.code == qtnet::cli::kValidation);
    CHECK(unknown.err.find(":2:") != std::string::npos);
    CHECK(unknown.err.find("windoww") != std::string::npos);

    write_file(cfg, "[nonsense]\nsamples = 7\n");
    CHECK(run({"ensemble", "--config", cfg.string(), "--out-dir", out.string()}).code ==
          qtnet::cli::kValidation);
    write_file(cfg, "samples = many\n");
    CHECK(run({"ensemble", "--config", cfg.string(), "--out-dir", out.string()}).code ==
          qtnet::cli::kValidation);
    CHECK(run({"ensemble", "--config", (d.path / "missing.conf").string(), "--out-dir", out.string()}).code ==
          qtnet::cli::kValidation);
}

TEST_CASE("fmo commands") {
    TempDir d;
    REQUIRE(run({"fmo", "build", "--out-dir", d.str()}).code == qtnet::cli::kOk);
    CHECK(slurp(d.path / "hamiltonian.csv") == slurp(fs::path(QTNET_TEST_DATA_DIR) / "fmo_hamiltonian.csv"));
    REQUIRE(run({"fmo", "transport", "--out-dir", d.str()}).code == qtnet::cli::kOk);
    CHECK(load_json(d.path / "metadata.json")["p_max"].get<double>() ==
          doctest::Approx(0.3626159119959841).epsilon(1e-12));

    // Reloading the emitted site table reproduces the same Hamiltonian.
    const fs::path again = d.path / "again";
    REQUIRE(run({"fmo", "build", "--sites", (d.path / "sites.csv").string(), "--out-dir", again.string()}).code ==
            qtnet::cli::kOk);
    CHECK(slurp(again / "hamiltonian.csv") == slurp(d.path / "hamiltonian.csv"));

    write_file(d.path / "bad_sites.csv", "1,0,0,0,0,0,1\n2,0,0,0,0,0\n");
    const Run bad = run({"fmo", "build", "--sites", (d.path / "bad_sites.csv").string(), "--out-dir", d.str()});
    CHECK(bad.code == qtnet::cli::kValidation);
    CHECK(bad.err.find("line 2") != std::string::npos);
}

TEST_CASE("fmo optimize is deterministic across runs and worker counts") {
    TempDir d;
    const std::vector<std::string> base = {"fmo", "optimize", "--seed", "5", "--candidates", "8",
                                           "--generations", "3", "--sigma0", "0.1"};
    auto with = [&](const std::string& dir, const std::string& workers) {
        auto a = base;
        a.insert(a.end(), {"--out-dir", (d.path / dir).string(), "--workers", workers});
        return run(a).code;
    };
    REQUIRE(with("a", "1") == qtnet::cli::kOk);
    REQUIRE(with("b", "1") == qtnet::cli::kOk);
    REQUIRE(with("c", "3") == qtnet::cli::kOk);
    for (const char* f : {"trajectory.csv", "final_sites.csv", "metadata.json"}) {
        CHECK(slurp(d.path / "a" / f) == slurp(d.path / "b" / f));
        CHECK(slurp(d.path / "a" / f) == slurp(d.path / "c" / f));
    }
    const json m = load_json(d.path / "a" / "metadata.json");
    CHECK(m["final_p"].get<double>() >= m["seed_p"].get<double>());
}

TEST_CASE("fmo scatter writes both seed kinds") {
    TempDir d;
    REQUIRE(run({"fmo", "scatter", "--fmo-batch", "2", "--random-batch", "2", "--candidates", "4",
                 "--generations", "2", "--sigma0", "0.1", "--out-dir", d.str()})
                .code == qtnet::cli::kOk);
    const std::string sc = slurp(d.path / "scatter.csv");
    CHECK(sc.find("fmo-perturbed,") != std::string::npos);
    CHECK(sc.find("random,") != std::string::npos);
    const json m = load_json(d.path / "metadata.json");
    CHECK(m["fmo-perturbed"]["runs"] == 2);
    CHECK(m["random"]["runs"] == 2);
    CHECK(fs::exists(d.path / "orientation.csv"));
    CHECK(fs::exists(d.path / "orientation_summary.csv"));
}

TEST_CASE("ensemble outputs do not depend on the worker count") {
    TempDir d;
    for (const char* w : {"1", "2"}) {
        REQUIRE(run({"ensemble", "--samples", "2", "--seed", "11", "--workers", w, "--out-dir",
                     (d.path / w).string()})
                    .code == qtnet::cli::kOk);
    }
    for (const char* f : {"records.csv", "ratio_hist.csv", "efficiency_hist.csv", "analytic_curve.csv",
                          "metadata.json"}) {
        CHECK(slurp(d.path / "1" / f) == slurp(d.path / "2" / f));
    }
}
