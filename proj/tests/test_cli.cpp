#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <nlohmann/json.hpp>

#include "bistable/cli.hpp"
#include "bistable/io.hpp"

using namespace bistable;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("bistable_cli_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string write_config(const fs::path& dir, const json& j, const std::string& name = "cfg.json") {
    const auto p = dir / name;
    std::ofstream f(p);
    f << j.dump(2);
    return p.string();
}

json super_slow_model(double gamma, double h0 = 1.0) {
    return {{"epsilon", 0.1},
            {"tau", 1.0},
            {"regime", {{"super_slow", {{"gamma", gamma}}}}},
            {"H", {{"kind", "power"}, {"h0", h0}, {"m", 1}}}};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

int run(const std::string& cmd, const std::string& cfg, const std::string& out) {
    cli::RunManifest m;
    m.command = cmd;
    m.config_path = cfg;
    m.out_dir = out;
    return cli::dispatch(m);
}

}  // namespace

TEST_CASE("fold command emits the fold JSON") {
    TempDir td("fold");
    json cfg = {{"model", super_slow_model(2.0)}};
    const auto cfgp = write_config(td.path, cfg);
    REQUIRE(run("fold", cfgp, (td.path / "out").string()) == 0);
    json j = json::parse(slurp(td.path / "out" / "fold.json"));
    REQUIRE(j["found"].get<bool>());
    REQUIRE(j["gamma_double"].get<double>() == Catch::Approx(1.5).margin(1e-3));
    REQUIRE(j["v_fold"].get<double>() == Catch::Approx(2.0).margin(1e-3));
    REQUIRE(fs::exists(td.path / "out" / "provenance.json"));
}

TEST_CASE("branches command and determinism") {
    TempDir td("branches");
    json cfg = {{"model", super_slow_model(2.0)}};
    const auto cfgp = write_config(td.path, cfg);
    REQUIRE(run("branches", cfgp, (td.path / "a").string()) == 0);
    REQUIRE(run("branches", cfgp, (td.path / "b").string()) == 0);
    const std::string csv_a = slurp(td.path / "a" / "branches.csv");
    const std::string csv_b = slurp(td.path / "b" / "branches.csv");
    REQUIRE(csv_a == csv_b);  // byte-identical
    REQUIRE(csv_a.find("gamma,v0,branch_index,transversal,residual") == 0);
}

TEST_CASE("spectrum command reports the merged-band regime") {
    TempDir td("spectrum");
    json cfg = {{"model",
                 {{"epsilon", 0.1},
                  {"tau", 1.0},
                  {"regime", {{"regular", {{"g1", -1.0}}}}},
                  {"H", {{"kind", "power"}, {"h0", 1.0}, {"m", 1}}},
                  {"G", {{"kind", "linear"}, {"g1", -1.0}}}}}};
    const auto cfgp = write_config(td.path, cfg);
    REQUIRE(run("spectrum", cfgp, (td.path / "out").string()) == 0);
    json j = json::parse(slurp(td.path / "out" / "spectrum.json"));
    REQUIRE(j["regime"].get<std::string>() == "MergedComplexBand");
    const std::string csv = slurp(td.path / "out" / "dispersion.csv");
    REQUIRE(csv.find("k,re_lambda1,im_lambda1,re_lambda2,im_lambda2") == 0);
}

TEST_CASE("validation failures exit with code 2") {
    TempDir td("bad");
    // unknown config key
    json cfg = {{"model", super_slow_model(2.0)}, {"bogus", 1}};
    REQUIRE(run("branches", write_config(td.path, cfg, "c1.json"),
                (td.path / "o1").string()) == 2);
    // G(0) != 0 via a cubic G with a constant offset is unrepresentable; use
    // a regular-regime descriptor whose G disagrees with g1 instead
    json cfg2 = {{"model",
                  {{"epsilon", 0.1},
                   {"tau", 1.0},
                   {"regime", {{"regular", {{"g1", -1.0}}}}},
                   {"H", {{"kind", "power"}, {"h0", 1.0}, {"m", 1}}},
                   {"G", {{"kind", "linear"}, {"g1", -2.0}}}}}};
    REQUIRE(run("decompose", write_config(td.path, cfg2, "c2.json"),
                (td.path / "o2").string()) == 2);
    // missing config file
    REQUIRE(run("branches", (td.path / "missing.json").string(), (td.path / "o3").string()) ==
            2);
    // epsilon out of range
    json cfg3 = {{"model", super_slow_model(2.0)}};
    cfg3["model"]["epsilon"] = 0.9;
    REQUIRE(run("branches", write_config(td.path, cfg3, "c4.json"),
                (td.path / "o4").string()) == 2);
}

TEST_CASE("fold command on type-E geometry exits with code 3") {
    TempDir td("folde");
    json cfg = {{"model", super_slow_model(2.0)}};
    cfg["model"]["H"]["m"] = 0;  // constant H: no tangency
    const auto cfgp = write_config(td.path, cfg);
    REQUIRE(run("fold", cfgp, (td.path / "out").string()) == 3);
    json j = json::parse(slurp(td.path / "out" / "fold.json"));
    REQUIRE_FALSE(j["found"].get<bool>());
}

TEST_CASE("sweep: branch count flips at the fold") {
    TempDir td("sweep");
    json cfg = {{"model", super_slow_model(2.0)},
                {"sweep",
                 {{"analysis", "branches"},
                  {"axes", json::array({{{"name", "gamma"}, {"min", 1.0}, {"max", 3.0},
                                         {"step", 0.1}}})}}}};
    const auto cfgp = write_config(td.path, cfg);
    REQUIRE(run("sweep", cfgp, (td.path / "out").string()) == 0);
    const std::string csv = slurp(td.path / "out" / "sweep.csv");
    // parse rows: gamma,n_branches,...
    std::vector<std::pair<double, int>> rows;
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);  // header
    REQUIRE(line == "gamma,n_branches,v_first,v_last,status");
    while (std::getline(is, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        rows.emplace_back(std::stod(line.substr(0, c1)),
                          std::stoi(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    REQUIRE(rows.size() == 21);
    double flip = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE((rows[i].second == 0 || rows[i].second == 2));
        if (rows[i - 1].second == 0 && rows[i].second == 2) flip = rows[i].first;
    }
    REQUIRE(flip == Catch::Approx(1.5).margin(0.051));
    // deterministic row order: gammas ascending
    for (std::size_t i = 1; i < rows.size(); ++i) REQUIRE(rows[i].first > rows[i - 1].first);
}

TEST_CASE("sweep: empty grid exits with code 2") {
    TempDir td("sweepe");
    json cfg = {{"model", super_slow_model(2.0)},
                {"sweep", {{"analysis", "branches"}, {"axes", json::array()}}}};
    REQUIRE(run("sweep", write_config(td.path, cfg), (td.path / "out").string()) == 2);
}

TEST_CASE("simulate command on a stable regular front") {
    TempDir td("sim");
    json cfg = {{"model",
                 {{"epsilon", 0.1},
                  {"tau", 1.0},
                  {"regime", {{"regular", {{"g1", -1.0}}}}},
                  {"H", {{"kind", "power"}, {"h0", 1.0}, {"m", 1}}},
                  {"G", {{"kind", "linear"}, {"g1", -1.0}}}}},
                {"sim", {{"N", 1024}, {"dt", 0.01}, {"t_final", 20.0}}}};
    const auto cfgp = write_config(td.path, cfg);
    REQUIRE(run("simulate", cfgp, (td.path / "out").string()) == 0);
    json j = json::parse(slurp(td.path / "out" / "sim.json"));
    REQUIRE(j["verdict"].get<std::string>() == "Persists");
    const std::string csv = slurp(td.path / "out" / "series.csv");
    REQUIRE(csv.find("t,max_u,max_v,front_position") == 0);
}

TEST_CASE("front command emits profile with metadata header") {
    TempDir td("front");
    json cfg = {{"model", super_slow_model(2.0)}, {"front", {{"N", 2048}}}};
    const auto cfgp = write_config(td.path, cfg);
    REQUIRE(run("front", cfgp, (td.path / "out").string()) == 0);
    const std::string csv = slurp(td.path / "out" / "front.csv");
    REQUIRE(csv.rfind("# epsilon=", 0) == 0);
    REQUIRE(csv.find("x,U,V\n") != std::string::npos);
    json j = json::parse(slurp(td.path / "out" / "front.json"));
    REQUIRE(j["v0"].get<double>() == Catch::Approx(0.8153).margin(1e-3));
}
