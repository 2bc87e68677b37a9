#include "bistable/cli.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bistable/errors.hpp"
#include "bistable/evans.hpp"
#include "bistable/io.hpp"

namespace bistable::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct LoadedConfig {
    json raw;
    ModelDescriptor model;
};

const std::vector<std::string> kSections = {"model",  "front",    "branches", "fold",
                                            "spectrum", "evans",  "oracle",   "sim",
                                            "classify", "sweep"};

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw SchemaError("unknown field \"" + it.key() + "\" in " + where);
    }
}

LoadedConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open config " + path);
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("config must be a JSON object");
    reject_unknown_keys(j, kSections, "config");
    if (!j.contains("model")) throw SchemaError("config missing \"model\"");
    LoadedConfig lc{j, parse_model_descriptor(j.at("model"))};
    return lc;
}

double opt_num(const json& j, const char* key, double dflt) {
    return j.contains(key) ? j.at(key).get<double>() : dflt;
}
int opt_int(const json& j, const char* key, int dflt) {
    return j.contains(key) ? j.at(key).get<int>() : dflt;
}
bool opt_bool(const json& j, const char* key, bool dflt) {
    return j.contains(key) ? j.at(key).get<bool>() : dflt;
}

json section(const LoadedConfig& lc, const char* name, const std::vector<std::string>& allowed) {
    if (!lc.raw.contains(name)) return json::object();
    const json& s = lc.raw.at(name);
    reject_unknown_keys(s, allowed, std::string("config.") + name);
    return s;
}

void write_provenance(const RunManifest& m, const std::string& config_text, double wall_s) {
    json p;
    p["command"] = m.command;
    p["config_path"] = m.config_path;
    p["config_fnv1a"] = fnv1a_hex(config_text);
    p["version"] = kVersion;
    p["deterministic"] = m.deterministic;
    p["wall_seconds"] = wall_s;
    write_file((fs::path(m.out_dir) / "provenance.json").string(), p.dump(2) + "\n");
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return s;
}

FrontProfile make_front(const LoadedConfig& lc, const json& js, bool refine_default) {
    const auto& params = lc.model.params;
    const auto& spec = lc.model.spec;
    double v0;
    if (js.contains("v0")) {
        v0 = js.at("v0").get<double>();
    } else if (params.regime == Regime::SuperSlow) {
        auto branches = find_branches(params, spec);
        if (branches.empty()) throw NumericalError("no front branch exists at these parameters");
        const int want = opt_int(js, "branch", 1);
        if (want < 1 || want > static_cast<int>(branches.size()))
            throw ValidationError("requested branch index out of range");
        v0 = branches[want - 1].v0;
    } else {
        v0 = regular_front_v_peak(params, spec);
    }
    const double L = opt_num(js, "L", default_domain_half_width(params));
    const int N = opt_int(js, "N", 8192);
    FrontProfile fp = build_composite_front(v0, params, spec, L, N);
    if (opt_bool(js, "refine", refine_default)) fp = refine_front_bvp(fp, params, spec);
    return fp;
}

int run_command(const RunManifest& m) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(m.out_dir);
    LoadedConfig lc = load_config(m.config_path);
    const auto& params = lc.model.params;
    const auto& spec = lc.model.spec;
    auto out_path = [&](const std::string& name) { return (fs::path(m.out_dir) / name).string(); };

    if (m.command == "decompose") {
        auto rep = validate_reaction_spec(spec);
        json j;
        j["pass"] = rep.pass;
        j["h0"] = rep.h0;
        j["g1"] = rep.g1;
        for (const auto& c : rep.checks)
            j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"residual", c.residual}});
        write_file(out_path("decompose.json"), j.dump(2) + "\n");
        if (!rep.pass) throw ValidationError("reaction spec failed validation");
    } else if (m.command == "front") {
        json js = section(lc, "front", {"branch", "v0", "L", "N", "refine"});
        FrontProfile fp = make_front(lc, js, false);
        write_file(out_path("front.csv"), profile_csv(fp));
        double supv = 0.0;
        for (double v : fp.V) supv = std::max(supv, std::abs(v));
        json j;
        j["v0"] = fp.v0;
        j["V_at_0"] = fp.V[fp.V.size() / 2];
        j["sup_V"] = supv;
        j["construction"] =
            fp.construction == FrontConstruction::BVPRefined ? "bvp_refined" : "composite";
        write_file(out_path("front.json"), j.dump(2) + "\n");
    } else if (m.command == "branches") {
        json js = section(lc, "branches", {"v_max"});
        auto pts = find_branches(params, spec, opt_num(js, "v_max", 50.0));
        write_file(out_path("branches.csv"), branches_csv(pts));
        json j;
        j["count"] = pts.size();
        write_file(out_path("branches.json"), j.dump(2) + "\n");
    } else if (m.command == "fold") {
        json js = section(lc, "fold", {"v_min", "v_max"});
        FoldWindow w;
        w.v_min = opt_num(js, "v_min", w.v_min);
        w.v_max = opt_num(js, "v_max", w.v_max);
        try {
            FoldPoint fp = find_fold(params, spec, w);
            json j;
            j["found"] = true;
            j["gamma_double"] = fp.gamma_double;
            j["v_fold"] = fp.v_fold;
            j["contact_order"] = fp.contact_order;
            write_file(out_path("fold.json"), j.dump(2) + "\n");
        } catch (const NoFoldFound& e) {
            json j;
            j["found"] = false;
            j["reason"] = e.what();
            write_file(out_path("fold.json"), j.dump(2) + "\n");
            throw;
        }
    } else if (m.command == "spectrum") {
        section(lc, "spectrum", {});
        auto pts = dispersion_scan(params, spec);
        write_file(out_path("dispersion.csv"), dispersion_csv(pts));
        auto rep = classify_regime(params, spec);
        json j;
        j["stable"] = rep.stable;
        j["regime"] = to_string(rep.regime);
        j["margin"] = rep.margin;
        if (rep.k_minus) j["k_minus"] = *rep.k_minus;
        if (rep.k_plus) j["k_plus"] = *rep.k_plus;
        j["tip_plus"] = {rep.tip_lambda_plus.real(), rep.tip_lambda_plus.imag()};
        j["tip_minus"] = {rep.tip_lambda_minus.real(), rep.tip_lambda_minus.imag()};
        write_file(out_path("spectrum.json"), j.dump(2) + "\n");
    } else if (m.command == "evans") {
        json js = section(lc, "evans", {"branch", "v0", "L", "N", "refine", "re_min", "re_max",
                                        "n_points", "contour_center_re", "contour_center_im",
                                        "contour_radius", "contour_points"});
        FrontProfile fp = make_front(lc, js, true);
        auto ctx = LinearizationContext::make(fp, params, spec);
        const double re_min = opt_num(js, "re_min", -1.9);
        const double re_max = opt_num(js, "re_max", 0.5);
        const int n = opt_int(js, "n_points", 49);
        std::vector<EvansEvaluation> evals;
        for (int i = 0; i < n; ++i) {
            const Complex z(re_min + (re_max - re_min) * i / (n - 1), 0.0);
            try {
                evals.push_back(evans_compound(z, ctx));
            } catch (const NumericalError&) {
                // points on/near sigma_ess are skipped in the scan
            }
        }
        write_file(out_path("evans_scan.csv"), evans_scan_csv(evals));
        json j;
        j["n_evaluated"] = evals.size();
        const double rad = opt_num(js, "contour_radius", 0.0);
        if (rad > 0.0) {
            const Complex c(opt_num(js, "contour_center_re", 0.0),
                            opt_num(js, "contour_center_im", 0.0));
            j["winding"] = winding_count(circle_contour(c, rad, opt_int(js, "contour_points", 32)),
                                         ctx);
            j["contour_center"] = {c.real(), c.imag()};
            j["contour_radius"] = rad;
        }
        write_file(out_path("evans.json"), j.dump(2) + "\n");
    } else if (m.command == "oracle") {
        json js = section(lc, "oracle", {"branch", "v0", "L", "N", "refine", "oracle_L",
                                         "oracle_N", "shifts", "re_min"});
        FrontProfile fp = make_front(lc, js, true);
        auto ctx = LinearizationContext::make(fp, params, spec);
        OracleOptions oo;
        oo.N = opt_int(js, "oracle_N", 4096);
        oo.L = opt_num(js, "oracle_L", std::min(fp.half_width(), 50.0));
        oo.re_min = opt_num(js, "re_min", -2.0);
        if (js.contains("shifts")) oo.shifts = js.at("shifts").get<std::vector<double>>();
        auto eigs = discrete_spectrum_oracle(ctx, oo);
        json j = json::array();
        for (const auto& e : eigs) {
            j.push_back({{"value", {e.lambda.real(), e.lambda.imag()}},
                         {"method", "fd_oracle"},
                         {"error_estimate", e.error_estimate},
                         {"parity", to_string(e.parity)},
                         {"cluster", e.cluster}});
        }
        write_file(out_path("eigenvalues.json"), j.dump(2) + "\n");
    } else if (m.command == "simulate") {
        json js = section(lc, "sim", {"branch", "v0", "L", "N", "dt", "t_final", "record_every",
                                      "nudge", "safety"});
        SimConfig sc;
        sc.L = opt_num(js, "L", 50.0);
        sc.N = opt_int(js, "N", 2048);
        sc.dt = opt_num(js, "dt", 0.005);
        sc.t_final = opt_num(js, "t_final", 200.0);
        sc.record_every = opt_int(js, "record_every", 20);
        sc.safety = opt_num(js, "safety", 8.0);
        double v0;
        if (js.contains("v0")) {
            v0 = js.at("v0").get<double>();
        } else if (params.regime == Regime::SuperSlow && params.gamma > 0.0) {
            auto branches = find_branches(params, spec);
            if (branches.empty()) throw NumericalError("no front branch at these parameters");
            const int want = opt_int(js, "branch", 1);
            if (want < 1 || want > static_cast<int>(branches.size()))
                throw ValidationError("requested branch index out of range");
            v0 = branches[want - 1].v0;
        } else if (params.regime == Regime::Regular) {
            v0 = regular_front_v_peak(params, spec);
        } else {
            throw ValidationError("sim: specify v0 explicitly when gamma <= 0");
        }
        v0 *= 1.0 + opt_num(js, "nudge", 0.0);
        auto outc = run_and_classify(sc, params, spec, v0);
        write_file(out_path("series.csv"), sim_series_csv(outc.series));
        json j;
        j["verdict"] = to_string(outc.verdict);
        j["drift"] = outc.drift;
        if (outc.t_blow) j["t_blow"] = *outc.t_blow;
        if (outc.v_growth_rate) j["v_growth_rate"] = *outc.v_growth_rate;
        write_file(out_path("sim.json"), j.dump(2) + "\n");
    } else if (m.command == "classify") {
        json js = section(lc, "classify", {"gamma_hi", "gamma_lo"});
        auto r = classify_destabilization_type(spec, opt_num(js, "gamma_hi", 20.0),
                                               opt_num(js, "gamma_lo", 1e-4));
        json j;
        j["type"] = r.kind == DestabilizationType::Kind::TypeD ? "D" : "E";
        if (r.fold) {
            j["gamma_double"] = r.fold->gamma_double;
            j["v_fold"] = r.fold->v_fold;
        }
        j["gamma_end"] = r.gamma_end;
        j["v_end"] = r.v_end;
        write_file(out_path("classify.json"), j.dump(2) + "\n");
    } else if (m.command == "sweep") {
        json js = section(lc, "sweep", {"analysis", "axes"});
        if (!js.contains("analysis") || !js.contains("axes"))
            throw SchemaError("sweep requires \"analysis\" and \"axes\"");
        const std::string analysis = js.at("analysis").get<std::string>();
        struct Axis {
            std::string name;
            std::vector<double> values;
        };
        std::vector<Axis> axes;
        long total = 1;
        for (const auto& ja : js.at("axes")) {
            reject_unknown_keys(ja, {"name", "min", "max", "step"}, "sweep axis");
            Axis ax;
            ax.name = ja.at("name").get<std::string>();
            if (ax.name != "gamma" && ax.name != "h0" && ax.name != "tau" && ax.name != "epsilon")
                throw SchemaError("sweep axis must be gamma, h0, tau or epsilon");
            const double lo = ja.at("min").get<double>();
            const double hi = ja.at("max").get<double>();
            const double st = ja.at("step").get<double>();
            if (!(st > 0.0) || hi < lo) throw SchemaError("bad sweep axis range");
            for (double v = lo; v <= hi + 0.5 * st; v += st) ax.values.push_back(v);
            total *= static_cast<long>(ax.values.size());
            axes.push_back(std::move(ax));
        }
        if (axes.empty() || total == 0) throw ValidationError("sweep grid is empty");
        if (total > 1000000) throw ValidationError("sweep grid exceeds 1e6 jobs");

        // job index -> parameter overrides, lexicographic in grid indices
        auto overrides_for = [&](long idx) {
            std::vector<std::pair<std::string, double>> o;
            long rem = idx;
            for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
                const long n = static_cast<long>(it->values.size());
                o.emplace_back(it->name, it->values[rem % n]);
                rem /= n;
            }
            std::reverse(o.begin(), o.end());
            return o;
        };

        std::vector<std::string> rows(total);
        std::atomic<long> next{0};
        unsigned workers = std::thread::hardware_concurrency();
        if (const char* env = std::getenv("FRONTLAB_WORKERS")) {
            const long w = std::strtol(env, nullptr, 10);
            if (w >= 1) workers = static_cast<unsigned>(w);
        }
        workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(total)));

        auto run_job = [&](long idx) {
            auto ovr = overrides_for(idx);
            json jm = lc.raw.at("model");
            for (const auto& [name, val] : ovr) {
                if (name == "gamma") {
                    if (!jm.at("regime").contains("super_slow"))
                        throw ValidationError("gamma axis requires the super_slow regime");
                    jm["regime"]["super_slow"]["gamma"] = val;
                } else if (name == "h0") {
                    jm["H"]["h0"] = val;
                } else if (name == "tau") {
                    jm["tau"] = val;
                } else if (name == "epsilon") {
                    jm["epsilon"] = val;
                }
            }
            std::string row;
            for (const auto& [name, val] : ovr) row += fmt_num(val) + ",";
            try {
                ModelDescriptor md = parse_model_descriptor(jm);
                if (analysis == "branches") {
                    auto pts = find_branches(md.params, md.spec);
                    row += std::to_string(pts.size());
                    row += ",";
                    row += pts.empty() ? "" : fmt_num(pts.front().v0);
                    row += ",";
                    row += pts.empty() ? "" : fmt_num(pts.back().v0);
                } else if (analysis == "fold") {
                    auto fp = find_fold(md.params, md.spec);
                    row += fmt_num(fp.gamma_double) + "," + fmt_num(fp.v_fold) + ",";
                } else if (analysis == "spectrum") {
                    auto rep = classify_regime(md.params, md.spec);
                    row += to_string(rep.regime) + "," + fmt_num(rep.margin) + ",";
                } else if (analysis == "edge") {
                    auto pts = find_branches(md.params, md.spec);
                    row += std::to_string(pts.size()) + ",";
                    if (!pts.empty()) {
                        auto e = lambda_edge_predict(pts.front().v0, md.params, md.spec);
                        row += fmt_num(e.lambda_tilde_edge);
                    }
                    row += ",";
                } else {
                    throw SchemaError("unknown sweep analysis \"" + analysis + "\"");
                }
                row += ",ok";
            } catch (const SchemaError&) {
                throw;
            } catch (const std::exception& e) {
                row += ",,error: " + std::string(e.what());
            }
            rows[idx] = row;
        };

        std::vector<std::thread> pool;
        std::exception_ptr first_error;
        std::mutex err_mu;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const long idx = next.fetch_add(1);
                    if (idx >= total) return;
                    try {
                        run_job(idx);
                    } catch (...) {
                        std::lock_guard<std::mutex> lk(err_mu);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);

        std::string header;
        for (const auto& ax : axes) header += ax.name + ",";
        if (analysis == "branches")
            header += "n_branches,v_first,v_last,status";
        else if (analysis == "fold")
            header += "gamma_double,v_fold,status";
        else if (analysis == "spectrum")
            header += "regime,margin,status";
        else
            header += "n_branches,lambda_tilde_edge,status";
        std::string csv = header + "\n";
        for (const auto& r : rows) csv += r + "\n";
        write_file(out_path("sweep.csv"), csv);
    } else {
        throw ValidationError("unknown command " + m.command);
    }

    const auto t1 = std::chrono::steady_clock::now();
    write_provenance(m, slurp(m.config_path),
                     std::chrono::duration<double>(t1 - t0).count());
    return 0;
}

}  // namespace

int dispatch(const RunManifest& manifest) {
    try {
        return run_command(manifest);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"bistable front laboratory: existence, spectra and simulation of "
                 "two-component bistable fronts"};
    app.require_subcommand(1);
    RunManifest manifest;
    const std::vector<std::string> commands = {"decompose", "front",    "branches", "fold",
                                               "spectrum",  "evans",    "oracle",   "simulate",
                                               "classify",  "sweep"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", manifest.config_path, "JSON config file")->required();
        sub->add_option("--out", manifest.out_dir, "output directory");
        sub->callback([&manifest, name] { manifest.command = name; });
    }
    CLI11_PARSE(app, argc, argv);
    return dispatch(manifest);
}

}  // namespace bistable::cli
