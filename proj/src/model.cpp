#include "bistable/model.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

namespace bistable {

namespace {

double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

void require_finite(double v, const std::string& where) {
    if (!std::isfinite(v)) throw NonFiniteEvaluation("non-finite evaluation in " + where);
}

// Fixed probe set: 20 points covering (u_sq, v) in [0,9] x [-0.9, 9].
struct Probe {
    double u_sq, v;
};
const std::vector<Probe>& probe_points() {
    static const std::vector<Probe> pts = [] {
        std::vector<Probe> p;
        const double us[5] = {0.0, 1.0, 2.5, 5.5, 9.0};
        const double vs[4] = {-0.9, 0.0, 2.0, 9.0};
        for (double u : us)
            for (double v : vs) p.push_back({u, v});
        return p;
    }();
    return pts;
}

}  // namespace

ModelParams ModelParams::regular(double eps, double tau, double g1) {
    ModelParams p;
    p.epsilon = eps;
    p.tau = tau;
    p.regime = Regime::Regular;
    p.g1 = g1;
    p.validate();
    return p;
}

ModelParams ModelParams::super_slow(double eps, double tau, double gamma) {
    ModelParams p;
    p.epsilon = eps;
    p.tau = tau;
    p.regime = Regime::SuperSlow;
    p.gamma = gamma;
    p.g1 = -eps * eps * gamma;
    p.validate();
    return p;
}

std::vector<std::string> ModelParams::validate() const {
    std::vector<std::string> warnings;
    if (!(epsilon > 0.0) || epsilon > 0.5)
        throw ValidationError("epsilon must lie in (0, 0.5], got " + std::to_string(epsilon));
    if (epsilon > 0.2)
        warnings.push_back("epsilon=" + std::to_string(epsilon) +
                           " is above 0.2; asymptotic formulas degrade");
    if (!(tau >= 1e-2) || !(tau <= 1e2))
        throw ValidationError("tau must lie in [1e-2, 1e2], got " + std::to_string(tau));
    if (regime == Regime::Regular) {
        if (!(g1 < 0.0)) throw ValidationError("regular regime requires g1 < 0");
    }
    return warnings;
}

ReactionSpec ReactionSpec::make(std::function<double(double, double)> H,
                                std::function<double(double, double)> dH_dUsq,
                                std::function<double(double, double)> dH_dV,
                                std::function<double(double)> G,
                                std::function<double(double)> dG_dV, std::string label) {
    ReactionSpec s;
    s.H = std::move(H);
    s.dH_dUsq = std::move(dH_dUsq);
    s.dH_dV = std::move(dH_dV);
    s.G = std::move(G);
    s.dG_dV = std::move(dG_dV);
    s.label = std::move(label);
    s.H0 = s.H(1.0, 0.0);
    s.G1 = s.dG_dV(0.0);
    require_finite(s.H0, "H(1,0)");
    require_finite(s.G1, "dG/dV(0)");
    return s;
}

ReactionSpec make_power_linear(double h0, int m, double g1) {
    return make_power_cubic(h0, m, g1, 0.0, 0.0);
}

ReactionSpec make_power_cubic(double h0, int m, double g1, double g2, double g3) {
    if (m < 0 || m > 2) throw ValidationError("PowerH exponent m must be 0, 1 or 2");
    auto H = [h0, m](double u_sq, double) { return h0 * std::pow(u_sq, m); };
    auto dH = [h0, m](double u_sq, double) {
        return m == 0 ? 0.0 : h0 * m * std::pow(u_sq, m - 1);
    };
    auto dHv = [](double, double) { return 0.0; };
    auto G = [g1, g2, g3](double v) { return v * (g1 + v * (g2 + v * g3)); };
    auto dG = [g1, g2, g3](double v) { return g1 + v * (2.0 * g2 + 3.0 * v * g3); };
    std::string label = "power_h(h0=" + std::to_string(h0) + ",m=" + std::to_string(m) + ")";
    return ReactionSpec::make(H, dH, dHv, G, dG, label);
}

ReactionSpec with_super_slow_g(const ReactionSpec& h_source, const ModelParams& params) {
    if (params.regime != Regime::SuperSlow)
        throw RegimeError("with_super_slow_g requires super-slow params");
    const double g1 = -params.epsilon * params.epsilon * params.gamma;
    return ReactionSpec::make(
        h_source.H, h_source.dH_dUsq, h_source.dH_dV, [g1](double v) { return g1 * v; },
        [g1](double) { return g1; }, h_source.label + "+super_slow_g");
}

ValidationReport validate_reaction_spec(const ReactionSpec& spec) {
    ValidationReport rep;
    rep.h0 = spec.H0;
    rep.g1 = spec.G1;

    // Finiteness over the probe domain.
    for (const auto& p : probe_points()) {
        require_finite(spec.H(p.u_sq, p.v), "H");
        require_finite(spec.dH_dUsq(p.u_sq, p.v), "dH_dUsq");
        require_finite(spec.dH_dV(p.u_sq, p.v), "dH_dV");
        require_finite(spec.G(p.v), "G");
        require_finite(spec.dG_dV(p.v), "dG_dV");
    }

    {
        double r = std::abs(spec.G(0.0));
        rep.checks.push_back({"G(0)=0", r <= 1e-12, r});
    }

    // Supplied partials vs central differences of H and G.
    const double h = 1e-5;
    double worst_husq = 0.0, worst_hv = 0.0, worst_g = 0.0;
    for (const auto& p : probe_points()) {
        double fd_u = central_diff([&](double u) { return spec.H(u, p.v); }, p.u_sq, h);
        double fd_v = central_diff([&](double v) { return spec.H(p.u_sq, v); }, p.v, h);
        double fd_g = central_diff(spec.G, p.v, h);
        worst_husq = std::max(worst_husq, std::abs(spec.dH_dUsq(p.u_sq, p.v) - fd_u) /
                                              (1.0 + std::abs(fd_u)));
        worst_hv =
            std::max(worst_hv, std::abs(spec.dH_dV(p.u_sq, p.v) - fd_v) / (1.0 + std::abs(fd_v)));
        worst_g = std::max(worst_g, std::abs(spec.dG_dV(p.v) - fd_g) / (1.0 + std::abs(fd_g)));
    }
    rep.checks.push_back({"dH/dUsq matches central difference", worst_husq <= 1e-6, worst_husq});
    rep.checks.push_back({"dH/dV matches central difference", worst_hv <= 1e-6, worst_hv});
    rep.checks.push_back({"dG/dV matches central difference", worst_g <= 1e-6, worst_g});

    // Non-degeneracy: H(1+v, v) must not vanish identically.
    double hmax = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double v = -0.9 + (9.0 + 0.9) * i / 200.0;
        hmax = std::max(hmax, std::abs(spec.H(1.0 + v, v)));
    }
    rep.checks.push_back({"H(1+v,v) non-degenerate", hmax > 1e-10, hmax});

    rep.pass = true;
    for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
    return rep;
}

DecomposedValues decompose_F(const std::function<double(double, double)>& F, double v,
                             double u_sq) {
    const double g = F(1.0 + v, v);
    require_finite(g, "F(1+v,v)");
    const double denom = 1.0 + v - u_sq;
    double hval;
    if (std::abs(denom) > 1e-6) {
        hval = (F(u_sq, v) - g) / denom;
    } else {
        hval = -central_diff([&](double u) { return F(u, v); }, 1.0 + v, 1e-5);
    }
    require_finite(hval, "decomposed H");
    return {hval, g};
}

ReactionSpec reaction_from_F(const std::function<double(double, double)>& F) {
    auto H = [F](double u_sq, double v) { return decompose_F(F, v, u_sq).H; };
    auto dHu = [H](double u_sq, double v) {
        return central_diff([&](double u) { return H(u, v); }, u_sq, 1e-5);
    };
    auto dHv = [H](double u_sq, double v) {
        return central_diff([&](double vv) { return H(u_sq, vv); }, v, 1e-5);
    };
    auto G = [F](double v) { return F(1.0 + v, v); };
    auto dG = [G](double v) { return central_diff(G, v, 1e-5); };
    return ReactionSpec::make(H, dHu, dHv, G, dG, "from_F");
}

namespace {

using json = nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw SchemaError("unknown field \"" + it.key() + "\" in " + where);
    }
}

double num_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw SchemaError("missing field \"" + std::string(key) + "\" in " + where);
    if (!j.at(key).is_number()) throw SchemaError("field \"" + std::string(key) + "\" in " + where + " must be a number");
    return j.at(key).get<double>();
}

// Bilinear table on a rectilinear (u_sq, v) grid, clamped at the edges.
struct TableH {
    std::vector<double> us, vs;
    std::vector<std::vector<double>> vals;  // vals[i][j] at (us[i], vs[j])

    double operator()(double u, double v) const {
        auto locate = [](const std::vector<double>& g, double x, int& i, double& t) {
            if (x <= g.front()) {
                i = 0;
                t = 0.0;
                return;
            }
            if (x >= g.back()) {
                i = static_cast<int>(g.size()) - 2;
                t = 1.0;
                return;
            }
            i = static_cast<int>(std::upper_bound(g.begin(), g.end(), x) - g.begin()) - 1;
            t = (x - g[i]) / (g[i + 1] - g[i]);
        };
        int i, j;
        double s, t;
        locate(us, u, i, s);
        locate(vs, v, j, t);
        return (1 - s) * ((1 - t) * vals[i][j] + t * vals[i][j + 1]) +
               s * ((1 - t) * vals[i + 1][j] + t * vals[i + 1][j + 1]);
    }
};

ReactionSpec h_from_json(const json& jh, std::function<double(double)> G,
                         std::function<double(double)> dG, const std::string& glabel) {
    if (!jh.contains("kind")) throw SchemaError("H descriptor missing \"kind\"");
    const std::string kind = jh.at("kind").get<std::string>();
    if (kind == "power") {
        reject_unknown(jh, {"kind", "h0", "m"}, "H");
        double h0 = num_field(jh, "h0", "H");
        int m = jh.contains("m") ? jh.at("m").get<int>() : 1;
        auto base = make_power_linear(h0, m, -1.0);
        return ReactionSpec::make(base.H, base.dH_dUsq, base.dH_dV, G, dG,
                                  base.label + "+" + glabel);
    }
    if (kind == "table") {
        reject_unknown(jh, {"kind", "u_sq", "v", "values"}, "H");
        TableH tab;
        tab.us = jh.at("u_sq").get<std::vector<double>>();
        tab.vs = jh.at("v").get<std::vector<double>>();
        tab.vals = jh.at("values").get<std::vector<std::vector<double>>>();
        if (tab.us.size() < 2 || tab.vs.size() < 2 || tab.vals.size() != tab.us.size())
            throw SchemaError("H table: need >=2 grid points per axis and matching values");
        for (const auto& row : tab.vals)
            if (row.size() != tab.vs.size()) throw SchemaError("H table: ragged values");
        auto H = [tab](double u, double v) { return tab(u, v); };
        auto dHu = [H](double u, double v) {
            return central_diff([&](double uu) { return H(uu, v); }, u, 1e-5);
        };
        auto dHv = [H](double u, double v) {
            return central_diff([&](double vv) { return H(u, vv); }, v, 1e-5);
        };
        return ReactionSpec::make(H, dHu, dHv, G, dG, "table_h+" + glabel);
    }
    throw SchemaError("H descriptor: unknown kind \"" + kind + "\"");
}

}  // namespace

ModelDescriptor parse_model_descriptor(const nlohmann::basic_json<>& jin) {
    const json& j = jin;
    if (!j.is_object()) throw SchemaError("model descriptor must be a JSON object");
    reject_unknown(j, {"epsilon", "tau", "regime", "H", "G"}, "model descriptor");
    ModelParams params;
    params.epsilon = num_field(j, "epsilon", "model descriptor");
    params.tau = num_field(j, "tau", "model descriptor");

    if (!j.contains("regime")) throw SchemaError("model descriptor missing \"regime\"");
    const json& jr = j.at("regime");
    reject_unknown(jr, {"regular", "super_slow"}, "regime");
    if (jr.contains("regular") == jr.contains("super_slow"))
        throw SchemaError("regime must contain exactly one of \"regular\" / \"super_slow\"");

    std::function<double(double)> G, dG;
    std::string glabel;
    if (jr.contains("super_slow")) {
        const json& js = jr.at("super_slow");
        reject_unknown(js, {"gamma"}, "regime.super_slow");
        params.regime = Regime::SuperSlow;
        params.gamma = num_field(js, "gamma", "regime.super_slow");
        params.g1 = -params.epsilon * params.epsilon * params.gamma;
        if (j.contains("G"))
            throw SchemaError("super_slow regime fixes G(V) = -eps^2*gamma*V; \"G\" must be omitted");
        const double g1 = params.g1;
        G = [g1](double v) { return g1 * v; };
        dG = [g1](double) { return g1; };
        glabel = "super_slow_g";
    } else {
        const json& jg = jr.at("regular");
        reject_unknown(jg, {"g1"}, "regime.regular");
        params.regime = Regime::Regular;
        params.g1 = num_field(jg, "g1", "regime.regular");
        if (!j.contains("G")) throw SchemaError("regular regime requires a \"G\" descriptor");
        const json& jG = j.at("G");
        if (!jG.contains("kind")) throw SchemaError("G descriptor missing \"kind\"");
        const std::string kind = jG.at("kind").get<std::string>();
        double g1 = 0, g2 = 0, g3 = 0;
        if (kind == "linear") {
            reject_unknown(jG, {"kind", "g1"}, "G");
            g1 = num_field(jG, "g1", "G");
        } else if (kind == "cubic") {
            reject_unknown(jG, {"kind", "g1", "g2", "g3"}, "G");
            g1 = num_field(jG, "g1", "G");
            g2 = num_field(jG, "g2", "G");
            g3 = num_field(jG, "g3", "G");
        } else {
            throw SchemaError("G descriptor: unknown kind \"" + kind + "\"");
        }
        if (std::abs(g1 - params.g1) > 1e-12)
            throw SchemaError("G descriptor g1 disagrees with regime.regular.g1");
        G = [g1, g2, g3](double v) { return v * (g1 + v * (g2 + v * g3)); };
        dG = [g1, g2, g3](double v) { return g1 + v * (2 * g2 + 3 * v * g3); };
        glabel = kind + "_g";
    }

    params.validate();
    if (!j.contains("H")) throw SchemaError("model descriptor missing \"H\"");
    ModelDescriptor d{params, h_from_json(j.at("H"), G, dG, glabel)};
    return d;
}

}  // namespace bistable
