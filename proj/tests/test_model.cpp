#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <nlohmann/json.hpp>

#include "bistable/errors.hpp"
#include "bistable/model.hpp"

using namespace bistable;
using json = nlohmann::json;

TEST_CASE("params validation") {
    REQUIRE_NOTHROW(ModelParams::regular(0.1, 1.0, -1.0));
    REQUIRE_THROWS_AS(ModelParams::regular(0.0, 1.0, -1.0), ValidationError);
    REQUIRE_THROWS_AS(ModelParams::regular(0.6, 1.0, -1.0), ValidationError);
    REQUIRE_THROWS_AS(ModelParams::regular(0.1, 1e3, -1.0), ValidationError);
    REQUIRE_THROWS_AS(ModelParams::regular(0.1, 1.0, 0.5), ValidationError);
    // warn above 0.2 but accept
    auto warnings = ModelParams::regular(0.3, 1.0, -1.0).validate();
    REQUIRE_FALSE(warnings.empty());
    // super-slow stores gamma; negative gamma is legal (unstable background)
    auto ss = ModelParams::super_slow(0.1, 1.0, -0.1);
    REQUIRE(ss.effective_g1() == Catch::Approx(0.001));
}

TEST_CASE("builtin power spec caches") {
    auto s = make_power_linear(1.0, 1, -1.0);
    REQUIRE(s.H0 == Catch::Approx(1.0));
    REQUIRE(s.G1 == Catch::Approx(-1.0));
    REQUIRE(s.H(4.0, 0.3) == Catch::Approx(4.0));
    REQUIRE(s.dH_dUsq(4.0, 0.3) == Catch::Approx(1.0));
    // caches equal direct evaluations exactly
    REQUIRE(s.H0 == s.H(1.0, 0.0));
    REQUIRE(s.G1 == s.dG_dV(0.0));
}

TEST_CASE("validate_reaction_spec passes the paper family") {
    // H = H0*U^2, G = -eps^2*gamma*V
    const double eps = 0.1, gamma = 2.0;
    auto params = ModelParams::super_slow(eps, 1.0, gamma);
    auto spec = with_super_slow_g(make_power_linear(1.0, 1, -1.0), params);
    auto rep = validate_reaction_spec(spec);
    REQUIRE(rep.pass);
    REQUIRE(rep.h0 == Catch::Approx(1.0));
    REQUIRE(rep.g1 == Catch::Approx(-eps * eps * gamma));
}

TEST_CASE("validate_reaction_spec rejects degenerate H") {
    // H == 0 fails non-degeneracy
    auto zero = ReactionSpec::make([](double, double) { return 0.0; },
                                   [](double, double) { return 0.0; },
                                   [](double, double) { return 0.0; },
                                   [](double) { return 0.0; }, [](double) { return 0.0; });
    auto rep = validate_reaction_spec(zero);
    REQUIRE_FALSE(rep.pass);

    // H = (1+V-U^2)*U^2 has H(1+v,v) == 0: the excluded degenerate class
    auto degen = ReactionSpec::make(
        [](double usq, double v) { return (1.0 + v - usq) * usq; },
        [](double usq, double v) { return (1.0 + v) - 2.0 * usq; },
        [](double usq, double) { return usq; }, [](double) { return 0.0; },
        [](double) { return 0.0; });
    auto rep2 = validate_reaction_spec(degen);
    REQUIRE_FALSE(rep2.pass);
    bool nondegen_failed = false;
    for (const auto& c : rep2.checks)
        if (c.name == "H(1+v,v) non-degenerate" && !c.pass) nondegen_failed = true;
    REQUIRE(nondegen_failed);
}

TEST_CASE("validate_reaction_spec catches wrong derivatives and G(0) != 0") {
    auto bad_deriv = ReactionSpec::make(
        [](double usq, double) { return usq; }, [](double, double) { return 2.0; },  // wrong
        [](double, double) { return 0.0; }, [](double v) { return -v; },
        [](double) { return -1.0; });
    REQUIRE_FALSE(validate_reaction_spec(bad_deriv).pass);

    auto bad_g0 = ReactionSpec::make([](double usq, double) { return usq; },
                                     [](double, double) { return 1.0; },
                                     [](double, double) { return 0.0; },
                                     [](double v) { return -v + 0.5; },  // G(0) != 0
                                     [](double) { return -1.0; });
    REQUIRE_FALSE(validate_reaction_spec(bad_g0).pass);
}

TEST_CASE("non-finite evaluation is reported") {
    auto nanspec = ReactionSpec::make(
        [](double usq, double v) { return usq / (v + 0.9); },  // infinite at probe v=-0.9
        [](double, double v) { return 1.0 / (v + 0.9); }, [](double, double) { return 0.0; },
        [](double v) { return -v; }, [](double) { return -1.0; });
    REQUIRE_THROWS_AS(validate_reaction_spec(nanspec), NonFiniteEvaluation);
}

TEST_CASE("decompose_F factored form") {
    auto F = [](double usq, double v) { return (1.0 + v - usq) * usq; };
    auto d = decompose_F(F, 0.0, 4.0);
    REQUIRE(d.H == Catch::Approx(4.0));
    REQUIRE(d.G == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("decompose_F general linear F") {
    // F = H0 + (H0+G1)V - H0*U^2 with H0=2, G1=-1: G(v) = G1*v, H = H0
    const double H0 = 2.0, G1 = -1.0;
    auto F = [=](double usq, double v) { return H0 + (H0 + G1) * v - H0 * usq; };
    auto d = decompose_F(F, 1.0, 1.0);
    REQUIRE(d.G == Catch::Approx(-1.0));
    REQUIRE(d.H == Catch::Approx(2.0));
    // removable singularity branch agrees with the quotient branch as
    // u_sq -> 1+v
    auto dlim = decompose_F(F, 1.0, 2.0 - 1e-9);
    auto dq = decompose_F(F, 1.0, 2.0 - 1e-3);
    REQUIRE(dlim.H == Catch::Approx(dq.H).margin(1e-4));
}

TEST_CASE("reaction_from_F reconstructs F") {
    const double H0 = 1.5, G1 = -0.7;
    auto F = [=](double usq, double v) {
        return H0 * usq * (1.0 + v - usq) + G1 * v + 0.1 * v * v;
    };
    auto spec = reaction_from_F(F);
    for (double usq : {0.0, 0.7, 2.0, 5.0}) {
        for (double v : {-0.5, 0.0, 1.0, 4.0}) {
            const double recon = (1.0 + v - usq) * spec.H(usq, v) + spec.G(v);
            REQUIRE(recon == Catch::Approx(F(usq, v)).margin(1e-10));
        }
    }
    REQUIRE(validate_reaction_spec(spec).pass);
    // F with F(1,0) != 0 fails the G(0)=0 gate
    auto bad = reaction_from_F([](double, double) { return 1.0; });
    REQUIRE_FALSE(validate_reaction_spec(bad).pass);
}

TEST_CASE("json descriptor round trip and strictness") {
    json j = {{"epsilon", 0.1},
              {"tau", 1.0},
              {"regime", {{"super_slow", {{"gamma", 2.0}}}}},
              {"H", {{"kind", "power"}, {"h0", 1.0}, {"m", 1}}}};
    auto d = parse_model_descriptor(j);
    REQUIRE(d.params.regime == Regime::SuperSlow);
    REQUIRE(d.spec.H0 == Catch::Approx(1.0));
    REQUIRE(d.spec.G1 == Catch::Approx(-0.02));

    json unknown = j;
    unknown["extra"] = 1;
    REQUIRE_THROWS_AS(parse_model_descriptor(unknown), SchemaError);
    json unknown2 = j;
    unknown2["H"]["mm"] = 2;
    REQUIRE_THROWS_AS(parse_model_descriptor(unknown2), SchemaError);

    json reg = {{"epsilon", 0.1},
                {"tau", 1.0},
                {"regime", {{"regular", {{"g1", -1.0}}}}},
                {"H", {{"kind", "power"}, {"h0", 1.0}, {"m", 1}}},
                {"G", {{"kind", "linear"}, {"g1", -1.0}}}};
    auto dr = parse_model_descriptor(reg);
    REQUIRE(dr.params.regime == Regime::Regular);
    REQUIRE(dr.spec.G1 == Catch::Approx(-1.0));

    json mismatch = reg;
    mismatch["G"]["g1"] = -2.0;
    REQUIRE_THROWS_AS(parse_model_descriptor(mismatch), SchemaError);

    // super_slow with explicit G is rejected
    json ssg = j;
    ssg["G"] = {{"kind", "linear"}, {"g1", -0.02}};
    REQUIRE_THROWS_AS(parse_model_descriptor(ssg), SchemaError);
}

TEST_CASE("json table H") {
    json j = {{"epsilon", 0.1},
              {"tau", 1.0},
              {"regime", {{"regular", {{"g1", -1.0}}}}},
              {"H",
               {{"kind", "table"},
                {"u_sq", {0.0, 5.0, 10.0}},
                {"v", {-1.0, 4.0, 9.0}},
                {"values", {{1.0, 1.0, 1.0}, {6.0, 6.0, 6.0}, {11.0, 11.0, 11.0}}}}},
              {"G", {{"kind", "linear"}, {"g1", -1.0}}}};
    auto d = parse_model_descriptor(j);
    // table is linear in u_sq: H = 1 + u_sq
    REQUIRE(d.spec.H(2.5, 0.0) == Catch::Approx(3.5));
    REQUIRE(d.spec.H0 == Catch::Approx(2.0));
    REQUIRE(validate_reaction_spec(d.spec).pass);
}

TEST_CASE("reconstruction identity for decomposed specs") {
    // (1+V-U^2) H + G - F == 0 on probes for a spec built from F
    auto F = [](double usq, double v) {
        return (1.0 + v - usq) * (0.5 + usq) - 0.8 * v + 0.05 * v * v * v;
    };
    auto spec = reaction_from_F(F);
    for (double usq : {0.0, 1.0, 3.3, 9.0})
        for (double v : {-0.9, 0.0, 2.0, 9.0}) {
            if (std::abs(1.0 + v - usq) < 1e-5) continue;
            const double resid = (1.0 + v - usq) * spec.H(usq, v) + spec.G(v) - F(usq, v);
            REQUIRE(std::abs(resid) < 1e-10);
        }
}
