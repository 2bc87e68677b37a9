#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bistable/errors.hpp"

#include <nlohmann/json_fwd.hpp>

namespace bistable {

enum class Regime { Regular, SuperSlow };

// Scalar parameters of the two-component system: epsilon is the square root
// of the diffusion ratio, tau the time constant of the slow component. The
// regime tag records whether the slow linear rate g1 is O(1) (Regular) or
// written as g1 = -eps^2*gamma (SuperSlow).
struct ModelParams {
    double epsilon = 0.1;
    double tau = 1.0;
    Regime regime = Regime::Regular;
    double g1 = -1.0;     // Regular only
    double gamma = 0.0;   // SuperSlow only

    static ModelParams regular(double eps, double tau, double g1);
    static ModelParams super_slow(double eps, double tau, double gamma);

    // g1 as seen by the linearized equations, whichever regime.
    double effective_g1() const {
        return regime == Regime::Regular ? g1 : -epsilon * epsilon * gamma;
    }

    // Throws ValidationError on hard violations; returns soft warnings.
    std::vector<std::string> validate() const;
};

// Evaluatable nonlinearities H(u^2, v) and G(v) with analytic first partials.
// H0 = H(1,0) and G1 = dG/dV(0) are cached at construction.
struct ReactionSpec {
    std::function<double(double, double)> H;        // (u_sq, v)
    std::function<double(double, double)> dH_dUsq;  // partial w.r.t. u^2
    std::function<double(double, double)> dH_dV;
    std::function<double(double)> G;
    std::function<double(double)> dG_dV;
    double H0 = 0.0;
    double G1 = 0.0;
    std::string label;

    static ReactionSpec make(std::function<double(double, double)> H,
                             std::function<double(double, double)> dH_dUsq,
                             std::function<double(double, double)> dH_dV,
                             std::function<double(double)> G,
                             std::function<double(double)> dG_dV, std::string label = {});
};

// Built-in nonlinearity library.
// PowerH: H = h0 * (u^2)^m, m in {0,1,2}. LinearG: G = g1*v.
// CubicG: G = g1*v + g2*v^2 + g3*v^3.
ReactionSpec make_power_linear(double h0, int m, double g1);
ReactionSpec make_power_cubic(double h0, int m, double g1, double g2, double g3);

// The spec the super-slow analysis assumes: H as given, G(v) = -eps^2*gamma*v.
ReactionSpec with_super_slow_g(const ReactionSpec& h_source, const ModelParams& params);

struct ValidationCheck {
    std::string name;
    bool pass = false;
    double residual = 0.0;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool pass = false;
    double h0 = 0.0;
    double g1 = 0.0;
};

// Checks the structural assumptions on the probe domain
// (u_sq, v) in [0,9] x [-0.9, 9]: G(0)=0, derivative consistency against
// central differences, and non-degeneracy of H(1+v, v).
ValidationReport validate_reaction_spec(const ReactionSpec& spec);

// Pointwise F -> (H, G) split: G = F(1+v, v), H the quotient
// (F - G)/(1+v-u_sq), with the removable singularity at u_sq = 1+v filled by
// -dF/d(u_sq) via a central difference.
struct DecomposedValues {
    double H;
    double G;
};
DecomposedValues decompose_F(const std::function<double(double, double)>& F, double v,
                             double u_sq);

// Full spec derived from F; derivatives of the induced H, G by central
// differences.
ReactionSpec reaction_from_F(const std::function<double(double, double)>& F);

// JSON model descriptor. Field names are fixed; unknown fields are rejected.
struct ModelDescriptor {
    ModelParams params;
    ReactionSpec spec;
};
ModelDescriptor parse_model_descriptor(const nlohmann::basic_json<>& j);

}  // namespace bistable
