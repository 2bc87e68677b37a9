#pragma once

#include <optional>
#include <vector>

#include "bistable/fast_field.hpp"
#include "bistable/model.hpp"

namespace bistable {

// Heteroclinic front branches in the super-slow regime solve
//   g(v) = sqrt(gamma) * v - (1/2) J(v) = 0,
// where J is the fast-field jump integral. Folds (saddle-nodes of
// heteroclinic orbits) solve g = g' = 0 simultaneously.

struct BranchPoint {
    double v0 = 0.0;
    double gamma = 0.0;
    int branch_index = 1;  // ordering by v0
    bool transversal = true;
    double residual = 0.0;
};

struct FoldPoint {
    double gamma_double = 0.0;
    double v_fold = 0.0;
    int contact_order = 2;
};

enum class FrontConstruction { CompositeAsymptotic, BVPRefined };

struct FrontProfile {
    std::vector<double> x;  // uniform, symmetric about 0, N+1 nodes
    std::vector<double> U;
    std::vector<double> V;
    double v0 = 0.0;
    FrontConstruction construction = FrontConstruction::CompositeAsymptotic;
    ModelParams params;

    double half_width() const { return x.empty() ? 0.0 : x.back(); }
    double dx() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
    double sample_U(double xq) const;
    double sample_V(double xq) const;
};

// Extremal slow value of the regular front, eps * (J(0)/2) / sqrt(-G1).
double regular_front_v_peak(const ModelParams& params, const ReactionSpec& spec);

// All roots of g on (-0.9, v_max], scan step 1e-3 plus bisection and Newton
// polish. An empty list is a valid outcome.
std::vector<BranchPoint> find_branches(const ModelParams& params, const ReactionSpec& spec,
                                       double v_max = 50.0);

struct FoldWindow {
    double v_min = -0.9;
    double v_max = 50.0;
};

// Solves {g = 0, g' = 0} by damped Newton from a scan seed; NoFoldFound if the
// take-off curve admits no tangency in the window.
FoldPoint find_fold(const ModelParams& params, const ReactionSpec& spec,
                    const FoldWindow& window = {});

// Suggested half-width so the slow tails decay below ~1e-5.
double default_domain_half_width(const ModelParams& params);

FrontProfile build_composite_front(double v0, const ModelParams& params,
                                   const ReactionSpec& spec, double L, int N);

struct BvpOptions {
    std::optional<double> L;  // re-sample the seed to this window
    std::optional<int> N;     // full-grid intervals (even)
    int max_iter = 50;
    double tol = 1e-9;
};

// Newton on the finite-difference discretization of the stationary system on
// the symmetric half-domain (u(0)=0, v'(0)=0) with slow-manifold and
// decay-rate conditions at x=L. Throws NoConvergence with the final residual.
FrontProfile refine_front_bvp(const FrontProfile& seed, const ModelParams& params,
                              const ReactionSpec& spec, const BvpOptions& opts = {});

struct DestabilizationType {
    enum class Kind { TypeD, TypeE } kind = Kind::TypeE;
    std::optional<FoldPoint> fold;  // set for TypeD
    double gamma_end = 0.0;         // gamma reached by the continuation
    double v_end = 0.0;
};

// Continues the regular root in (gamma, v0) by pseudo-arclength from
// gamma_hi down; TypeD if the branch turns (with the fold polished), TypeE if
// it reaches gamma_lo with v0 finite.
DestabilizationType classify_destabilization_type(const ReactionSpec& spec, double gamma_hi,
                                                  double gamma_lo = 1e-4);

}  // namespace bistable
