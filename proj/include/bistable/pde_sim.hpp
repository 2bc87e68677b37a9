#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bistable/model.hpp"

namespace bistable {

// Direct time integration of the full system on [-L, L] with Neumann
// boundary conditions. Diffusion is treated implicitly (Crank-Nicolson,
// tridiagonal solves), the reaction explicitly (Adams-Bashforth 2), so the
// step is second order in dt and unconditionally stable for the stiff
// diffusive part.

struct SimConfig {
    double L = 50.0;
    int N = 2048;             // grid intervals (even); N+1 nodes
    double dt = 0.005;
    double t_final = 200.0;
    double blowup_threshold = 1e3;    // on max|U|
    double collapse_threshold = 1e-3; // on max|U|
    double safety = 8.0;              // explicit-reaction stability budget factor
    int record_every = 20;            // series cadence in steps
    bool disable_reaction = false;    // diagnostic switch for scheme tests

    double dx() const { return 2.0 * L / N; }
    void validate(const ModelParams& params) const;
};

struct SimState {
    double t = 0.0;
    std::vector<double> U, V;
};

SimState initial_front(const SimConfig& config, const ModelParams& params,
                       const ReactionSpec& spec, double v0);

class Stepper {
  public:
    Stepper(SimConfig config, ModelParams params, ReactionSpec spec);

    void step(SimState& state);
    const SimConfig& config() const { return cfg_; }

  private:
    void reaction(const SimState& s, std::vector<double>& ru, std::vector<double>& rv) const;
    SimConfig cfg_;
    ModelParams params_;
    ReactionSpec spec_;
    // cached tridiagonal factors for (I - dt/2 c Lap)
    struct Tri {
        std::vector<double> dl, d, du;  // factorized in-place Thomas
    };
    Tri make_tri(double c) const;
    void solve_tri(const Tri& t, std::vector<double>& rhs) const;
    Tri tri_u_, tri_v_;
    double cu_ = 0.0, cv_ = 0.0;
    std::vector<double> ru_prev_, rv_prev_;
    bool have_prev_ = false;
};

enum class SimVerdict { Persists, BlowUp, Collapse };
std::string to_string(SimVerdict v);

struct SimSeries {
    std::vector<double> t, max_u, max_v, front_pos, background_dev;
};

struct SimOutcome {
    SimVerdict verdict = SimVerdict::Persists;
    std::optional<double> t_blow;
    std::optional<double> v_growth_rate;  // fitted over the trailing window
    double drift = 0.0;
    SimSeries series;
};

// Integrates to t_final (blow-up ends the run early); the collapse growth
// rate is fitted by least squares on log max|V| over the final 25% of the
// samples, provided max|V| grew monotonically there.
SimOutcome run_and_classify(const SimConfig& config, const ModelParams& params,
                            const ReactionSpec& spec, double v0);
SimOutcome run_and_classify_state(SimState state, const SimConfig& config,
                                  const ModelParams& params, const ReactionSpec& spec);

double front_position(const std::vector<double>& x, const std::vector<double>& U,
                      double previous);

}  // namespace bistable
