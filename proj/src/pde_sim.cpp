#include "bistable/pde_sim.hpp"

#include <algorithm>
#include <cmath>

#include "bistable/errors.hpp"
#include "bistable/fast_field.hpp"

namespace bistable {

void SimConfig::validate(const ModelParams& params) const {
    if (N < 16 || N % 2 != 0) throw GridError("sim: N must be even and >= 16");
    if (!(L > 0.0)) throw GridError("sim: L must be positive");
    if (!(dt > 0.0) || !(t_final > 0.0)) throw ValidationError("sim: dt and t_final must be > 0");
    if (!(blowup_threshold > 1.0)) throw ValidationError("sim: blowup_threshold must exceed 1");
    if (!(collapse_threshold > 0.0) || collapse_threshold >= 1.0)
        throw ValidationError("sim: collapse_threshold must lie in (0, 1)");
    const double budget =
        0.4 * dx() * dx() / std::max(params.epsilon * params.epsilon, 1.0) * safety;
    if (dt > budget)
        throw ValidationError("sim: dt=" + std::to_string(dt) +
                              " exceeds the stability budget " + std::to_string(budget));
}

SimState initial_front(const SimConfig& config, const ModelParams& params,
                       const ReactionSpec& spec, double v0) {
    (void)spec;
    if (!(v0 > -1.0)) throw GridError("initial_front: v0 must exceed -1");
    SimState s;
    const int N = config.N;
    s.U.resize(N + 1);
    s.V.resize(N + 1);
    double rate;
    if (params.regime == Regime::SuperSlow)
        rate = params.epsilon * std::sqrt(std::abs(params.gamma));
    else
        rate = std::sqrt(-params.g1);
    FastFront fast(v0);
    for (int j = 0; j <= N; ++j) {
        const double x = -config.L + j * config.dx();
        s.U[j] = fast.u0(x / params.epsilon);
        s.V[j] = v0 * std::exp(-rate * std::abs(x));
    }
    // Neumann-compatible ends: zero slope at the boundary nodes.
    s.U[0] = s.U[1];
    s.U[N] = s.U[N - 1];
    s.V[0] = s.V[1];
    s.V[N] = s.V[N - 1];
    return s;
}

Stepper::Stepper(SimConfig config, ModelParams params, ReactionSpec spec)
    : cfg_(std::move(config)), params_(std::move(params)), spec_(std::move(spec)) {
    cfg_.validate(params_);
    cu_ = params_.epsilon * params_.epsilon;
    cv_ = 1.0 / params_.tau;
    tri_u_ = make_tri(cu_);
    tri_v_ = make_tri(cv_);
}

Stepper::Tri Stepper::make_tri(double c) const {
    // (I - (dt/2) c Lap) with mirrored Neumann end rows, pre-factorized.
    const int n = cfg_.N + 1;
    const double a = 0.5 * cfg_.dt * c / (cfg_.dx() * cfg_.dx());
    Tri t;
    t.dl.assign(n, -a);
    t.du.assign(n, -a);
    t.d.assign(n, 1.0 + 2.0 * a);
    t.du[0] = -2.0 * a;
    t.dl[n - 1] = -2.0 * a;
    // Thomas forward elimination stored in-place.
    for (int i = 1; i < n; ++i) {
        t.dl[i] /= t.d[i - 1];
        t.d[i] -= t.dl[i] * t.du[i - 1];
    }
    return t;
}

void Stepper::solve_tri(const Tri& t, std::vector<double>& rhs) const {
    const int n = static_cast<int>(rhs.size());
    for (int i = 1; i < n; ++i) rhs[i] -= t.dl[i] * rhs[i - 1];
    rhs[n - 1] /= t.d[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - t.du[i] * rhs[i + 1]) / t.d[i];
}

void Stepper::reaction(const SimState& s, std::vector<double>& ru,
                       std::vector<double>& rv) const {
    const int n = cfg_.N + 1;
    ru.resize(n);
    rv.resize(n);
    if (cfg_.disable_reaction) {
        std::fill(ru.begin(), ru.end(), 0.0);
        std::fill(rv.begin(), rv.end(), 0.0);
        return;
    }
    const double itau = 1.0 / params_.tau;
    for (int j = 0; j < n; ++j) {
        const double U = s.U[j], V = s.V[j];
        const double fac = 1.0 + V - U * U;
        ru[j] = fac * U;
        rv[j] = itau * (fac * spec_.H(U * U, V) + spec_.G(V));
    }
}

void Stepper::step(SimState& state) {
    const int n = cfg_.N + 1;
    const double dt = cfg_.dt;
    std::vector<double> ru(n), rv(n);
    reaction(state, ru, rv);
    if (!have_prev_) {
        ru_prev_ = ru;
        rv_prev_ = rv;
        have_prev_ = true;
    }
    const double ih2 = 1.0 / (cfg_.dx() * cfg_.dx());
    auto lap = [&](const std::vector<double>& w, int j) {
        const int jm = (j == 0) ? 1 : j - 1;
        const int jp = (j == n - 1) ? n - 2 : j + 1;
        return (w[jm] - 2.0 * w[j] + w[jp]) * ih2;
    };
    std::vector<double> bu(n), bv(n);
    for (int j = 0; j < n; ++j) {
        bu[j] = state.U[j] + 0.5 * dt * cu_ * lap(state.U, j) +
                dt * (1.5 * ru[j] - 0.5 * ru_prev_[j]);
        bv[j] = state.V[j] + 0.5 * dt * cv_ * lap(state.V, j) +
                dt * (1.5 * rv[j] - 0.5 * rv_prev_[j]);
    }
    solve_tri(tri_u_, bu);
    solve_tri(tri_v_, bv);
    state.U.swap(bu);
    state.V.swap(bv);
    state.t += dt;
    ru_prev_.swap(ru);
    rv_prev_.swap(rv);
}

std::string to_string(SimVerdict v) {
    switch (v) {
        case SimVerdict::Persists: return "Persists";
        case SimVerdict::BlowUp: return "BlowUp";
        case SimVerdict::Collapse: return "Collapse";
    }
    return "?";
}

double front_position(const std::vector<double>& x, const std::vector<double>& U,
                      double previous) {
    double best = previous;
    double best_dist = 1e300;
    for (std::size_t j = 0; j + 1 < U.size(); ++j) {
        if ((U[j] <= 0.0) != (U[j + 1] <= 0.0)) {
            const double t = U[j] / (U[j] - U[j + 1]);
            const double pos = x[j] + t * (x[j + 1] - x[j]);
            const double d = std::abs(pos - previous);
            if (d < best_dist) {
                best_dist = d;
                best = pos;
            }
        }
    }
    return best;
}

SimOutcome run_and_classify(const SimConfig& config, const ModelParams& params,
                            const ReactionSpec& spec, double v0) {
    return run_and_classify_state(initial_front(config, params, spec, v0), config, params, spec);
}

SimOutcome run_and_classify_state(SimState state, const SimConfig& config,
                                  const ModelParams& params, const ReactionSpec& spec) {
    Stepper stepper(config, params, spec);
    SimOutcome out;
    std::vector<double> xg(config.N + 1);
    for (int j = 0; j <= config.N; ++j) xg[j] = -config.L + j * config.dx();
    const int bg = std::max(1, static_cast<int>(2.0 / config.dx()));  // ~2 units from the ends

    double pos0 = front_position(xg, state.U, 0.0);
    double pos = pos0;
    bool collapsed = false;

    auto record = [&](const SimState& s) {
        double mu = 0.0, mv = 0.0;
        for (double u : s.U) mu = std::max(mu, std::abs(u));
        for (double v : s.V) mv = std::max(mv, std::abs(v));
        pos = front_position(xg, s.U, pos);
        const int nr = config.N;
        const double bgdev =
            std::max({std::abs(s.U[bg] + 1.0), std::abs(s.U[nr - bg] - 1.0),
                      std::abs(s.V[bg]), std::abs(s.V[nr - bg])});
        out.series.t.push_back(s.t);
        out.series.max_u.push_back(mu);
        out.series.max_v.push_back(mv);
        out.series.front_pos.push_back(pos);
        out.series.background_dev.push_back(bgdev);
        return std::pair{mu, mv};
    };
    record(state);

    const long n_steps = static_cast<long>(std::ceil(config.t_final / config.dt));
    for (long k = 1; k <= n_steps; ++k) {
        stepper.step(state);
        bool finite = true;
        double mu = 0.0;
        for (double u : state.U) {
            if (!std::isfinite(u)) finite = false;
            mu = std::max(mu, std::abs(u));
        }
        for (double v : state.V)
            if (!std::isfinite(v)) finite = false;
        if (!finite || mu > config.blowup_threshold) {
            record(state);
            out.verdict = SimVerdict::BlowUp;
            out.t_blow = state.t;
            out.drift = std::abs(pos - pos0);
            return out;
        }
        if (mu < config.collapse_threshold) collapsed = true;
        if (k % config.record_every == 0 || k == n_steps) record(state);
    }

    out.drift = std::abs(pos - pos0);
    if (collapsed) {
        out.verdict = SimVerdict::Collapse;
        // Fit log max|V| over the last quarter of the samples if monotone.
        const std::size_t ns = out.series.t.size();
        const std::size_t i0 = ns - std::max<std::size_t>(3, ns / 4);
        bool monotone = true;
        for (std::size_t i = i0 + 1; i < ns; ++i)
            if (out.series.max_v[i] < out.series.max_v[i - 1]) monotone = false;
        if (monotone && out.series.max_v[i0] > 0.0) {
            double st = 0, sy = 0, stt = 0, sty = 0;
            const double n = static_cast<double>(ns - i0);
            for (std::size_t i = i0; i < ns; ++i) {
                const double t = out.series.t[i];
                const double y = std::log(out.series.max_v[i]);
                st += t;
                sy += y;
                stt += t * t;
                sty += t * y;
            }
            out.v_growth_rate = (n * sty - st * sy) / (n * stt - st * st);
        }
    } else {
        out.verdict = SimVerdict::Persists;
    }
    return out;
}

}  // namespace bistable
