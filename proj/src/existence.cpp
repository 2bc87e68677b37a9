#include "bistable/existence.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "bistable/errors.hpp"

namespace bistable {

namespace {

constexpr double kVFloor = -0.9;  // probe-domain validity floor

double half_J(double v, const ReactionSpec& spec, double tol) {
    return 0.5 * jump_integral_J(v, spec, tol).value;
}

double g_of_v(double v, double sqrt_gamma, const ReactionSpec& spec, double tol) {
    return sqrt_gamma * v - half_J(v, spec, tol);
}

double g_prime(double v, double sqrt_gamma, const ReactionSpec& spec, double tol) {
    auto s = stability_integrals(v, spec, tol);
    return sqrt_gamma - (s.I1 + 2.0 * s.I2) / (4.0 * (1.0 + v));
}

}  // namespace

double FrontProfile::sample_U(double xq) const {
    if (x.empty()) throw GridError("empty front profile");
    if (xq <= x.front()) return U.front();
    if (xq >= x.back()) return U.back();
    const double h = dx();
    const auto i = static_cast<std::size_t>((xq - x.front()) / h);
    const double t = (xq - x[i]) / h;
    return (1.0 - t) * U[i] + t * U[i + 1];
}

double FrontProfile::sample_V(double xq) const {
    if (x.empty()) throw GridError("empty front profile");
    if (xq <= x.front()) return V.front();
    if (xq >= x.back()) return V.back();
    const double h = dx();
    const auto i = static_cast<std::size_t>((xq - x.front()) / h);
    const double t = (xq - x[i]) / h;
    return (1.0 - t) * V[i] + t * V[i + 1];
}

double regular_front_v_peak(const ModelParams& params, const ReactionSpec& spec) {
    if (params.regime != Regime::Regular)
        throw RegimeError("regular_front_v_peak requires the Regular regime");
    const double g1 = spec.G1;
    if (!(g1 < 0.0)) throw RegimeError("regular_front_v_peak requires G1 < 0");
    if (std::abs(g1) < 10.0 * params.epsilon * params.epsilon)
        throw RegimeError("G1 is not O(1) relative to eps^2; use the super-slow machinery");
    return params.epsilon * half_J(0.0, spec, 1e-10) / std::sqrt(-g1);
}

std::vector<BranchPoint> find_branches(const ModelParams& params, const ReactionSpec& spec,
                                       double v_max) {
    if (params.regime != Regime::SuperSlow)
        throw RegimeError("find_branches requires super-slow params");
    if (!(params.gamma > 0.0)) throw PreconditionError("find_branches requires gamma > 0");
    if (!(v_max > 0.0) || v_max > 50.0)
        throw PreconditionError("v_max must lie in (0, 50], got " + std::to_string(v_max));

    const double sg = std::sqrt(params.gamma);
    const double scan_tol = 1e-6;   // bracketing only
    const double root_tol = 1e-10;  // bisection + polish

    std::vector<BranchPoint> out;
    const double step = 1e-3;
    double v_prev = kVFloor + 1e-9;
    double g_prev = g_of_v(v_prev, sg, spec, scan_tol);
    for (double v = v_prev + step; v <= v_max + 0.5 * step; v += step) {
        const double g = g_of_v(v, sg, spec, scan_tol);
        if ((g_prev <= 0.0) != (g <= 0.0) || g == 0.0) {
            // Bisection to |g| < root_tol at full quadrature accuracy.
            double a = v_prev, b = v, ga = g_of_v(a, sg, spec, root_tol);
            double root = 0.5 * (a + b);
            for (int it = 0; it < 200; ++it) {
                root = 0.5 * (a + b);
                double gm = g_of_v(root, sg, spec, root_tol);
                if (std::abs(gm) < root_tol) break;
                if ((ga <= 0.0) == (gm <= 0.0)) {
                    a = root;
                    ga = gm;
                } else {
                    b = root;
                }
            }
            // Newton polish with the integrand-derivative formula.
            for (int it = 0; it < 8; ++it) {
                const double gv = g_of_v(root, sg, spec, root_tol);
                const double dgv = g_prime(root, sg, spec, root_tol);
                if (std::abs(dgv) < 1e-14) break;
                const double upd = gv / dgv;
                root -= upd;
                if (std::abs(upd) < 1e-14 * (1.0 + std::abs(root))) break;
            }
            BranchPoint bp;
            bp.v0 = root;
            bp.gamma = params.gamma;
            bp.residual = std::abs(g_of_v(root, sg, spec, root_tol));
            bp.transversal = std::abs(g_prime(root, sg, spec, root_tol)) > 1e-6;
            if (out.empty() || std::abs(out.back().v0 - root) > 1e-6) out.push_back(bp);
        }
        v_prev = v;
        g_prev = g;
    }
    std::sort(out.begin(), out.end(),
              [](const BranchPoint& l, const BranchPoint& r) { return l.v0 < r.v0; });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].branch_index = static_cast<int>(i) + 1;
    return out;
}

FoldPoint find_fold(const ModelParams& params, const ReactionSpec& spec,
                    const FoldWindow& window) {
    (void)params;  // fold location depends on the nonlinearity only
    // Tangency of q = sqrt(gamma) v with q = J(v)/2: interior extremum of
    // psi(v) = (J(v)/2)/v with psi > 0. Scan each sign of v separately.
    const double scan_tol = 1e-6;
    double seed_v = 0.0, seed_s = 0.0;
    bool found = false;
    auto scan_side = [&](double a, double b) {
        if (found || !(b > a)) return;
        const int n = 400;
        std::vector<double> vv, psi;
        for (int i = 0; i <= n; ++i) {
            const double v = a + (b - a) * i / n;
            vv.push_back(v);
            psi.push_back(half_J(v, spec, scan_tol) / v);
        }
        for (std::size_t i = 1; i + 1 < psi.size(); ++i) {
            if (psi[i] <= 0.0) continue;  // tangency needs a positive slope sqrt(gamma)
            const bool interior_min = psi[i] < psi[i - 1] && psi[i] < psi[i + 1];
            const bool interior_max = psi[i] > psi[i - 1] && psi[i] > psi[i + 1];
            if (interior_min || interior_max) {
                seed_v = vv[i];
                seed_s = psi[i];
                found = true;
                return;
            }
        }
    };
    scan_side(std::max(window.v_min, kVFloor + 1e-6), -1e-3);
    scan_side(1e-3, window.v_max);
    if (!found)
        throw NoFoldFound("no tangency of the take-off curve in the window (type-E geometry)");

    // Damped Newton on F(s, v) = (s v - J/2, s - (J/2)') with s = sqrt(gamma).
    double s = seed_s, v = seed_v;
    const double tol = 1e-10;
    auto residual = [&](double ss, double vv, double& f1, double& f2) {
        f1 = g_of_v(vv, ss, spec, 1e-11);
        f2 = g_prime(vv, ss, spec, 1e-11);
    };
    double f1, f2;
    residual(s, v, f1, f2);
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        const double hfd = 1e-4 * (1.0 + std::abs(v));
        const double d2 =
            (g_prime(v + hfd, s, spec, 1e-10) - g_prime(v - hfd, s, spec, 1e-10)) / (2.0 * hfd);
        // Solve [[v, f2], [1, d2]] [ds, dv]^T = -[f1, f2]^T.
        const double det = v * d2 - f2;
        if (std::abs(det) < 1e-14) throw NoFoldFound("singular fold system (degenerate contact)");
        const double ds = (-f1 * d2 + f2 * f2) / det;
        const double dv = (-v * f2 + f1) / det;
        double damp = 1.0;
        for (int half = 0; half < 10; ++half) {
            const double sn = s + damp * ds;
            const double vn = v + damp * dv;
            if (sn > 0.0 && vn > kVFloor) {
                double g1n, g2n;
                residual(sn, vn, g1n, g2n);
                if (std::hypot(g1n, g2n) <= std::hypot(f1, f2) || damp < 0.02) {
                    s = sn;
                    v = vn;
                    f1 = g1n;
                    f2 = g2n;
                    break;
                }
            }
            damp *= 0.5;
        }
        if (std::hypot(f1, f2) < tol) {
            converged = true;
            break;
        }
    }
    if (!converged && std::hypot(f1, f2) > 1e-7)
        throw NoFoldFound("fold Newton did not converge, residual=" + std::to_string(std::hypot(f1, f2)));

    FoldPoint fp;
    fp.gamma_double = s * s;
    fp.v_fold = v;
    const double hfd = 1e-4 * (1.0 + std::abs(v));
    const double gpp =
        (g_prime(v + hfd, s, spec, 1e-10) - g_prime(v - hfd, s, spec, 1e-10)) / (2.0 * hfd);
    fp.contact_order = std::abs(gpp) > 1e-6 ? 2 : 3;
    return fp;
}

double default_domain_half_width(const ModelParams& params) {
    if (params.regime == Regime::SuperSlow) {
        const double rate = params.epsilon * std::sqrt(std::abs(params.gamma));
        return rate > 0 ? std::max(50.0, 12.0 / rate) : 50.0;
    }
    return std::max(50.0, 12.0 / std::sqrt(-params.g1));
}

FrontProfile build_composite_front(double v0, const ModelParams& params,
                                   const ReactionSpec& spec, double L, int N) {
    (void)spec;
    if (N < 512) throw GridError("composite front requires N >= 512");
    if (N % 2 != 0) throw GridError("composite front requires even N");
    if (!(v0 > -1.0)) throw DomainError("composite front requires v0 > -1");

    double decay_rate;
    if (params.regime == Regime::SuperSlow) {
        if (!(params.gamma > 0.0))
            throw RegimeError("composite super-slow front requires gamma > 0");
        decay_rate = params.epsilon * std::sqrt(params.gamma);
        if (L < 10.0 / decay_rate)
            throw GridError("domain too small: L < 10/(eps*sqrt(gamma))");
    } else {
        decay_rate = std::sqrt(-params.g1);
        if (L < 10.0 / decay_rate) throw GridError("domain too small: L < 10/sqrt(-G1)");
    }

    FrontProfile fp;
    fp.v0 = v0;
    fp.params = params;
    fp.construction = FrontConstruction::CompositeAsymptotic;
    fp.x.resize(N + 1);
    fp.U.resize(N + 1);
    fp.V.resize(N + 1);

    FastFront fast(v0);
    const double a = std::sqrt(params.epsilon);
    const double b = 2.0 * a;
    for (int j = 0; j <= N; ++j) {
        const double x = -L + 2.0 * L * j / N;
        fp.x[j] = x;
        const double V = v0 * std::exp(-decay_rate * std::abs(x));
        double w;
        const double ax = std::abs(x);
        if (ax <= a)
            w = 1.0;
        else if (ax >= b)
            w = 0.0;
        else {
            const double t = (ax - a) / (b - a);
            w = 1.0 - t * t * (3.0 - 2.0 * t);
        }
        const double slow_u = (x >= 0 ? 1.0 : -1.0) * std::sqrt(1.0 + V);
        fp.V[j] = V;
        fp.U[j] = w * fast.u0(x / params.epsilon) + (1.0 - w) * slow_u;
    }
    // exact odd/even symmetrization of rounding asymmetry
    for (int j = 0; j <= N / 2; ++j) {
        const int k = N - j;
        const double um = 0.5 * (fp.U[k] - fp.U[j]);
        fp.U[k] = um;
        fp.U[j] = -um;
        const double vm = 0.5 * (fp.V[k] + fp.V[j]);
        fp.V[k] = vm;
        fp.V[j] = vm;
    }
    fp.U[N / 2] = 0.0;
    return fp;
}

namespace {

// Slow decay rate of the linearized tail at the rest state (x-scale): the
// small root of the spatial eigenvalue problem at lambda = 0.
double slow_tail_rate(const ModelParams& params, const ReactionSpec& spec) {
    const double e2 = params.epsilon * params.epsilon;
    const double dtil = e2 * (spec.H0 + spec.G1);
    // mu^2 + mu*(dtil - 2) - 2*e2*G1 = 0, small root; rate on x is sqrt(mu)/eps.
    const double bq = dtil - 2.0;
    const double cq = -2.0 * e2 * spec.G1;
    const double disc = bq * bq - 4.0 * cq;
    const double sq = std::sqrt(std::max(disc, 0.0));
    const double qq = -0.5 * (bq + (bq >= 0 ? sq : -sq));
    double mu_small = (qq != 0.0) ? cq / qq : 0.0;
    if (mu_small < 0.0) mu_small = 0.0;
    return std::sqrt(mu_small) / params.epsilon;
}

}  // namespace

FrontProfile refine_front_bvp(const FrontProfile& seed, const ModelParams& params,
                              const ReactionSpec& spec, const BvpOptions& opts) {
    const double L = opts.L.value_or(seed.half_width());
    const int Nfull = opts.N.value_or(static_cast<int>(seed.x.size()) - 1);
    if (Nfull % 2 != 0) throw GridError("refine_front_bvp requires even N");
    const int M = Nfull / 2;  // half-domain intervals
    const double h = L / M;
    const double e2 = params.epsilon * params.epsilon;
    const double kappa = slow_tail_rate(params, spec);

    // Unknowns on [0, L]: U_0..U_M, V_0..V_M interleaved (u_i, v_i).
    const int n = 2 * (M + 1);
    Eigen::VectorXd w(n);
    for (int i = 0; i <= M; ++i) {
        const double x = i * h;
        w[2 * i] = seed.sample_U(x);
        w[2 * i + 1] = seed.sample_V(x);
    }
    w[0] = 0.0;

    auto phi = [&](double U, double V) { return (1.0 + V - U * U) * spec.H(U * U, V) + spec.G(V); };
    auto phi_U = [&](double U, double V) {
        const double usq = U * U;
        return 2.0 * U * ((1.0 + V - usq) * spec.dH_dUsq(usq, V) - spec.H(usq, V));
    };
    auto phi_V = [&](double U, double V) {
        const double usq = U * U;
        return spec.H(usq, V) + (1.0 + V - usq) * spec.dH_dV(usq, V) + spec.dG_dV(V);
    };

    auto assemble = [&](const Eigen::VectorXd& y, Eigen::VectorXd& F,
                        std::vector<Eigen::Triplet<double>>* trip) {
        F.setZero(n);
        auto U = [&](int i) { return y[2 * i]; };
        auto V = [&](int i) { return y[2 * i + 1]; };
        auto add = [&](int r, int c, double val) {
            if (trip) trip->emplace_back(r, c, val);
        };
        const double ih2 = 1.0 / (h * h);

        // i = 0: symmetry. U_0 = 0; V ghost V_{-1} = V_1.
        F[0] = U(0);
        add(0, 0, 1.0);
        F[1] = (2.0 * V(1) - 2.0 * V(0)) * ih2 + phi(U(0), V(0));
        add(1, 3, 2.0 * ih2);
        add(1, 1, -2.0 * ih2 + phi_V(U(0), V(0)));
        add(1, 0, phi_U(U(0), V(0)));

        for (int i = 1; i < M; ++i) {
            const double Ui = U(i), Vi = V(i);
            const double fu = 1.0 + Vi - Ui * Ui;
            F[2 * i] = e2 * (U(i - 1) - 2.0 * Ui + U(i + 1)) * ih2 + fu * Ui;
            add(2 * i, 2 * (i - 1), e2 * ih2);
            add(2 * i, 2 * (i + 1), e2 * ih2);
            add(2 * i, 2 * i, -2.0 * e2 * ih2 + (1.0 + Vi - 3.0 * Ui * Ui));
            add(2 * i, 2 * i + 1, Ui);
            F[2 * i + 1] = (V(i - 1) - 2.0 * Vi + V(i + 1)) * ih2 + phi(Ui, Vi);
            add(2 * i + 1, 2 * (i - 1) + 1, ih2);
            add(2 * i + 1, 2 * (i + 1) + 1, ih2);
            add(2 * i + 1, 2 * i + 1, -2.0 * ih2 + phi_V(Ui, Vi));
            add(2 * i + 1, 2 * i, phi_U(Ui, Vi));
        }

        // i = M: slow-manifold and decay conditions.
        F[2 * M] = U(M) - std::sqrt(1.0 + V(M));
        add(2 * M, 2 * M, 1.0);
        add(2 * M, 2 * M + 1, -0.5 / std::sqrt(1.0 + V(M)));
        // Robin via ghost V_{M+1} = V_{M-1} - 2 h kappa V_M in the interior stencil.
        F[2 * M + 1] =
            (2.0 * V(M - 1) - 2.0 * V(M) - 2.0 * h * kappa * V(M)) * ih2 + phi(U(M), V(M));
        add(2 * M + 1, 2 * (M - 1) + 1, 2.0 * ih2);
        add(2 * M + 1, 2 * M + 1, (-2.0 - 2.0 * h * kappa) * ih2 + phi_V(U(M), V(M)));
        add(2 * M + 1, 2 * M, phi_U(U(M), V(M)));
    };

    Eigen::VectorXd F(n);
    assemble(w, F, nullptr);
    double res = F.lpNorm<Eigen::Infinity>();
    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(8 * n);
        assemble(w, F, &trip);
        Eigen::SparseMatrix<double> Jm(n, n);
        Jm.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(Jm);
        if (lu.info() != Eigen::Success)
            throw NoConvergence("refine_front_bvp: singular Jacobian", res);
        Eigen::VectorXd dw = lu.solve(-F);
        double damp = 1.0;
        Eigen::VectorXd wn;
        double res_n = res;
        for (int half = 0; half < 10; ++half) {
            wn = w + damp * dw;
            bool ok = true;
            for (int i = 0; i <= M && ok; ++i)
                if (!(wn[2 * i + 1] > -1.0 + 1e-12)) ok = false;
            if (ok) {
                Eigen::VectorXd Fn(n);
                assemble(wn, Fn, nullptr);
                res_n = Fn.lpNorm<Eigen::Infinity>();
                if (res_n <= res || damp < 0.02) break;
            }
            damp *= 0.5;
        }
        const double update = (damp * dw).lpNorm<Eigen::Infinity>();
        w = wn;
        res = res_n;
        if (update < opts.tol && res < 1e-6) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NoConvergence("refine_front_bvp: no convergence (near-fold or invalid seed), "
                            "residual=" + std::to_string(res),
                            res);

    FrontProfile out;
    out.params = params;
    out.construction = FrontConstruction::BVPRefined;
    out.x.resize(Nfull + 1);
    out.U.resize(Nfull + 1);
    out.V.resize(Nfull + 1);
    for (int j = 0; j <= Nfull; ++j) {
        const int i = std::abs(j - M);
        out.x[j] = -L + 2.0 * L * j / Nfull;
        const double sgn = (j > M) ? 1.0 : (j < M ? -1.0 : 0.0);
        out.U[j] = (j == M) ? 0.0 : sgn * w[2 * i];
        out.V[j] = w[2 * i + 1];
    }
    out.v0 = out.V[M];
    return out;
}

DestabilizationType classify_destabilization_type(const ReactionSpec& spec, double gamma_hi,
                                                  double gamma_lo) {
    if (!(gamma_hi > gamma_lo) || !(gamma_lo > 0.0))
        throw PreconditionError("classify: need gamma_hi > gamma_lo > 0");

    const double tol = 1e-9;
    // Coordinates (A, B) = (ln gamma, ln(1+v)); the regular root survives
    // gamma -> infinity with v -> J(0)/(2 sqrt(gamma)).
    auto Gfun = [&](double A, double B) {
        const double v = std::exp(B) - 1.0;
        return std::exp(0.5 * A) * v - half_J(v, spec, tol);
    };
    auto dG = [&](double A, double B, double& dA, double& dB) {
        const double v = std::exp(B) - 1.0;
        const double sg = std::exp(0.5 * A);
        dA = 0.5 * sg * v;
        const auto s = stability_integrals(v, spec, 1e-10);
        const double gp = sg - (s.I1 + 2.0 * s.I2) / (4.0 * (1.0 + v));
        dB = gp * std::exp(B);
    };

    double A = std::log(gamma_hi);
    // Seed the regular root by Newton in v from the small-v prediction.
    double v = half_J(0.0, spec, tol) / std::exp(0.5 * A);
    if (std::abs(v) < 1e-8) {
        // H with vanishing J(0): the regular root sits at v=0 exactly.
        DestabilizationType r;
        r.kind = DestabilizationType::Kind::TypeE;
        r.gamma_end = gamma_lo;
        r.v_end = 0.0;
        return r;
    }
    for (int it = 0; it < 50; ++it) {
        const double sg = std::exp(0.5 * A);
        const double g = g_of_v(v, sg, spec, tol);
        const double gp = g_prime(v, sg, spec, tol);
        const double upd = g / gp;
        v -= upd;
        if (std::abs(upd) < 1e-13 * (1.0 + std::abs(v))) break;
    }
    double B = std::log(1.0 + v);

    // Tangent along the curve G(A,B)=0, oriented toward decreasing A.
    double tA = 0.0, tB = 0.0;
    {
        double dA, dB;
        dG(A, B, dA, dB);
        const double nrm = std::hypot(dA, dB);
        tA = -dB / nrm;
        tB = dA / nrm;
        if (tA > 0) {
            tA = -tA;
            tB = -tB;
        }
    }

    double ds = 0.05;
    const double A_end = std::log(gamma_lo);
    int sign_prev = tA < 0 ? -1 : 1;
    for (long step = 0; step < 200000; ++step) {
        if (A <= A_end) {
            DestabilizationType r;
            r.kind = DestabilizationType::Kind::TypeE;
            r.gamma_end = std::exp(A);
            r.v_end = std::exp(B) - 1.0;
            return r;
        }
        // Predictor.
        double Ap = A + ds * tA, Bp = B + ds * tB;
        // Corrector: Newton on {G=0, (x-xp).t=0}.
        bool ok = false;
        for (int it = 0; it < 20; ++it) {
            const double g = Gfun(Ap, Bp);
            double dA, dB;
            dG(Ap, Bp, dA, dB);
            const double c2 = (Ap - (A + ds * tA)) * tA + (Bp - (B + ds * tB)) * tB;
            const double det = dA * tB - dB * tA;
            if (std::abs(det) < 1e-14) break;
            const double dAp = (-g * tB + dB * c2) / det;
            const double dBp = (-dA * c2 + g * tA) / det;
            Ap += dAp;
            Bp += dBp;
            if (std::hypot(dAp, dBp) < 1e-12) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            ds *= 0.5;
            if (ds < 1e-10) throw ContinuationStall("pseudo-arclength step underflow");
            continue;
        }
        // New tangent; detect the fold as a sign change of the gamma component.
        double dA, dB;
        dG(Ap, Bp, dA, dB);
        double nA = -dB, nB = dA;
        const double nrm = std::hypot(nA, nB);
        nA /= nrm;
        nB /= nrm;
        if (nA * tA + nB * tB < 0.0) {
            nA = -nA;
            nB = -nB;
        }
        const int sign_now = nA < 0 ? -1 : 1;
        if (sign_now != sign_prev && step > 0) {
            const double v_turn = std::exp(Bp) - 1.0;
            FoldWindow win;
            win.v_min = v_turn - std::max(0.5, 0.2 * std::abs(v_turn));
            win.v_max = v_turn + std::max(0.5, 0.2 * std::abs(v_turn));
            ModelParams dummy = ModelParams::super_slow(0.1, 1.0, std::exp(Ap));
            FoldPoint fp = find_fold(dummy, spec, win);
            DestabilizationType r;
            r.kind = DestabilizationType::Kind::TypeD;
            r.fold = fp;
            r.gamma_end = fp.gamma_double;
            r.v_end = fp.v_fold;
            return r;
        }
        sign_prev = sign_now;
        A = Ap;
        B = Bp;
        tA = nA;
        tB = nB;
        if (ds < 0.2) ds *= 1.3;
    }
    throw ContinuationStall("continuation exceeded the step budget");
}

}  // namespace bistable
