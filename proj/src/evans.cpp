#include "bistable/evans.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "bistable/errors.hpp"
#include "bistable/fast_field.hpp"
#include "bistable/ode.hpp"

namespace bistable {

namespace {

using Vec4 = std::array<Complex, 4>;
using Vec6 = std::array<Complex, 6>;

// Pair ordering of the exterior square: (0,1),(0,2),(0,3),(1,2),(1,3),(2,3).
constexpr int kPairIdx[4][4] = {
    {-1, 0, 1, 2},
    {0, -1, 3, 4},
    {1, 3, -1, 5},
    {2, 4, 5, -1},
};
constexpr double kPairSign[4][4] = {
    {0, 1, 1, 1},
    {-1, 0, 1, 1},
    {-1, -1, 0, 1},
    {-1, -1, -1, 0},
};

Vec6 plucker(const Vec4& a, const Vec4& b) {
    Vec6 w{};
    int n = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) w[n++] = a[i] * b[j] - a[j] * b[i];
    return w;
}

// Coefficient of e1^e2^e3^e4 in w ^ z.
Complex wedge4(const Vec6& w, const Vec6& z) {
    return w[0] * z[5] - w[1] * z[4] + w[2] * z[3] + w[3] * z[2] - w[4] * z[1] + w[5] * z[0];
}

double vec_norm(const Vec4& v) {
    double s = 0;
    for (const auto& c : v) s += std::norm(c);
    return std::sqrt(s);
}
double vec_norm6(const Vec6& v) {
    double s = 0;
    for (const auto& c : v) s += std::norm(c);
    return std::sqrt(s);
}

}  // namespace

LinearizationContext LinearizationContext::make(FrontProfile front, const ModelParams& params,
                                                const ReactionSpec& spec) {
    LinearizationContext ctx;
    ctx.params = params;
    ctx.spec = spec;
    const auto n = front.x.size();
    ctx.pot_u.resize(n);
    ctx.coup_u.resize(n);
    ctx.phi_u.resize(n);
    ctx.phi_v.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double U = front.U[j];
        const double V = front.V[j];
        const double usq = U * U;
        ctx.pot_u[j] = 1.0 + V - 3.0 * usq;
        ctx.coup_u[j] = U;
        ctx.phi_u[j] = 2.0 * U * ((1.0 + V - usq) * spec.dH_dUsq(usq, V) - spec.H(usq, V));
        ctx.phi_v[j] = spec.H(usq, V) + (1.0 + V - usq) * spec.dH_dV(usq, V) + spec.dG_dV(V);
    }
    const double h0g1 = spec.H0 + spec.G1;
    auto end_defect = [&](std::size_t j, double sgn) {
        double d = std::abs(ctx.pot_u[j] - (-2.0));
        d = std::max(d, std::abs(ctx.coup_u[j] - sgn));
        d = std::max(d, std::abs(ctx.phi_u[j] - (-2.0 * sgn * spec.H0)));
        d = std::max(d, std::abs(ctx.phi_v[j] - h0g1));
        return d;
    };
    ctx.tail_defect = std::max(end_defect(0, -1.0), end_defect(n - 1, 1.0));
    ctx.front = std::move(front);
    return ctx;
}

namespace {

// Interpolated coefficients at slow coordinate x = eps*xi.
struct Coeffs {
    double pot, coup, phiu, phiv;
};

Coeffs coeffs_at(double x, const LinearizationContext& ctx) {
    const auto& g = ctx.front.x;
    const double h = ctx.front.dx();
    if (x <= g.front()) {
        return {ctx.pot_u.front(), ctx.coup_u.front(), ctx.phi_u.front(), ctx.phi_v.front()};
    }
    if (x >= g.back()) {
        return {ctx.pot_u.back(), ctx.coup_u.back(), ctx.phi_u.back(), ctx.phi_v.back()};
    }
    const auto i = static_cast<std::size_t>((x - g.front()) / h);
    const double t = (x - g[i]) / h;
    auto lerp = [&](const std::vector<double>& a) { return (1.0 - t) * a[i] + t * a[i + 1]; };
    return {lerp(ctx.pot_u), lerp(ctx.coup_u), lerp(ctx.phi_u), lerp(ctx.phi_v)};
}

}  // namespace

Matrix4c assemble_A(double xi, Complex lambda, const LinearizationContext& ctx) {
    const double eps = ctx.params.epsilon;
    const Coeffs c = coeffs_at(eps * xi, ctx);
    Matrix4c A{};
    A[0][1] = 1.0;
    A[1][0] = lambda - c.pot;
    A[1][2] = -c.coup;
    A[2][3] = eps;
    // q' = eps*(-Phi_U u + (tau lambda - Phi_V) v): the reaction Jacobian
    // moves across the equality relative to the eigenproblem form.
    A[3][0] = -eps * c.phiu;
    A[3][2] = eps * (ctx.params.tau * lambda - c.phiv);
    return A;
}

AsymptoticSystem asymptotic_system(Complex lambda, const ModelParams& params,
                                   const ReactionSpec& spec, double near_minus_two_margin) {
    const double eps = params.epsilon;
    const double margin = near_minus_two_margin >= 0.0 ? near_minus_two_margin : 10.0 * eps;
    if (std::abs(lambda + 2.0) <= margin)
        throw NearMinusTwo("fast/slow labeling degenerates near lambda = -2");
    const double e2 = eps * eps;
    const Complex a = lambda + 2.0;
    const Complex dt = e2 * (spec.H0 + spec.G1 - params.tau * lambda);

    // mu^2 + (dt - a) mu + (2 e2 H0 - a dt) = 0, mu = Lambda^2.
    const Complex bq = dt - a;
    const Complex cq = 2.0 * e2 * spec.H0 - a * dt;
    const Complex disc = bq * bq - 4.0 * cq;
    Complex sq = std::sqrt(disc);
    if (std::real(std::conj(bq) * sq) < 0.0) sq = -sq;
    const Complex q = -0.5 * (bq + sq);
    Complex mu1 = q;
    Complex mu2 = (q != 0.0 ? cq / q : -bq - q);
    if (std::abs(mu1) < std::abs(mu2)) std::swap(mu1, mu2);

    AsymptoticSystem s;
    s.mu_fast = mu1;
    s.mu_slow = mu2;
    const Complex L1 = std::sqrt(mu1);  // principal branch, arg in (-pi/2, pi/2]
    const Complex L2 = std::sqrt(mu2);
    s.Lambda = {L1, L2, -L2, -L1};
    if (L2.real() < 5e-13 || L1.real() < 5e-13 || L1.real() - L2.real() < 1e-12)
        throw OrderingBreakdown("spatial eigenvalue ordering lost (lambda on sigma_ess)");

    auto fill = [&](double side) {
        // side = +1 for xi -> +inf, -1 for xi -> -inf.
        const double b = -side;  // coupling entry A[1][2] limit
        std::array<Vec4, 4> E;
        for (int k = 0; k < 4; ++k) {
            const Complex L = s.Lambda[k];
            const Complex mu = (k == 0 || k == 3) ? mu1 : mu2;
            Vec4 v;
            if (k == 0 || k == 3) {
                // fast pair, u-normalized
                v[0] = 1.0;
                v[1] = L;
                v[2] = (mu - a) / b;
                v[3] = L * (mu - a) / (eps * b);
            } else {
                // slow pair, v-normalized
                v[0] = b / (mu - a);
                v[1] = L * b / (mu - a);
                v[2] = 1.0;
                v[3] = L / eps;
            }
            E[k] = v;
        }
        return E;
    };
    s.E_plus = fill(+1.0);
    s.E_minus = fill(-1.0);
    return s;
}

namespace {

// Exterior-square action dW = A^(2)(xi) W built from the sparse A.
void compound_rhs(const Matrix4c& A, const Vec6& w, Vec6& dw) {
    dw.fill(Complex{0.0, 0.0});
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            const Complex& Aab = A[a][b];
            if (Aab == 0.0) continue;
            for (int m = 0; m < 4; ++m) {
                if (m == a || m == b) continue;
                // contribution A_ab * w_(b,m) to dw_(a,m)
                const int src = kPairIdx[b][m];
                const int dst = kPairIdx[a][m];
                dw[dst] += kPairSign[a][m] * kPairSign[b][m] * Aab * w[src];
            }
        }
    }
}

struct CompoundRun {
    Vec6 at_zero;
    double log_at_zero = 0.0;
    Vec6 at_end;
    double log_at_end = 0.0;
};

CompoundRun integrate_compound(Complex lambda, const LinearizationContext& ctx, double xi_from,
                               double xi_to, Vec6 w0, double log0, const EvansOptions& opts,
                               bool record_zero) {
    RK45<6> rk;
    rk.rel_tol = opts.rel_tol;
    const double dxi_node = ctx.front.dx() / ctx.params.epsilon;
    rk.max_step = std::max(0.25, 6.0 * dxi_node);
    auto rhs = [&](double xi, const Vec6& w, Vec6& dw) {
        compound_rhs(assemble_A(xi, lambda, ctx), w, dw);
    };
    CompoundRun run;
    if (record_zero) {
        auto leg1 = rk.integrate(rhs, xi_from, 0.0, w0);
        run.at_zero = leg1.y;
        run.log_at_zero = log0 + leg1.log_factor;
        auto leg2 = rk.integrate(rhs, 0.0, xi_to, leg1.y);
        run.at_end = leg2.y;
        run.log_at_end = run.log_at_zero + leg2.log_factor;
    } else {
        auto leg = rk.integrate(rhs, xi_from, xi_to, w0);
        run.at_end = leg.y;
        run.log_at_end = log0 + leg.log_factor;
    }
    return run;
}

Vec6 normalized6(const Vec6& v, double& log_out) {
    const double n = vec_norm6(v);
    log_out = std::log(n);
    Vec6 r;
    for (int i = 0; i < 6; ++i) r[i] = v[i] / n;
    return r;
}

}  // namespace

EvansEvaluation evans_compound(Complex lambda, const LinearizationContext& ctx,
                               const EvansOptions& opts) {
    const double eps = ctx.params.epsilon;
    const double margin = 2.5 * eps * std::sqrt(1.0 + std::abs(ctx.spec.H0));
    const auto sys = asymptotic_system(lambda, ctx.params, ctx.spec, margin);
    const double xiL = ctx.front.half_width() / eps;

    EvansEvaluation ev;
    ev.lambda = lambda;
    ev.method = EvansMethod::CompoundMatrix;

    // Forward 2-plane span{E-1, E-2}, with a stop at xi = 0.
    double lw0;
    Vec6 w0 = normalized6(plucker(sys.E_minus[0], sys.E_minus[1]), lw0);
    const CompoundRun fw = integrate_compound(lambda, ctx, -xiL, xiL, w0, lw0, opts, true);

    // Backward 2-plane span{E+3, E+4}.
    double lz0;
    Vec6 z0 = normalized6(plucker(sys.E_plus[2], sys.E_plus[3]), lz0);
    const CompoundRun bw = integrate_compound(lambda, ctx, xiL, 0.0, z0, lz0, opts, false);

    const Complex Dm = wedge4(fw.at_zero, bw.at_end);
    if (!std::isfinite(Dm.real()) || !std::isfinite(Dm.imag()))
        throw PrecisionLoss("evans_compound produced a non-finite determinant");
    const Complex sumL12 = sys.Lambda[0] + sys.Lambda[1];
    LogComplex D = LogComplex(Dm, fw.log_at_zero + bw.log_at_end) *
                   LogComplex::exponential(-2.0 * sumL12 * xiL);
    ev.D = D;
    ev.rescale_log = 0.0;

    // t1 from the single fast solution phi1.
    {
        RK45<4> rk;
        rk.rel_tol = opts.rel_tol;
        rk.max_step = std::max(0.25, 6.0 * ctx.front.dx() / eps);
        auto rhs = [&](double xi, const Vec4& y, Vec4& dy) {
            const Matrix4c A = assemble_A(xi, lambda, ctx);
            for (int i = 0; i < 4; ++i) {
                Complex acc = 0.0;
                for (int j = 0; j < 4; ++j)
                    if (A[i][j] != 0.0) acc += A[i][j] * y[j];
                dy[i] = acc;
            }
        };
        Vec4 y0 = sys.E_minus[0];
        const double n0 = vec_norm(y0);
        for (auto& c : y0) c /= n0;
        auto run = rk.integrate(rhs, -xiL, xiL, y0);
        // Decompose in the E+ basis.
        Eigen::Matrix4cd M;
        Eigen::Vector4cd rhsv;
        for (int i = 0; i < 4; ++i) {
            for (int k = 0; k < 4; ++k) M(i, k) = sys.E_plus[k][i];
            rhsv(i) = run.y[i];
        }
        Eigen::Vector4cd c = M.colPivHouseholderQr().solve(rhsv);
        ev.t1 = LogComplex(c(0), run.log_factor + std::log(n0)) *
                LogComplex::exponential(-2.0 * sys.Lambda[0] * xiL);
    }

    // t1*t2 from the coefficient of E+1 ^ E+2 in the forward plane at +L.
    {
        Eigen::Matrix<Complex, 6, 6> M;
        Eigen::Matrix<Complex, 6, 1> rhsv;
        int col = 0;
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) {
                const Vec6 bij = plucker(sys.E_plus[i], sys.E_plus[j]);
                for (int r = 0; r < 6; ++r) M(r, col) = bij[r];
                ++col;
            }
        }
        for (int r = 0; r < 6; ++r) rhsv(r) = fw.at_end[r];
        Eigen::Matrix<Complex, 6, 1> c = M.colPivHouseholderQr().solve(rhsv);
        LogComplex t1t2 = LogComplex(c(0), fw.log_at_end) *
                          LogComplex::exponential(-2.0 * sumL12 * xiL);
        if (!ev.t1.is_zero() && ev.t1.log_scale > -60.0)
            ev.t2 = t1t2 / ev.t1;
        else
            ev.t2 = LogComplex{};
    }
    return ev;
}

LogComplex evans_scalar(Complex lambda, const LinearizationContext& ctx,
                        const EvansOptions& opts) {
    const double eps = ctx.params.epsilon;
    const double xiL = ctx.front.half_width() / eps;
    const Complex L = std::sqrt(lambda + 2.0);
    if (L.real() < 1e-12)
        throw OrderingBreakdown("scalar Evans: lambda on the fast essential spectrum");
    RK45<2> rk;
    rk.rel_tol = opts.rel_tol;
    rk.max_step = std::max(0.25, 6.0 * ctx.front.dx() / eps);
    auto rhs = [&](double xi, const std::array<Complex, 2>& y, std::array<Complex, 2>& dy) {
        const Coeffs c = coeffs_at(eps * xi, ctx);
        dy[0] = y[1];
        dy[1] = (lambda - c.pot) * y[0];
    };
    std::array<Complex, 2> y1 = {1.0, L};
    const double n1 = std::hypot(std::abs(y1[0]), std::abs(y1[1]));
    y1[0] /= n1;
    y1[1] /= n1;
    auto r1 = rk.integrate(rhs, -xiL, 0.0, y1);
    std::array<Complex, 2> y4 = {1.0, -L};
    const double n4 = std::hypot(std::abs(y4[0]), std::abs(y4[1]));
    y4[0] /= n4;
    y4[1] /= n4;
    auto r4 = rk.integrate(rhs, xiL, 0.0, y4);
    const Complex det = r1.y[0] * r4.y[1] - r1.y[1] * r4.y[0];
    return LogComplex(det, r1.log_factor + r4.log_factor + std::log(n1) + std::log(n4)) *
           LogComplex::exponential(-2.0 * L * xiL);
}

Complex scalar_evans_analytic(Complex lambda, double v0) {
    const Complex P = std::sqrt(2.0 * lambda / (1.0 + v0) + 4.0);
    return (P - 1.0) * (P - 2.0) / ((P + 1.0) * (P + 2.0));
}

Complex t2_jump_matching(Complex lambda_tilde, double v0, const ModelParams& params,
                         const ReactionSpec& spec) {
    if (params.regime != Regime::SuperSlow)
        throw PreconditionError("t2_jump_matching requires super-slow params");
    const Complex z =
        lambda_tilde * (params.tau - 0.5 * spec.H0) + Complex(params.gamma, 0.0);
    if (std::abs(z) <= 1e-8 || (z.real() <= 0.0 && std::abs(z.imag()) <= 1e-8))
        throw BranchCutError("t2 radicand on the branch cut along the negative real axis");
    const auto s = stability_integrals(v0, spec);
    return 1.0 - (s.I1 + 2.0 * s.I2) / (4.0 * (1.0 + v0) * std::sqrt(z));
}

EdgePrediction lambda_edge_predict(double v0, const ModelParams& params,
                                   const ReactionSpec& spec) {
    if (params.regime != Regime::SuperSlow)
        throw PreconditionError("lambda_edge_predict requires super-slow params");
    const double denom = 2.0 * params.tau - spec.H0;
    if (denom <= 0.01)
        throw PreconditionError("lambda_edge_predict requires 2 tau - H0 > 0 and O(1)");
    EdgePrediction p;
    p.v0 = v0;
    p.lambda_tilde_edge = (-2.0 * params.gamma + spec.H0 * spec.H0 * (1.0 + v0)) / denom;
    p.lambda_edge = params.epsilon * params.epsilon * p.lambda_tilde_edge;
    p.exists = spec.H0 > 0.0;
    const double tip = -2.0 * params.gamma / denom;
    if (p.exists && !(p.lambda_tilde_edge > tip))
        throw NumericalError("edge eigenvalue fell behind the tip of the essential spectrum");
    return p;
}

double gamma_double_from_stability(double v0, const ReactionSpec& spec) {
    const auto s = stability_integrals(v0, spec);
    const double root = (s.I1 + 2.0 * s.I2) / (4.0 * (1.0 + v0));
    return root * root;
}

int winding_count(const std::vector<Complex>& contour,
                  const std::function<Complex(Complex)>& f, int max_points) {
    if (contour.size() < 3) throw PreconditionError("winding: need a closed contour");
    std::vector<Complex> pts = contour;
    if (std::abs(pts.front() - pts.back()) > 1e-14) pts.push_back(pts.front());

    struct Node {
        Complex lambda;
        double arg;
    };
    std::vector<Node> nodes;
    nodes.reserve(pts.size());
    for (const auto& z : pts) nodes.push_back({z, std::arg(f(z))});
    int evals = static_cast<int>(nodes.size());

    const double pi = std::numbers::pi;
    auto principal = [&](double d) {
        while (d > pi) d -= 2.0 * pi;
        while (d < -pi) d += 2.0 * pi;
        return d;
    };

    double total = 0.0;
    struct Seg {
        Node a, b;
        int depth;
    };
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        // bisect this segment until the turning per piece is < pi/2
        std::vector<Seg> segs = {{nodes[i], nodes[i + 1], 0}};
        while (!segs.empty()) {
            Seg s = segs.back();
            segs.pop_back();
            const double d = principal(s.b.arg - s.a.arg);
            if (std::abs(d) < 0.5 * pi) {
                total += d;
                continue;
            }
            if (++evals > max_points)
                throw ContourTooCoarse("winding: refinement budget exceeded");
            if (s.depth > 40) throw ContourTooCoarse("winding: segment depth exceeded");
            const Complex mid = 0.5 * (s.a.lambda + s.b.lambda);
            Node m{mid, std::arg(f(mid))};
            segs.push_back({m, s.b, s.depth + 1});
            segs.push_back({s.a, m, s.depth + 1});
        }
    }
    const double w = total / (2.0 * pi);
    const long wi = std::lround(w);
    if (std::abs(w - static_cast<double>(wi)) > 0.25)
        throw ContourTooCoarse("winding: non-integer total turning");
    return static_cast<int>(wi);
}

int winding_count(const std::vector<Complex>& contour, const LinearizationContext& ctx,
                  const EvansOptions& opts) {
    return winding_count(contour, [&](Complex z) {
        return evans_compound(z, ctx, opts).D.mantissa;
    });
}

std::vector<Complex> circle_contour(Complex center, double radius, int n) {
    std::vector<Complex> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double th = 2.0 * std::numbers::pi * i / n;
        pts.push_back(center + radius * Complex(std::cos(th), std::sin(th)));
    }
    return pts;
}

std::vector<Complex> rectangle_contour(Complex lo, Complex hi, int n_per_side) {
    std::vector<Complex> pts;
    auto edge = [&](Complex a, Complex b) {
        for (int i = 0; i < n_per_side; ++i)
            pts.push_back(a + (b - a) * (static_cast<double>(i) / n_per_side));
    };
    edge({lo.real(), lo.imag()}, {hi.real(), lo.imag()});
    edge({hi.real(), lo.imag()}, {hi.real(), hi.imag()});
    edge({hi.real(), hi.imag()}, {lo.real(), hi.imag()});
    edge({lo.real(), hi.imag()}, {lo.real(), lo.imag()});
    pts.push_back(pts.front());
    return pts;
}

// ---------------------------------------------------------------------------

std::string to_string(Parity p) {
    switch (p) {
        case Parity::u_odd_v_even: return "u_odd_v_even";
        case Parity::u_even_v_odd: return "u_even_v_odd";
        case Parity::mixed: return "mixed";
    }
    return "?";
}

Parity parity_check(const std::vector<Complex>& u, const std::vector<Complex>& v) {
    const std::size_t n = u.size();
    if (n != v.size() || n < 3) throw PreconditionError("parity_check: bad eigenvector");
    auto split = [&](const std::vector<Complex>& w, double& even, double& odd) {
        double se = 0, so = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const Complex e = 0.5 * (w[j] + w[n - 1 - j]);
            const Complex o = 0.5 * (w[j] - w[n - 1 - j]);
            se += std::norm(e);
            so += std::norm(o);
        }
        even = std::sqrt(se);
        odd = std::sqrt(so);
    };
    double ue, uo, ve, vo;
    split(u, ue, uo);
    split(v, ve, vo);
    const double nu = std::hypot(ue, uo), nv = std::hypot(ve, vo);
    const double scale = std::max(nu, nv);
    auto dominant = [&](double a, double b, double total) {
        if (total < 1e-12 * scale) return 0;  // component absent
        if (a >= 0.99 * total) return 1;      // first wins
        if (b >= 0.99 * total) return -1;
        return 2;  // mixed
    };
    const int du = dominant(ue, uo, nu);  // 1 = even, -1 = odd
    const int dv = dominant(ve, vo, nv);
    if (du == 2 || dv == 2) return Parity::mixed;
    // absent components are compatible with either class; use the other one
    if (du == -1 && dv != -1) return Parity::u_odd_v_even;
    if (du == 1 && dv != 1) return Parity::u_even_v_odd;
    if (du == 0 && dv == 1) return Parity::u_odd_v_even;
    if (du == 0 && dv == -1) return Parity::u_even_v_odd;
    return Parity::mixed;
}

namespace {

struct FdMatrices {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd Bdiag;
    int n_nodes = 0;
};

FdMatrices assemble_fd(const LinearizationContext& ctx, int N, double L) {
    const double h = 2.0 * L / N;
    const double ih2 = 1.0 / (h * h);
    const double e2 = ctx.params.epsilon * ctx.params.epsilon;
    const int nn = N + 1;
    FdMatrices m;
    m.n_nodes = nn;
    m.A.resize(2 * nn, 2 * nn);
    m.Bdiag.resize(2 * nn);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(8 * nn);
    for (int j = 0; j <= N; ++j) {
        const double x = -L + j * h;
        const Coeffs c = coeffs_at(x, ctx);
        const int ju = 2 * j, jv = 2 * j + 1;
        const int jm = (j == 0) ? 1 : j - 1;  // Neumann mirror
        const int jp = (j == N) ? N - 1 : j + 1;
        // u-row: e2 u_xx + pot*u + coup*v = lambda u
        trip.emplace_back(ju, 2 * jm, e2 * ih2);
        trip.emplace_back(ju, 2 * jp, e2 * ih2);
        trip.emplace_back(ju, ju, -2.0 * e2 * ih2 + c.pot);
        trip.emplace_back(ju, jv, c.coup);
        m.Bdiag[ju] = 1.0;
        // v-row: v_xx + phiu*u + phiv*v = tau lambda v
        trip.emplace_back(jv, 2 * jm + 1, ih2);
        trip.emplace_back(jv, 2 * jp + 1, ih2);
        trip.emplace_back(jv, jv, -2.0 * ih2 + c.phiv);
        trip.emplace_back(jv, ju, c.phiu);
        m.Bdiag[jv] = ctx.params.tau;
    }
    m.A.setFromTriplets(trip.begin(), trip.end());
    return m;
}

struct RitzPair {
    Complex lambda;
    Eigen::VectorXcd vec;
    double residual;
};

// Shift-invert Arnoldi with full reorthogonalization on (A - sigma B)^{-1} B.
std::vector<RitzPair> arnoldi_eigs(const FdMatrices& m, double sigma, int krylov, int want,
                                   double tol) {
    const int n = static_cast<int>(m.Bdiag.size());
    Eigen::SparseMatrix<double> S = m.A;
    for (int i = 0; i < n; ++i) S.coeffRef(i, i) -= sigma * m.Bdiag[i];
    S.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(S);
    if (lu.info() != Eigen::Success)
        throw SolverFailure("oracle: LU factorization failed (shift on an eigenvalue?)");

    const int mdim = std::min(krylov, n);
    Eigen::MatrixXd V(n, mdim + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(mdim + 1, mdim);
    // deterministic start vector
    Eigen::VectorXd v0(n);
    for (int i = 0; i < n; ++i) v0[i] = std::sin(0.7 * (i + 1)) + 0.3;
    v0.normalize();
    V.col(0) = v0;
    int mm = mdim;
    for (int k = 0; k < mdim; ++k) {
        Eigen::VectorXd w = lu.solve((m.Bdiag.array() * V.col(k).array()).matrix());
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= k; ++i) {
                const double hik = V.col(i).dot(w);
                if (pass == 0)
                    H(i, k) = hik;
                else
                    H(i, k) += hik;
                w -= hik * V.col(i);
            }
        }
        const double beta = w.norm();
        H(k + 1, k) = beta;
        if (beta < 1e-13) {
            mm = k + 1;
            break;
        }
        V.col(k + 1) = w / beta;
    }

    Eigen::MatrixXd Hm = H.topLeftCorner(mm, mm);
    Eigen::EigenSolver<Eigen::MatrixXd> es(Hm);
    if (es.info() != Eigen::Success) throw SolverFailure("oracle: Hessenberg eigensolve failed");
    const double beta_last = H(mm, mm - 1);

    std::vector<RitzPair> out;
    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < mm; ++i)
        order.emplace_back(-std::abs(es.eigenvalues()(i)), i);  // largest |theta| ~ closest to sigma
    std::sort(order.begin(), order.end());
    for (const auto& [negmag, idx] : order) {
        if (static_cast<int>(out.size()) >= want) break;
        const Complex theta = es.eigenvalues()(idx);
        if (std::abs(theta) < 1e-12) continue;
        const Eigen::VectorXcd y = es.eigenvectors().col(idx);
        const double resid = std::abs(beta_last * y(mm - 1)) / std::abs(theta);
        if (resid > tol) continue;
        RitzPair rp;
        rp.lambda = sigma + 1.0 / theta;
        rp.vec = V.leftCols(mm) * y;
        rp.residual = resid;
        out.push_back(std::move(rp));
    }
    return out;
}

}  // namespace

std::vector<OracleEigenpair> discrete_spectrum_oracle(const LinearizationContext& ctx,
                                                      const OracleOptions& opts) {
    if (opts.N < 8 || opts.N % 2 != 0) throw PreconditionError("oracle: N must be even and >= 8");
    std::vector<double> shifts = opts.shifts;
    if (shifts.empty()) {
        if (ctx.params.regime == Regime::SuperSlow) {
            const double tip = tip_lambda_superslow(ctx.params, ctx.spec) * ctx.params.epsilon *
                               ctx.params.epsilon;
            shifts = {0.45 * tip, -1.45 * (1.0 + std::max(0.0, ctx.front.v0))};
        } else {
            shifts = {-0.07, -1.45};
        }
    }

    auto solve_at = [&](int N) {
        FdMatrices m = assemble_fd(ctx, N, opts.L);
        std::vector<RitzPair> all;
        for (double sigma : shifts) {
            auto part = arnoldi_eigs(m, sigma, opts.krylov, opts.n_per_shift, opts.residual_tol);
            for (auto& rp : part) {
                bool dup = false;
                for (const auto& q : all)
                    if (std::abs(q.lambda - rp.lambda) < 1e-9 * (1.0 + std::abs(rp.lambda)))
                        dup = true;
                if (!dup) all.push_back(std::move(rp));
            }
        }
        return all;
    };

    auto fine = solve_at(opts.N);
    auto coarse = solve_at(opts.N / 2);

    std::vector<OracleEigenpair> out;
    for (auto& rp : fine) {
        if (rp.lambda.real() <= opts.re_min) continue;
        OracleEigenpair oe;
        oe.lambda = rp.lambda;
        double best = 1e300;
        for (const auto& q : coarse) best = std::min(best, std::abs(q.lambda - rp.lambda));
        oe.error_estimate = best / 3.0;  // second-order Richardson
        const int nn = static_cast<int>(rp.vec.size()) / 2;
        oe.u.resize(nn);
        oe.v.resize(nn);
        for (int j = 0; j < nn; ++j) {
            oe.u[j] = rp.vec(2 * j);
            oe.v[j] = rp.vec(2 * j + 1);
        }
        oe.parity = parity_check(oe.u, oe.v);
        const double dist =
            distance_to_essential_spectrum(oe.lambda, ctx.params, ctx.spec);
        oe.cluster = dist <= std::max(5.0 * oe.error_estimate, 1e-4);
        out.push_back(std::move(oe));
    }
    std::sort(out.begin(), out.end(), [](const OracleEigenpair& a, const OracleEigenpair& b) {
        return a.lambda.real() > b.lambda.real();
    });
    return out;
}

}  // namespace bistable
