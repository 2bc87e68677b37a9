#include "bistable/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "bistable/errors.hpp"

namespace bistable {

namespace {

// 15-point Kronrod nodes on [-1,1] (nonnegative half) with the embedded
// 7-point Gauss rule on the odd-indexed nodes.
constexpr std::array<double, 8> kXgk = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.02293532201052922, 0.06309209262997855, 0.10479001032225018, 0.14065325971552591,
    0.16900472663926790, 0.19035057806478540, 0.20443294007529889, 0.20948214108472782};
constexpr std::array<double, 4> kWg = {
    0.12948496616886969, 0.27970539148927664, 0.38183005050511894, 0.41795918367346938};

struct Panel {
    double a, b;
    double value;
    double err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = kWgk[7] * fc;
    double gauss = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double x = h * kXgk[i];
        const double fsum = f(c - x) + f(c + x);
        kron += kWgk[i] * fsum;
        if (i % 2 == 1) gauss += kWg[i / 2] * fsum;
    }
    kron *= h;
    gauss *= h;
    double err = std::abs(kron - gauss);
    if (!std::isfinite(kron)) throw NonFiniteEvaluation("integrand returned a non-finite value");
    return Panel{a, b, kron, err};
}

}  // namespace

QuadratureOutcome integrate_gk(const std::function<double(double)>& f, double a, double b,
                               const QuadratureOptions& opts) {
    if (!(b > a)) return {0.0, 0.0, 0};
    std::priority_queue<Panel> queue;
    const int n0 = std::max(1, opts.initial_panels);
    double total = 0.0, total_err = 0.0;
    for (int i = 0; i < n0; ++i) {
        Panel p = eval_panel(f, a + (b - a) * i / n0, a + (b - a) * (i + 1) / n0);
        total += p.value;
        total_err += p.err;
        queue.push(p);
    }
    int panels = n0;
    while (total_err > opts.abs_tol) {
        if (panels >= opts.max_panels)
            throw QuadratureFailure("adaptive quadrature: panel budget exhausted, err=" +
                                    std::to_string(total_err));
        Panel worst = queue.top();
        queue.pop();
        total -= worst.value;
        total_err -= worst.err;
        const double mid = 0.5 * (worst.a + worst.b);
        Panel l = eval_panel(f, worst.a, mid);
        Panel r = eval_panel(f, mid, worst.b);
        total += l.value + r.value;
        total_err += l.err + r.err;
        queue.push(l);
        queue.push(r);
        ++panels;
    }
    return {total, total_err, panels};
}

}  // namespace bistable
