#include "bistable/essential_spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "bistable/errors.hpp"

namespace bistable {

namespace {

struct QuadCoeffs {
    double a, b, c;  // a*l^2 + b*l + c
};

QuadCoeffs lambda_quadratic(double k, const ModelParams& p, const ReactionSpec& s) {
    const double e2 = p.epsilon * p.epsilon;
    const double k2 = k * k;
    const double hg = s.H0 + s.G1;
    QuadCoeffs q;
    q.a = e2 * p.tau;
    q.b = e2 * p.tau * (k2 + 2.0) + k2 - e2 * hg;
    q.c = (k2 + 2.0) * (k2 - e2 * hg) + 2.0 * e2 * s.H0;
    return q;
}

double discriminant(double k, const ModelParams& p, const ReactionSpec& s) {
    auto q = lambda_quadratic(k, p, s);
    return q.b * q.b - 4.0 * q.a * q.c;
}

}  // namespace

std::complex<double> char_poly(std::complex<double> lambda, double k, const ModelParams& p,
                               const ReactionSpec& s) {
    const double e2 = p.epsilon * p.epsilon;
    const double k2 = k * k;
    return (lambda + k2 + 2.0) * (e2 * p.tau * lambda + k2 - e2 * (s.H0 + s.G1)) +
           2.0 * e2 * s.H0;
}

std::pair<std::complex<double>, std::complex<double>> char_roots(double k,
                                                                 const ModelParams& p,
                                                                 const ReactionSpec& s) {
    auto q = lambda_quadratic(k, p, s);
    const double disc = q.b * q.b - 4.0 * q.a * q.c;
    std::complex<double> l1, l2;
    if (disc >= 0.0) {
        // Stable real form: avoid cancellation in the small root.
        const double sq = std::sqrt(disc);
        const double qq = -0.5 * (q.b + (q.b >= 0 ? sq : -sq));
        double r1 = qq / q.a;
        double r2 = (qq != 0.0) ? q.c / qq : -q.b / q.a - r1;
        if (r1 < r2) std::swap(r1, r2);
        l1 = r1;
        l2 = r2;
    } else {
        const double re = -q.b / (2.0 * q.a);
        const double im = std::sqrt(-disc) / (2.0 * q.a);
        l1 = {re, im};
        l2 = {re, -im};
    }
    return {l1, l2};
}

std::pair<bool, StabilityMargins> stability_verdict(const ModelParams& p,
                                                    const ReactionSpec& s) {
    StabilityMargins m;
    m.g1 = s.G1;
    m.h0_g1_2tau = s.H0 + s.G1 - 2.0 * p.tau;
    double maxre = -1e300;
    for (double k : default_k_grid()) {
        auto [l1, l2] = char_roots(k, p, s);
        maxre = std::max(maxre, l1.real());
    }
    m.max_re_on_grid = maxre;
    const bool stable = (m.g1 < 0.0) && (m.h0_g1_2tau < 0.0);
    return {stable, m};
}

std::string to_string(SpectrumRegime r) {
    switch (r) {
        case SpectrumRegime::AllReal: return "AllReal";
        case SpectrumRegime::TwoComplexBands: return "TwoComplexBands";
        case SpectrumRegime::MergedComplexBand: return "MergedComplexBand";
        case SpectrumRegime::Boundary_H0_zero: return "Boundary_H0_zero";
        case SpectrumRegime::Boundary_kminus_zero: return "Boundary_kminus_zero";
    }
    return "?";
}

std::vector<double> default_k_grid() {
    static const std::vector<double> grid = [] {
        std::vector<double> g;
        g.reserve(4001);
        for (int i = 0; i <= 4000; ++i) g.push_back(-5.0 + 10.0 * i / 4000.0);
        return g;
    }();
    return grid;
}

namespace {

// Bisection for a zero of the discriminant in k on [ka, kb], sign change
// assumed.
double bisect_disc(double ka, double kb, const ModelParams& p, const ReactionSpec& s) {
    double fa = discriminant(ka, p, s);
    for (int it = 0; it < 200; ++it) {
        double km = 0.5 * (ka + kb);
        double fm = discriminant(km, p, s);
        if ((fa <= 0) == (fm <= 0)) {
            ka = km;
            fa = fm;
        } else {
            kb = km;
        }
        if (kb - ka < 1e-10 * (1.0 + kb)) break;
    }
    return 0.5 * (ka + kb);
}

}  // namespace

SpectrumReport classify_regime(const ModelParams& p, const ReactionSpec& s,
                               const std::vector<double>& k_grid) {
    auto [stable, margins] = stability_verdict(p, s);
    if (!stable)
        throw PreconditionError("classify_regime is defined for the stable case only");

    SpectrumReport rep;
    rep.stable = true;
    rep.margin = margins.max_re_on_grid;
    auto tips = char_roots(0.0, p, s);
    rep.tip_lambda_plus = tips.first;
    rep.tip_lambda_minus = tips.second;

    const double h0 = s.H0;
    const double thr_merge = std::pow(std::sqrt(2.0 * p.tau) - std::sqrt(-s.G1), 2);
    const double tol = 1e-8;

    if (std::abs(h0) <= tol) {
        rep.regime = SpectrumRegime::Boundary_H0_zero;
        return rep;
    }
    if (h0 < 0.0) {
        rep.regime = SpectrumRegime::AllReal;
        return rep;
    }
    if (std::abs(h0 - thr_merge) <= tol) {
        rep.regime = SpectrumRegime::Boundary_kminus_zero;
        rep.k_minus = 0.0;
    } else if (h0 < thr_merge) {
        rep.regime = SpectrumRegime::TwoComplexBands;
    } else {
        rep.regime = SpectrumRegime::MergedComplexBand;
    }

    // Locate the complex band boundaries by bisection on the discriminant,
    // scanning k >= 0 on the positive half of the grid.
    std::vector<double> ks;
    for (double k : k_grid)
        if (k >= 0.0) ks.push_back(k);
    std::sort(ks.begin(), ks.end());
    double prev = ks.empty() ? 0.0 : ks.front();
    double fprev = discriminant(prev, p, s);
    std::vector<double> zeros;
    for (std::size_t i = 1; i < ks.size(); ++i) {
        double f = discriminant(ks[i], p, s);
        if ((fprev <= 0.0) != (f <= 0.0)) zeros.push_back(bisect_disc(prev, ks[i], p, s));
        prev = ks[i];
        fprev = f;
    }
    if (rep.regime == SpectrumRegime::TwoComplexBands && zeros.size() >= 2) {
        rep.k_minus = zeros[0];
        rep.k_plus = zeros[1];
    } else if (!zeros.empty()) {
        rep.k_plus = zeros.back();
        if (rep.regime == SpectrumRegime::MergedComplexBand) rep.k_minus.reset();
    }
    return rep;
}

double tip_lambda_superslow(const ModelParams& p, const ReactionSpec& s) {
    if (p.regime != Regime::SuperSlow)
        throw PreconditionError("tip_lambda_superslow requires super-slow params");
    const double denom = 2.0 * p.tau - s.H0;
    if (denom <= 0.01)
        throw PreconditionError("tip formula requires 2*tau - H0 > 0.01, got " +
                                std::to_string(denom));
    return -2.0 * p.gamma / denom;
}

std::vector<DispersionPoint> dispersion_scan(const ModelParams& p, const ReactionSpec& s,
                                             const std::vector<double>& k_grid) {
    std::vector<DispersionPoint> out;
    out.reserve(k_grid.size());
    for (double k : k_grid) {
        auto [l1, l2] = char_roots(k, p, s);
        out.push_back({k, l1, l2});
    }
    return out;
}

double distance_to_essential_spectrum(std::complex<double> lambda, const ModelParams& p,
                                      const ReactionSpec& s,
                                      const std::vector<double>& k_grid) {
    double d = 1e300;
    for (double k : k_grid) {
        auto [l1, l2] = char_roots(k, p, s);
        d = std::min(d, std::abs(lambda - l1));
        d = std::min(d, std::abs(lambda - l2));
    }
    return d;
}

}  // namespace bistable
