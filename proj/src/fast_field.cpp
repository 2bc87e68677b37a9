#include "bistable/fast_field.hpp"

#include <cmath>

#include "bistable/errors.hpp"

namespace bistable {

namespace {

void check_v0(double v0) {
    if (!(v0 > -1.0))
        throw DomainError("fast field requires v0 > -1, got " + std::to_string(v0));
}

double cutoff(double v0) { return 40.0 / std::sqrt(1.0 + v0); }

// Tail of integrals with a sech^2(rate*xi) factor beyond the cutoff:
// sech^2(y) <= 4 exp(-2y), so the remainder is bounded by
// amp * 4 exp(-2*rate*xi_c) / (2*rate) per side.
double tail_bound(double v0, double amplitude) {
    const double rate = std::sqrt((1.0 + v0) / 2.0);
    const double y = rate * cutoff(v0);
    return amplitude * 4.0 * std::exp(-2.0 * y) / rate;
}

}  // namespace

FastFront::FastFront(double v0_) : v0(v0_) { check_v0(v0_); }

double FastFront::rate() const { return std::sqrt((1.0 + v0) / 2.0); }

double FastFront::u0(double xi) const { return std::sqrt(1.0 + v0) * std::tanh(rate() * xi); }

double FastFront::p0(double xi) const {
    const double c = std::cosh(rate() * xi);
    return (1.0 + v0) / (std::sqrt(2.0) * c * c);
}

double FastFront::dp0(double xi) const {
    const double u = u0(xi);
    return -(1.0 + v0 - u * u) * u;
}

double FastFront::ddp0(double xi) const {
    const double u = u0(xi);
    return -(1.0 + v0 - 3.0 * u * u) * p0(xi);
}

std::pair<double, double> fast_front_eval(double xi, double v0) {
    FastFront f(v0);
    return {f.u0(xi), f.p0(xi)};
}

double u_inhomogeneous(double xi, double v0) {
    FastFront f(v0);
    return (f.u0(xi) + xi * f.p0(xi)) / (2.0 * (1.0 + v0));
}

FastQuadratureResult jump_integral_J(double v0, const ReactionSpec& spec, double abs_tol) {
    FastFront f(v0);
    const double xc = cutoff(v0);
    auto integrand = [&](double xi) {
        const double u = f.u0(xi);
        const double usq = u * u;
        return (1.0 + v0 - usq) * spec.H(usq, v0);
    };
    QuadratureOptions opts;
    opts.abs_tol = abs_tol;
    auto q = integrate_gk(integrand, -xc, xc, opts);
    FastQuadratureResult r;
    r.value = q.value;
    r.abs_tol = abs_tol;
    r.truncation_bound = tail_bound(v0, (1.0 + v0) * std::abs(spec.H(1.0 + v0, v0)) + 1e-300);
    return r;
}

double melnikov_splitting(double q0) { return -q0 * std::sqrt(2.0); }

StabilityIntegrals stability_integrals(double v0, const ReactionSpec& spec, double abs_tol) {
    FastFront f(v0);
    const double xc = cutoff(v0);
    QuadratureOptions opts;
    opts.abs_tol = abs_tol;

    auto i1 = integrate_gk(
        [&](double xi) {
            const double u = f.u0(xi);
            const double usq = u * u;
            return (1.0 + v0 - usq) * spec.H(usq, v0);
        },
        -xc, xc, opts);
    auto i2 = integrate_gk(
        [&](double xi) {
            const double u = f.u0(xi);
            const double usq = u * u;
            return (1.0 + v0 - usq) *
                   (usq * spec.dH_dUsq(usq, v0) + (1.0 + v0) * spec.dH_dV(usq, v0));
        },
        -xc, xc, opts);
    auto i3 = integrate_gk(
        [&](double xi) {
            const double u = f.u0(xi);
            const double usq = u * u;
            return ((1.0 + v0 - usq) * spec.dH_dUsq(usq, v0) - spec.H(usq, v0)) * xi * u *
                   f.p0(xi);
        },
        -xc, xc, opts);

    StabilityIntegrals s{i1.value, i2.value, i3.value};
    if (std::abs(s.I3 + 0.5 * s.I1) > 1e-7 * (1.0 + std::abs(s.I1)))
        throw QuadratureFailure("stability integrals violate I3 = -I1/2: I1=" +
                                std::to_string(s.I1) + " I3=" + std::to_string(s.I3));
    return s;
}

FastEigenvalues fast_eigenvalues(double v0) {
    check_v0(v0);
    return {0.0, -1.5 * (1.0 + v0), -2.0 * (1.0 + v0)};
}

double jump_integral_J_derivative(double v0, const ReactionSpec& spec, double abs_tol) {
    auto s = stability_integrals(v0, spec, abs_tol);
    return (s.I1 + 2.0 * s.I2) / (2.0 * (1.0 + v0));
}

}  // namespace bistable
