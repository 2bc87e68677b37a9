#pragma once

#include <utility>

#include "bistable/model.hpp"
#include "bistable/quadrature.hpp"

namespace bistable {

// Closed-form objects of the fast subsystem at frozen slow level v0 > -1:
// the heteroclinic front
//   u0(xi) = sqrt(1+v0) * tanh(sqrt((1+v0)/2) * xi),
//   p0(xi) = u0'(xi)   = ((1+v0)/sqrt(2)) * sech^2(sqrt((1+v0)/2) * xi),
// the bounded solution of the inhomogeneous linearized problem, and the
// quadratures over the fast field used by the existence and stability
// analyses. All integrands decay like sech^2, so integrals are truncated at
// |xi| = 40/sqrt(1+v0) with a tail below 1e-24.

struct FastFront {
    double v0;

    explicit FastFront(double v0_);

    double rate() const;            // sqrt((1+v0)/2)
    double u0(double xi) const;
    double p0(double xi) const;     // = d(u0)/d(xi)
    double dp0(double xi) const;    // = -(1+v0-u0^2)*u0
    double ddp0(double xi) const;   // = -(1+v0-3u0^2)*p0
};

std::pair<double, double> fast_front_eval(double xi, double v0);

// Bounded solution of u'' + (1+v0-3u0^2)u = -u0, normalized as
// (u0 + xi*u0')/(2(1+v0)).
double u_inhomogeneous(double xi, double v0);

struct FastQuadratureResult {
    double value = 0.0;
    double truncation_bound = 0.0;
    double abs_tol = 0.0;
};

// J(v0) = integral of (1+v0-u0^2) H(u0^2, v0) over the line. The existence
// condition uses half of it.
FastQuadratureResult jump_integral_J(double v0, const ReactionSpec& spec, double abs_tol = 1e-10);

// Leading-order splitting distance of the stable/unstable manifolds at
// transversal crossing level q0.
double melnikov_splitting(double q0);

struct StabilityIntegrals {
    double I1 = 0.0;
    double I2 = 0.0;
    double I3 = 0.0;
};

// The three fast-field integrals of the stability analysis; I3 = -I1/2 holds
// identically (partial integration) and is verified on return.
StabilityIntegrals stability_integrals(double v0, const ReactionSpec& spec,
                                       double abs_tol = 1e-10);

struct FastEigenvalues {
    double lambda1 = 0.0;   // translation
    double lambda2 = 0.0;   // -(3/2)(1+v0)
    double ess_edge = 0.0;  // -2(1+v0)
};
FastEigenvalues fast_eigenvalues(double v0);

// d/dv0 of J(v0), via the same integrals (dJ/dv = (I1 + 2*I2)/(2(1+v0))).
double jump_integral_J_derivative(double v0, const ReactionSpec& spec, double abs_tol = 1e-10);

}  // namespace bistable
