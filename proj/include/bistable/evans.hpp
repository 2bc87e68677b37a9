#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bistable/essential_spectrum.hpp"
#include "bistable/existence.hpp"
#include "bistable/log_complex.hpp"
#include "bistable/model.hpp"

namespace bistable {

// Evans function machinery for the linearization about a front. The
// linearized problem is a first-order system phi' = A(xi; lambda) phi in C^4
// with trace-free A; the Evans function D(lambda) = det[phi1..phi4] is
// evaluated stably by integrating the induced flow on 2-planes (the exterior
// square, a 6-dimensional system) from both ends and taking the wedge at
// xi = 0. Growth factors are renormalized continuously and tracked in log
// scale. Two transmission functions are extracted: t1 (fast, analytic) and
// t2 (slow, meromorphic), with D = t1 t2 det[E+] away from poles.
//
// Near the tip of the essential spectrum the slow rates degenerate and
// shooting is ill-conditioned; there the analytic jump-matching expression
// for t2 takes over.

using Complex = std::complex<double>;

struct LinearizationContext {
    FrontProfile front;
    ModelParams params;
    ReactionSpec spec;

    // Arrays at the front grid nodes (x-scale): the u-equation potential
    // 1 + V - 3U^2, the coupling U, and the slow-row coefficients
    // phi_U, phi_V of the reaction Jacobian.
    std::vector<double> pot_u;
    std::vector<double> coup_u;
    std::vector<double> phi_u;
    std::vector<double> phi_v;
    double tail_defect = 0.0;  // ||A(+-L) - A(+-inf)|| measured at the ends

    static LinearizationContext make(FrontProfile front, const ModelParams& params,
                                     const ReactionSpec& spec);
};

// A(xi; lambda) with coefficients linearly interpolated between front nodes.
using Matrix4c = std::array<std::array<Complex, 4>, 4>;
Matrix4c assemble_A(double xi, Complex lambda, const LinearizationContext& ctx);

struct AsymptoticSystem {
    std::array<Complex, 4> Lambda;            // ordered: Re L4 < Re L3 < 0 < Re L2 < Re L1
    std::array<std::array<Complex, 4>, 4> E_plus;   // columns E+1..E+4
    std::array<std::array<Complex, 4>, 4> E_minus;  // columns E-1..E-4
    Complex mu_fast;  // Lambda1^2
    Complex mu_slow;  // Lambda2^2
};

// Exact eigen-decomposition of A(+-inf): the characteristic polynomial is a
// quadratic in Lambda^2, solved in closed form; eigenvalues come in +- pairs
// so sum(Lambda) = 0 identically. NearMinusTwo guards the fast/slow labeling,
// which degrades when the two Lambda^2 roots collide near lambda = -2; the
// default margin 10*eps follows the operation contract, while the Evans
// evaluator uses the tighter physical collision scale ~ eps*sqrt(2|H0|).
AsymptoticSystem asymptotic_system(Complex lambda, const ModelParams& params,
                                   const ReactionSpec& spec,
                                   double near_minus_two_margin = -1.0);

enum class EvansMethod { CompoundMatrix, JumpMatching, AnalyticLeadingOrder };

struct EvansEvaluation {
    Complex lambda;
    LogComplex D;
    LogComplex t1;
    LogComplex t2;
    EvansMethod method = EvansMethod::CompoundMatrix;
    double rescale_log = 0.0;

    // D scaled so that O(1) values are typical away from eigenvalues.
    Complex D_normalized() const { return D.mantissa * std::exp(D.log_scale - rescale_log); }
};

struct EvansOptions {
    double rel_tol = 1e-10;
    double ess_margin = 1e-6;  // refuse lambda closer than this to sigma_ess ordering loss
};

EvansEvaluation evans_compound(Complex lambda, const LinearizationContext& ctx,
                               const EvansOptions& opts = {});

// Scalar (2x2) Evans function of the decoupled u-equation along the front;
// meaningful when the slow coupling vanishes (H == 0) and as the fast reduced
// limit. D_f = det[psi1, psi4] at xi = 0.
LogComplex evans_scalar(Complex lambda, const LinearizationContext& ctx,
                        const EvansOptions& opts = {});

// Closed-form fast-limit transmission ratio: zeros at P = 1 (lambda =
// -(3/2)(1+v0)) and P = 2 (lambda = 0), P^2 = 2 lambda/(1+v0) + 4.
Complex scalar_evans_analytic(Complex lambda, double v0);

// Slow transmission function by jump-matching (rescaled spectral variable
// lambda_tilde = lambda / eps^2):
//   t2 = 1 - (I1 + 2 I2) / (4 (1+v0) sqrt(lt (tau - H0/2) + gamma)).
Complex t2_jump_matching(Complex lambda_tilde, double v0, const ModelParams& params,
                         const ReactionSpec& spec);

struct EdgePrediction {
    double v0 = 0.0;
    double lambda_tilde_edge = 0.0;
    double lambda_edge = 0.0;
    bool exists = false;  // H0 > 0 gate
};

EdgePrediction lambda_edge_predict(double v0, const ModelParams& params,
                                   const ReactionSpec& spec);

// gamma at which t2(0) vanishes for the given v0:
// ((I1 + 2 I2)/(4 (1+v0)))^2. Coincides with the fold tangency.
double gamma_double_from_stability(double v0, const ReactionSpec& spec);

// Argument-principle winding of f along a closed polyline, refined until the
// turning per segment is below pi/2.
int winding_count(const std::vector<Complex>& contour,
                  const std::function<Complex(Complex)>& f, int max_points = 10000);
int winding_count(const std::vector<Complex>& contour, const LinearizationContext& ctx,
                  const EvansOptions& opts = {});

std::vector<Complex> circle_contour(Complex center, double radius, int n = 32);
std::vector<Complex> rectangle_contour(Complex lo, Complex hi, int n_per_side = 16);

// ---------------------------------------------------------------------------
// Direct discretized-operator oracle: second-order finite differences with
// Neumann boundary conditions, generalized eigenproblem with weight (1, tau),
// shift-invert Arnoldi near a set of targets.

enum class Parity { u_odd_v_even, u_even_v_odd, mixed };
std::string to_string(Parity p);

struct OracleEigenpair {
    Complex lambda;
    double error_estimate = 0.0;  // Richardson, N vs 2N
    Parity parity = Parity::mixed;
    bool cluster = false;  // within 5x error of the sampled essential spectrum
    std::vector<Complex> u, v;  // eigenvector components on the oracle grid
};

struct OracleOptions {
    int N = 4096;          // grid intervals (even); the Richardson partner uses N/2
    double L = 50.0;       // domain half-width
    std::vector<double> shifts;  // targets; defaults derived from the context
    int krylov = 90;
    int n_per_shift = 12;
    double re_min = -2.0;  // return eigenvalues with Re > re_min
    double residual_tol = 1e-8;
};

std::vector<OracleEigenpair> discrete_spectrum_oracle(const LinearizationContext& ctx,
                                                      const OracleOptions& opts);

Parity parity_check(const std::vector<Complex>& u, const std::vector<Complex>& v);

}  // namespace bistable
