#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "bistable/model.hpp"

namespace bistable {

// Background-state dispersion relation
//   Q(lambda, k) = (lambda + k^2 + 2)(eps^2 tau lambda + k^2 - eps^2(H0+G1))
//                  + 2 eps^2 H0 = 0,
// shared by both rest states. The stable essential spectrum comes in five
// qualitative shapes depending on H0 relative to 0, (sqrt(2 tau)-sqrt(-G1))^2
// and 2 tau - G1.

struct DispersionPoint {
    double k = 0.0;
    std::complex<double> lambda1;  // larger real part
    std::complex<double> lambda2;
};

// Roots of Q(., k), ordered by descending real part.
std::pair<std::complex<double>, std::complex<double>> char_roots(double k,
                                                                 const ModelParams& params,
                                                                 const ReactionSpec& spec);

// Residual |Q(lambda, k)| — diagnostic for the root identities.
std::complex<double> char_poly(std::complex<double> lambda, double k, const ModelParams& params,
                               const ReactionSpec& spec);

struct StabilityMargins {
    double g1 = 0.0;              // must be < 0
    double h0_g1_2tau = 0.0;      // H0 + G1 - 2 tau, must be < 0
    double max_re_on_grid = 0.0;  // cross-validation over the k grid
};

std::pair<bool, StabilityMargins> stability_verdict(const ModelParams& params,
                                                    const ReactionSpec& spec);

enum class SpectrumRegime {
    AllReal,
    TwoComplexBands,
    MergedComplexBand,
    Boundary_H0_zero,
    Boundary_kminus_zero,
};
std::string to_string(SpectrumRegime r);

struct SpectrumReport {
    bool stable = false;
    SpectrumRegime regime = SpectrumRegime::AllReal;
    std::optional<double> k_minus;
    std::optional<double> k_plus;
    std::complex<double> tip_lambda_plus;
    std::complex<double> tip_lambda_minus;
    double margin = 0.0;  // max over k of Re(lambda)
};

std::vector<double> default_k_grid();

// Classification of the stable essential spectrum; PreconditionError when the
// verdict is unstable.
SpectrumReport classify_regime(const ModelParams& params, const ReactionSpec& spec,
                               const std::vector<double>& k_grid = default_k_grid());

// Rescaled tip of the near-origin branch in the super-slow regime:
// lambda_tip = eps^2 * (-2 gamma / (2 tau - H0)).
double tip_lambda_superslow(const ModelParams& params, const ReactionSpec& spec);

std::vector<DispersionPoint> dispersion_scan(const ModelParams& params, const ReactionSpec& spec,
                                             const std::vector<double>& k_grid = default_k_grid());

// Distance from lambda to the sampled dispersion curve.
double distance_to_essential_spectrum(std::complex<double> lambda, const ModelParams& params,
                                      const ReactionSpec& spec,
                                      const std::vector<double>& k_grid = default_k_grid());

}  // namespace bistable
