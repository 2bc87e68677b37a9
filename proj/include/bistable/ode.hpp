#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>

#include "bistable/errors.hpp"

namespace bistable {

// Adaptive Dormand-Prince 5(4) for small complex systems, with continuous
// renormalization: whenever the solution norm leaves [1e-3, 1e3] it is
// rescaled to unit norm and the log magnitude accumulated. Needed for
// exponentially growing flows (compound-matrix integration) where the
// direction carries the information.
template <std::size_t N>
struct RK45 {
    using State = std::array<std::complex<double>, N>;
    using Rhs = std::function<void(double, const State&, State&)>;

    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    double max_step = 1.0;
    double min_step_fraction = 1e-12;  // of the total span

    struct Result {
        State y;
        double log_factor = 0.0;  // solution = y * exp(log_factor)
        long steps = 0;
    };

    static double norm(const State& y) {
        double s = 0.0;
        for (const auto& v : y) s += std::norm(v);
        return std::sqrt(s);
    }

    Result integrate(const Rhs& f, double t0, double t1, State y,
                     const std::function<void(double, const State&, double)>& observer = {}) const {
        Result res;
        const double span = t1 - t0;
        if (span == 0.0) {
            res.y = y;
            return res;
        }
        const double dir = span > 0 ? 1.0 : -1.0;
        double h = dir * std::min(max_step, std::abs(span) / 16.0);
        const double hmin = std::abs(span) * min_step_fraction;
        double t = t0;
        State k1, k2, k3, k4, k5, k6, k7, ytmp, y5, y4;
        f(t, y, k1);
        while (dir * (t1 - t) > 0.0) {
            if (dir * (t + h - t1) > 0.0) h = t1 - t;
            if (std::abs(h) < hmin)
                throw StiffnessFailure("rk45: step size underflow at t=" + std::to_string(t));

            auto stage = [&](State& out, std::initializer_list<std::pair<double, const State*>> terms) {
                for (std::size_t i = 0; i < N; ++i) {
                    std::complex<double> acc = y[i];
                    for (const auto& [c, k] : terms) acc += h * c * (*k)[i];
                    out[i] = acc;
                }
            };
            stage(ytmp, {{1.0 / 5, &k1}});
            f(t + h / 5, ytmp, k2);
            stage(ytmp, {{3.0 / 40, &k1}, {9.0 / 40, &k2}});
            f(t + 3 * h / 10, ytmp, k3);
            stage(ytmp, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}});
            f(t + 4 * h / 5, ytmp, k4);
            stage(ytmp, {{19372.0 / 6561, &k1},
                         {-25360.0 / 2187, &k2},
                         {64448.0 / 6561, &k3},
                         {-212.0 / 729, &k4}});
            f(t + 8 * h / 9, ytmp, k5);
            stage(ytmp, {{9017.0 / 3168, &k1},
                         {-355.0 / 33, &k2},
                         {46732.0 / 5247, &k3},
                         {49.0 / 176, &k4},
                         {-5103.0 / 18656, &k5}});
            f(t + h, ytmp, k6);
            stage(y5, {{35.0 / 384, &k1},
                       {500.0 / 1113, &k3},
                       {125.0 / 192, &k4},
                       {-2187.0 / 6784, &k5},
                       {11.0 / 84, &k6}});
            f(t + h, y5, k7);

            double err = 0.0;
            static constexpr std::array<double, 7> db = {
                35.0 / 384 - 5179.0 / 57600, 0.0, 500.0 / 1113 - 7571.0 / 16695,
                125.0 / 192 - 393.0 / 640,  -2187.0 / 6784 + 92097.0 / 339200,
                11.0 / 84 - 187.0 / 2100,   -1.0 / 40};
            const double scale = rel_tol * std::max(norm(y), norm(y5)) + abs_tol;
            for (std::size_t i = 0; i < N; ++i) {
                std::complex<double> e = db[0] * k1[i] + db[2] * k3[i] + db[3] * k4[i] +
                                         db[4] * k5[i] + db[5] * k6[i] + db[6] * k7[i];
                err += std::norm(h * e);
            }
            err = std::sqrt(err) / scale;

            if (err <= 1.0) {
                t += h;
                y = y5;
                k1 = k7;  // FSAL
                ++res.steps;
                double ny = norm(y);
                if (ny > 1e3 || (ny < 1e-3 && ny > 0.0)) {
                    for (auto& v : y) v /= ny;
                    for (auto& v : k1) v /= ny;
                    res.log_factor += std::log(ny);
                }
                if (observer) observer(t, y, res.log_factor);
            }
            double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
            h *= std::min(5.0, std::max(0.2, fac));
            if (std::abs(h) > max_step) h = dir * max_step;
        }
        res.y = y;
        return res;
    }
};

}  // namespace bistable
