#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace mlp {

// Componentwise clamp radius for the fixed-point iterates: either a finite
// box [-r, r] or the identity (infinite radius). r = 0 is allowed and
// collapses values to zero.
class TruncationRadius {
public:
    constexpr TruncationRadius() = default; // infinite

    static constexpr TruncationRadius infinite() { return {}; }

    static TruncationRadius finite(double r) {
        if (!(r >= 0.0) || !std::isfinite(r))
            throw std::invalid_argument("TruncationRadius: finite radius must be >= 0");
        TruncationRadius t;
        t.r_ = r;
        return t;
    }

    bool is_finite() const { return std::isfinite(r_); }
    double radius() const { return r_; } // +infinity when not finite

    friend bool operator==(const TruncationRadius&, const TruncationRadius&) = default;

private:
    double r_ = std::numeric_limits<double>::infinity();
};

// Clamps y into [-r, r] componentwise; identity for the infinite radius.
// Returns the number of components actually clipped.
inline std::uint64_t truncate_in_place(TruncationRadius r, std::span<double> y) {
    if (!r.is_finite())
        return 0;
    const double b = r.radius();
    std::uint64_t hits = 0;
    for (double& v : y) {
        if (v > b) {
            v = b;
            ++hits;
        } else if (v < -b) {
            v = -b;
            ++hits;
        }
    }
    return hits;
}

inline std::vector<double> truncate(TruncationRadius r, std::vector<double> y) {
    truncate_in_place(r, y);
    return y;
}

// Maps a uniform u in [0,1] to the intermediate time t + (T-t)u.
inline double sample_time(double t, double T, double u) {
    if (!(t >= 0.0 && t <= T))
        throw std::invalid_argument("sample_time: need 0 <= t <= T");
    if (!(u >= 0.0 && u <= 1.0))
        throw std::invalid_argument("sample_time: need u in [0,1]");
    const double s = t + (T - t) * u;
    return std::min(T, std::max(t, s)); // guard rounding at the endpoints
}

// Problem ingredients. All callbacks must be pure and total on finite
// inputs; they are invoked concurrently from worker threads.
using TerminalFn = std::function<void(std::span<const double> x, std::span<double> out)>;
using NonlinearityFn =
    std::function<void(std::span<const double> x, std::span<const double> y, std::span<double> out)>;
using DriftFn = std::function<void(std::span<const double> x, std::span<double> out)>;
// Writes the d x d diffusion matrix in row-major order.
using DiffusionFn = std::function<void(std::span<const double> x, std::span<double> out)>;

// x + scale * (W_s - W_t), sampled exactly.
struct ScaledBrownian {
    double scale = 1.0;
};

// dX_i = X_i dt + X_i dW_i: geometric Brownian motion with unit drift and
// unit volatility per coordinate, sampled exactly.
struct UnitDriftGbm {};

// Generic SDE integrated with Euler-Maruyama. mu and sigma must be globally
// Lipschitz (caller's responsibility). The step count over [t, s] is
// max(1, ceil(em_steps_per_unit_time * (s - t))).
struct GenericSde {
    DriftFn mu;
    DiffusionFn sigma;
    int em_steps_per_unit_time = 20;
};

using FlowSpec = std::variant<ScaledBrownian, UnitDriftGbm, GenericSde>;

// One semilinear parabolic PDE system: state dimension d, system dimension
// k, horizon T, nonlinearity f : R^d x R^k -> R^k, terminal condition
// g : R^d -> R^k and the diffusion flow of the associated SDE.
struct SemilinearProblem {
    int d = 0;
    int k = 0;
    double T = 0.0;
    NonlinearityFn f;
    TerminalFn g;
    FlowSpec flow;
};

// One estimator evaluation request: point (t, x), iteration index n, Monte
// Carlo base M and truncation radius r.
struct MlpQuery {
    double t = 0.0;
    std::vector<double> x;
    int n = 0;
    std::uint64_t M = 1;
    TruncationRadius r = TruncationRadius::infinite();
};

} // namespace mlp
