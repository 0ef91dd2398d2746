#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlp/model.hpp"
#include "mlp/rng.hpp"

namespace mlp {

struct DrawCounts {
    std::uint64_t gaussian_scalars = 0;
    std::uint64_t uniforms = 0;
};

// One sample of the flow X_{t,s} together with the randomness it consumed.
struct FlowSample {
    std::vector<double> state;
    DrawCounts draws;
};

namespace detail {

inline void require_ordered(double t, double s, const char* who) {
    if (!(s >= t))
        throw std::invalid_argument(std::string(who) + ": need s >= t");
}

inline void require_finite_state(std::span<const double> x, const char* who) {
    for (double v : x)
        if (!std::isfinite(v))
            throw std::runtime_error(std::string(who) + ": non-finite state");
}

} // namespace detail

// x + scale * sqrt(s-t) * z for a standard normal vector z. Exact in
// distribution for constant-diffusion driftless flows.
inline void sample_scaled_brownian(std::span<const double> x, double t, double s, double scale,
                                   std::span<const double> z, std::span<double> out) {
    detail::require_ordered(t, s, "sample_scaled_brownian");
    const double c = scale * std::sqrt(s - t);
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + c * z[i];
}

// Component i: x_i * exp((s-t)/2 + sqrt(s-t) * z_i) — the exact solution of
// dX_i = X_i dt + X_i dW_i over [t, s].
inline void sample_gbm(std::span<const double> x, double t, double s, std::span<const double> z,
                       std::span<double> out) {
    detail::require_ordered(t, s, "sample_gbm");
    const double dt = s - t;
    const double sq = std::sqrt(dt);
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] * std::exp(0.5 * dt + sq * z[i]);
}

// Euler-Maruyama with uniform step h = (s-t)/steps:
//   X <- X + mu(X) h + sigma(X) (sqrt(h) Z_j),  j = 1..steps.
// Consumes exactly steps * d Gaussian scalars for s > t and none for s == t.
template <RandomStream S>
DrawCounts sample_euler_maruyama(const DriftFn& mu, const DiffusionFn& sigma,
                                 std::span<const double> x, double t, double s, int steps,
                                 S& stream, std::span<double> out) {
    detail::require_ordered(t, s, "sample_euler_maruyama");
    if (steps < 1)
        throw std::invalid_argument("sample_euler_maruyama: steps must be >= 1");
    if (!mu || !sigma)
        throw std::invalid_argument("sample_euler_maruyama: mu and sigma must be callable");

    std::copy(x.begin(), x.end(), out.begin());
    if (s == t)
        return {};

    const std::uint64_t g0 = stream.gaussians_drawn();
    const std::uint64_t u0 = stream.uniforms_drawn();
    const std::size_t d = x.size();
    const double h = (s - t) / steps;
    const double sqh = std::sqrt(h);
    std::vector<double> drift(d), diff(d * d), z(d);
    for (int j = 0; j < steps; ++j) {
        mu(out, drift);
        sigma(out, diff);
        stream.fill_gaussian(z);
        for (std::size_t i = 0; i < d; ++i) {
            double noise = 0.0;
            const double* row = diff.data() + i * d;
            for (std::size_t c = 0; c < d; ++c)
                noise += row[c] * z[c];
            out[i] += drift[i] * h + sqh * noise;
        }
        detail::require_finite_state(out, "sample_euler_maruyama");
    }
    return {stream.gaussians_drawn() - g0, stream.uniforms_drawn() - u0};
}

// Samples the flow for any FlowSpec, drawing from the given Gaussian stream
// and reporting the randomness consumed. Zero-length intervals return x and
// consume nothing. `out` must not alias `x`.
template <RandomStream S>
DrawCounts sample_flow_into(const FlowSpec& spec, std::span<const double> x, double t, double s,
                            S& stream, std::span<double> out) {
    detail::require_ordered(t, s, "sample_flow");
    if (s == t) {
        std::copy(x.begin(), x.end(), out.begin());
        return {};
    }
    const std::uint64_t g0 = stream.gaussians_drawn();
    const std::uint64_t u0 = stream.uniforms_drawn();
    if (const auto* sb = std::get_if<ScaledBrownian>(&spec)) {
        stream.fill_gaussian(out);
        sample_scaled_brownian(x, t, s, sb->scale, out, out);
    } else if (std::holds_alternative<UnitDriftGbm>(spec)) {
        stream.fill_gaussian(out);
        sample_gbm(x, t, s, out, out);
    } else {
        const auto& sde = std::get<GenericSde>(spec);
        if (sde.em_steps_per_unit_time < 1)
            throw std::invalid_argument("GenericSde: em_steps_per_unit_time must be >= 1");
        const int steps =
            std::max(1, static_cast<int>(std::ceil(sde.em_steps_per_unit_time * (s - t))));
        return sample_euler_maruyama(sde.mu, sde.sigma, x, t, s, steps, stream, out);
    }
    return {stream.gaussians_drawn() - g0, stream.uniforms_drawn() - u0};
}

template <RandomStream S>
FlowSample sample_flow(const FlowSpec& spec, std::span<const double> x, double t, double s,
                       S& stream) {
    FlowSample fs;
    fs.state.resize(x.size());
    fs.draws = sample_flow_into(spec, x, t, s, stream, fs.state);
    return fs;
}

} // namespace mlp
