#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlp/flows.hpp"
#include "mlp/model.hpp"
#include "mlp/rng.hpp"

namespace mlp {

// Randomness and evaluation counts aggregated over one full recursion tree.
// clamp_hits counts components actually clipped by the truncation operator.
struct CostCounters {
    std::uint64_t gaussian_scalars = 0;
    std::uint64_t uniforms = 0;
    std::uint64_t f_evals = 0;
    std::uint64_t g_evals = 0;
    std::uint64_t flow_samples = 0;
    std::uint64_t clamp_hits = 0;

    CostCounters& operator+=(const CostCounters& o) {
        gaussian_scalars += o.gaussian_scalars;
        uniforms += o.uniforms;
        f_evals += o.f_evals;
        g_evals += o.g_evals;
        flow_samples += o.flow_samples;
        clamp_hits += o.clamp_hits;
        return *this;
    }

    friend bool operator==(const CostCounters&, const CostCounters&) = default;
};

struct Estimate {
    std::vector<double> value;
    CostCounters counters;
};

namespace detail {

// base^exp with overflow detection (128-bit intermediates).
std::uint64_t checked_pow(std::uint64_t base, int exp);

inline void check_finite(std::span<const double> v, const MultiIndexKey& key, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::runtime_error(std::string("mlp_estimate: non-finite ") + what +
                                     " output at node " + key.to_string());
}

// Scratch for the depth-first recursion: one slot per recursion depth, so
// no allocations happen inside the tree walk.
class Scratch {
public:
    Scratch(int depths, int d, int k)
        : d_(d), k_(k), x_((depths + 1) * d), v_((depths + 1) * k * kPerDepth) {}

    std::span<double> x(int depth) { return {x_.data() + static_cast<std::size_t>(depth) * d_, static_cast<std::size_t>(d_)}; }
    std::span<double> gsum(int depth) { return slot(depth, 0); }
    std::span<double> lsum(int depth) { return slot(depth, 1); }
    std::span<double> sub(int depth) { return slot(depth, 2); }
    std::span<double> clamped(int depth) { return slot(depth, 3); }
    std::span<double> feval(int depth) { return slot(depth, 4); }
    std::span<double> geval(int depth) { return slot(depth, 5); }

private:
    static constexpr int kPerDepth = 6;

    std::span<double> slot(int depth, int which) {
        return {v_.data() + (static_cast<std::size_t>(depth) * kPerDepth + which) * k_,
                static_cast<std::size_t>(k_)};
    }

    std::size_t d_, k_;
    std::vector<double> x_, v_;
};

template <StreamFamily Family>
class MlpEvaluator {
public:
    MlpEvaluator(const SemilinearProblem& p, const Family& streams, std::uint64_t M,
                 TruncationRadius r, int max_n)
        : prob_(p), streams_(streams), M_(M), r_(r), scratch_(max_n + 1, p.d, p.k) {}

    CostCounters counters;

    // V_n(t, x) written into `out` (k components). `key` is the node address
    // of this estimator; entries pushed below it address the subtree.
    void evaluate(int n, double t, std::span<const double> x, MultiIndexKey& key, int depth,
                  std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        if (n <= 0)
            return;

        const double T = prob_.T;
        if (t == T) { // every flow sample is x itself and the level sums carry factor 0
            prob_.g(x, out);
            counters.g_evals += 1;
            check_finite(out, key, "g");
            return;
        }

        // Terminal-value average over M^n independent companion samples.
        const std::uint64_t mn = checked_pow(M_, n);
        const auto xs = scratch_.x(depth);
        const auto gsum = scratch_.gsum(depth);
        const auto gval = scratch_.geval(depth);
        std::fill(gsum.begin(), gsum.end(), 0.0);
        for (std::uint64_t m = 1; m <= mn; ++m) {
            key.push(0, -static_cast<std::int64_t>(m));
            auto gs = streams_.gaussian_stream(key);
            sample_to(x, t, T, gs, xs, key);
            prob_.g(xs, gval);
            counters.g_evals += 1;
            check_finite(gval, key, "g");
            for (int i = 0; i < prob_.k; ++i)
                gsum[i] += gval[i];
            key.pop();
        }
        for (int i = 0; i < prob_.k; ++i)
            out[i] = gsum[i] / static_cast<double>(mn);

        // Level differences, M^(n-l) copies each.
        for (int l = 0; l < n; ++l) {
            const std::uint64_t copies = checked_pow(M_, n - l);
            const auto lsum = scratch_.lsum(depth);
            const auto sub = scratch_.sub(depth);
            const auto clamped = scratch_.clamped(depth);
            const auto fval = scratch_.feval(depth);
            std::fill(lsum.begin(), lsum.end(), 0.0);
            for (std::uint64_t m = 1; m <= copies; ++m) {
                key.push(l, static_cast<std::int64_t>(m));
                auto us = streams_.uniform_stream(key);
                const double u = us.next_uniform();
                counters.uniforms += 1;
                const double R = sample_time(t, T, u);
                auto gs = streams_.gaussian_stream(key);
                sample_to(x, t, R, gs, xs, key);

                // f at the current iterate, estimated by the subtree rooted here.
                evaluate(l, R, xs, key, depth + 1, sub);
                std::copy(sub.begin(), sub.end(), clamped.begin());
                counters.clamp_hits += truncate_in_place(r_, clamped);
                prob_.f(xs, clamped, fval);
                counters.f_evals += 1;
                check_finite(fval, key, "f");
                for (int i = 0; i < prob_.k; ++i)
                    lsum[i] += fval[i];

                if (l >= 1) {
                    // Same sample point, previous iterate on the companion subtree.
                    key.pop();
                    key.push(l, -static_cast<std::int64_t>(m));
                    evaluate(l - 1, R, xs, key, depth + 1, sub);
                    std::copy(sub.begin(), sub.end(), clamped.begin());
                    counters.clamp_hits += truncate_in_place(r_, clamped);
                    prob_.f(xs, clamped, fval);
                    counters.f_evals += 1;
                    check_finite(fval, key, "f");
                    for (int i = 0; i < prob_.k; ++i)
                        lsum[i] -= fval[i];
                }
                key.pop();
            }
            const double scale = (T - t) / static_cast<double>(copies);
            for (int i = 0; i < prob_.k; ++i)
                out[i] += scale * lsum[i];
        }
    }

private:
    template <RandomStream S>
    void sample_to(std::span<const double> x, double t, double s, S& stream, std::span<double> out,
                   const MultiIndexKey& key) {
        DrawCounts dc;
        try {
            dc = sample_flow_into(prob_.flow, x, t, s, stream, out);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string(e.what()) + " at node " + key.to_string());
        }
        counters.flow_samples += 1;
        counters.gaussian_scalars += dc.gaussian_scalars;
        counters.uniforms += dc.uniforms;
        check_finite(out, key, "flow");
    }

    const SemilinearProblem& prob_;
    const Family& streams_;
    std::uint64_t M_;
    TruncationRadius r_;
    Scratch scratch_;
};

void validate_estimate_args(const SemilinearProblem& problem, const MlpQuery& query);

} // namespace detail

// Full-history recursive multilevel Picard estimate of the PDE solution at
// (query.t, query.x): iteration index n, Monte Carlo base M, truncation
// radius r, with all node randomness addressed below `root`. Pure function
// of its arguments; counters report the randomness actually consumed by the
// whole recursion tree.
template <StreamFamily Family>
Estimate mlp_estimate(const SemilinearProblem& problem, const MlpQuery& query,
                      const MultiIndexKey& root, const Family& streams) {
    detail::validate_estimate_args(problem, query);
    Estimate est;
    est.value.assign(problem.k, 0.0);
    detail::MlpEvaluator<Family> eval(problem, streams, query.M, query.r, query.n);
    MultiIndexKey key = root;
    eval.evaluate(query.n, query.t, query.x, key, 0, est.value);
    est.counters = eval.counters;
    return est;
}

// Convenience overload using the keyed stream family for `master_seed`.
Estimate mlp_estimate(const SemilinearProblem& problem, const MlpQuery& query,
                      const MultiIndexKey& root, std::uint64_t master_seed);

// Closed-form predictions of the randomness consumed by one estimate with
// t < T and an exact (single-draw) flow. FS(0) = UC(0) = 0 and
//   FS(n) = M^n + sum_{l<n} M^(n-l) (1 + FS(l) + [l>=1] FS(l-1)),
//   UC(n) =       sum_{l<n} M^(n-l) (1 + UC(l) + [l>=1] UC(l-1)).
// Gaussian scalars are d * FS(n). Throws std::overflow_error when the count
// exceeds 64 bits.
std::uint64_t predicted_flow_samples(int n, std::uint64_t M);
std::uint64_t predicted_uniforms(int n, std::uint64_t M);

} // namespace mlp
