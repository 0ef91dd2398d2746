#include "mlp/estimator.hpp"

#include <limits>

namespace mlp {

namespace detail {

namespace {

using u128 = unsigned __int128;

constexpr u128 kU64Max = std::numeric_limits<std::uint64_t>::max();

u128 checked_mul(u128 a, u128 b) {
    if (a != 0 && b > ~static_cast<u128>(0) / a)
        throw std::overflow_error("mlp cost predictor: 128-bit overflow");
    return a * b;
}

u128 checked_add(u128 a, u128 b) {
    if (a > ~static_cast<u128>(0) - b)
        throw std::overflow_error("mlp cost predictor: 128-bit overflow");
    return a + b;
}

u128 pow_u128(std::uint64_t base, int exp) {
    u128 r = 1;
    for (int i = 0; i < exp; ++i)
        r = checked_mul(r, base);
    return r;
}

std::uint64_t narrow(u128 v) {
    if (v > kU64Max)
        throw std::overflow_error("mlp cost predictor: count exceeds 64 bits");
    return static_cast<std::uint64_t>(v);
}

// Shared shape of the two predictors: each (l, m) node costs one direct draw
// plus its subtree and (for l >= 1) the companion subtree; the M^j terminal
// samples only enter the flow-sample count.
std::uint64_t predict(int n, std::uint64_t M, bool count_g) {
    if (n < 0)
        throw std::invalid_argument("cost predictor: n must be >= 0");
    if (M < 1)
        throw std::invalid_argument("cost predictor: M must be >= 1");
    std::vector<u128> c(static_cast<std::size_t>(n) + 1, 0);
    for (int j = 1; j <= n; ++j) {
        u128 acc = count_g ? pow_u128(M, j) : 0;
        for (int l = 0; l < j; ++l) {
            u128 per_node = checked_add(1, c[l]);
            if (l >= 1)
                per_node = checked_add(per_node, c[l - 1]);
            acc = checked_add(acc, checked_mul(pow_u128(M, j - l), per_node));
        }
        c[j] = acc;
    }
    return narrow(c[n]);
}

} // namespace

std::uint64_t checked_pow(std::uint64_t base, int exp) {
    return narrow(pow_u128(base, exp));
}

void validate_estimate_args(const SemilinearProblem& problem, const MlpQuery& query) {
    if (problem.d < 1 || problem.k < 1)
        throw std::invalid_argument("mlp_estimate: problem dimensions must be positive");
    if (!(problem.T > 0.0) || !std::isfinite(problem.T))
        throw std::invalid_argument("mlp_estimate: horizon T must be positive and finite");
    if (!problem.f || !problem.g)
        throw std::invalid_argument("mlp_estimate: f and g must be callable");
    if (query.x.size() != static_cast<std::size_t>(problem.d))
        throw std::invalid_argument("mlp_estimate: query point dimension mismatch");
    if (!(query.t >= 0.0 && query.t <= problem.T))
        throw std::invalid_argument("mlp_estimate: need 0 <= t <= T");
    if (query.n < 0)
        throw std::invalid_argument("mlp_estimate: need n >= 0");
    if (query.M < 1)
        throw std::invalid_argument("mlp_estimate: need M >= 1");
}

} // namespace detail

Estimate mlp_estimate(const SemilinearProblem& problem, const MlpQuery& query,
                      const MultiIndexKey& root, std::uint64_t master_seed) {
    return mlp_estimate(problem, query, root, KeyedStreamFamily(master_seed));
}

std::uint64_t predicted_flow_samples(int n, std::uint64_t M) {
    return detail::predict(n, M, /*count_g=*/true);
}

std::uint64_t predicted_uniforms(int n, std::uint64_t M) {
    return detail::predict(n, M, /*count_g=*/false);
}

} // namespace mlp
