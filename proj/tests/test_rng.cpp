#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mlp/rng.hpp"

using namespace mlp;

TEST_CASE("derive_key: domain separation, sign separation, determinism") {
    MultiIndexKey idx(0);

    CHECK(derive_key(1, idx, StreamTag::uniform) != derive_key(1, idx, StreamTag::gaussian));

    MultiIndexKey plus(0), minus(0);
    plus.push(0, 1);
    minus.push(0, -1);
    CHECK(derive_key(1, plus, StreamTag::uniform) != derive_key(1, minus, StreamTag::uniform));

    MultiIndexKey node(0);
    node.push(2, 3);
    CHECK(derive_key(1, node, StreamTag::gaussian) == derive_key(1, node, StreamTag::gaussian));

    // distinct seeds and roots move every stream
    CHECK(derive_key(1, node, StreamTag::gaussian) != derive_key(2, node, StreamTag::gaussian));
    CHECK(derive_key(1, MultiIndexKey(0), StreamTag::uniform) !=
          derive_key(1, MultiIndexKey(1), StreamTag::uniform));
}

TEST_CASE("derive_key: pairwise distinct over a small multi-index enumeration") {
    std::vector<MultiIndexKey> keys;
    keys.emplace_back(0);
    std::size_t begin = 0;
    for (int len = 1; len <= 3; ++len) {
        const std::size_t end = keys.size();
        for (std::size_t i = begin; i < end; ++i)
            for (int level = 0; level <= 3; ++level)
                for (int copy = -3; copy <= 3; ++copy) {
                    if (copy == 0)
                        continue;
                    MultiIndexKey k = keys[i];
                    k.push(level, copy);
                    keys.push_back(std::move(k));
                }
        begin = end;
    }
    // lengths 0..3 over 24 (level, copy) choices per entry
    REQUIRE(keys.size() == 1 + 24 + 24 * 24 + 24 * 24 * 24);

    std::set<StreamKey> derived;
    for (const auto& k : keys) {
        derived.insert(derive_key(42, k, StreamTag::uniform));
        derived.insert(derive_key(42, k, StreamTag::gaussian));
    }
    CHECK(derived.size() == 2 * keys.size());
}

TEST_CASE("uniform stream: determinism, range and moments") {
    MultiIndexKey idx(7);
    idx.push(1, 2);
    const StreamKey key = derive_key(99, idx, StreamTag::uniform);

    StreamState a(key), b(key);
    for (int i = 0; i < 1000; ++i)
        CHECK(a.next_uniform() == b.next_uniform());

    StreamState s(key);
    const int n = 1'000'000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = s.next_uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sumsq += u * u;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 0.002);
    CHECK(std::abs(var - 1.0 / 12.0) < 0.001);
    CHECK(s.uniforms_drawn() == static_cast<std::uint64_t>(n));
}

TEST_CASE("gaussian stream: determinism and moments") {
    MultiIndexKey idx(3);
    idx.push(0, -4);
    const StreamKey key = derive_key(5, idx, StreamTag::gaussian);

    std::vector<double> va(3), vb(3);
    StreamState a(key), b(key);
    a.fill_gaussian(va);
    b.fill_gaussian(vb);
    CHECK(va == vb);

    StreamState s(key);
    const int n = 1'000'000;
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> block(100);
    for (int i = 0; i < n / 100; ++i) {
        s.fill_gaussian(block);
        for (double z : block) {
            sum += z;
            sumsq += z * z;
        }
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.003);
    CHECK(std::abs(var - 1.0) < 0.005);
    CHECK(s.gaussians_drawn() == static_cast<std::uint64_t>(n));
}

TEST_CASE("draw counters are exact over mixed call sequences") {
    StreamState s(derive_key(11, MultiIndexKey(0), StreamTag::gaussian));
    std::uint64_t expected_u = 0, expected_g = 0;
    std::vector<double> buf(64);
    for (int round = 0; round < 50; ++round) {
        const int d = 1 + (round * 7) % 64;
        s.fill_gaussian(std::span<double>(buf.data(), d));
        expected_g += d;
        for (int j = 0; j < round % 5; ++j) {
            s.next_uniform();
            ++expected_u;
        }
    }
    CHECK(s.uniforms_drawn() == expected_u);
    CHECK(s.gaussians_drawn() == expected_g);
}

TEST_CASE("sibling streams look uncorrelated") {
    MultiIndexKey a(0), b(0);
    a.push(1, 1);
    b.push(1, 2);
    StreamState sa(derive_key(2024, a, StreamTag::gaussian));
    StreamState sb(derive_key(2024, b, StreamTag::gaussian));

    const int n = 100'000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = sa.next_gaussian();
        const double y = sb.next_gaussian();
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    const double corr = cov / std::sqrt(vx * vy);
    CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("inverse normal CDF: quantiles and round-trip through erfc") {
    CHECK(inverse_normal_cdf(0.5) == 0.0);
    CHECK(inverse_normal_cdf(0.9) == doctest::Approx(1.2815515655446004).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.99) == doctest::Approx(2.3263478740408408).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.999) == doctest::Approx(3.090232306167813).epsilon(1e-12));

    // independent route: Phi(x) = erfc(-x / sqrt(2)) / 2
    const auto normal_cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    for (double p : {1e-12, 1e-9, 1e-6, 1e-3, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-6, 1.0 - 1e-10}) {
        const double x = inverse_normal_cdf(p);
        const double back = normal_cdf(x);
        CHECK(std::abs(back - p) <= 1e-12 * std::max(p, 1.0 - p) + 1e-16);
    }
    // symmetry
    for (double p : {0.001, 0.123, 0.25, 0.4999})
        CHECK(inverse_normal_cdf(p) == doctest::Approx(-inverse_normal_cdf(1.0 - p)).epsilon(1e-13));

    CHECK_THROWS_AS((void)inverse_normal_cdf(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)inverse_normal_cdf(1.0), std::invalid_argument);
}
