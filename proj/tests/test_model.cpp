#include <doctest.h>

#include <cmath>
#include <random>

#include "mlp/model.hpp"

using namespace mlp;

TEST_CASE("truncate: spec values") {
    CHECK(truncate(TruncationRadius::infinite(), {-7.3, 2.1}) == std::vector<double>{-7.3, 2.1});
    CHECK(truncate(TruncationRadius::finite(4.0), {5.2}) == std::vector<double>{4.0});
    CHECK(truncate(TruncationRadius::finite(2.0), {-3.0, 0.5}) == std::vector<double>{-2.0, 0.5});
    CHECK(truncate(TruncationRadius::finite(0.0), {1.0, -1.0}) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("truncate: idempotent, bounded, fixes interior points") {
    std::mt19937_64 gen(123);
    std::uniform_real_distribution<double> val(-10.0, 10.0);
    const TruncationRadius radii[] = {TruncationRadius::finite(0.0), TruncationRadius::finite(0.5),
                                      TruncationRadius::finite(2.0), TruncationRadius::infinite()};
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = 1 + trial % 3;
        std::vector<double> y(k);
        for (double& v : y)
            v = val(gen);
        for (const auto& r : radii) {
            const auto once = truncate(r, y);
            CHECK(truncate(r, once) == once);
            if (r.is_finite())
                for (double v : once)
                    CHECK(std::abs(v) <= r.radius());
            bool interior = r.is_finite();
            for (double v : y)
                interior = interior && std::abs(v) <= r.radius();
            if (interior || !r.is_finite())
                CHECK(once == y);
        }
    }
}

TEST_CASE("truncate counts clipped components") {
    std::vector<double> y{5.0, -5.0, 0.25};
    CHECK(truncate_in_place(TruncationRadius::finite(1.0), y) == 2);
    CHECK(y == std::vector<double>{1.0, -1.0, 0.25});
    CHECK(truncate_in_place(TruncationRadius::finite(1.0), y) == 0);
    CHECK(truncate_in_place(TruncationRadius::infinite(), y) == 0);
}

TEST_CASE("TruncationRadius validation") {
    CHECK_THROWS_AS(TruncationRadius::finite(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(TruncationRadius::finite(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
    CHECK(TruncationRadius::finite(0.0).is_finite());
    CHECK_FALSE(TruncationRadius::infinite().is_finite());
}

TEST_CASE("sample_time: spec values") {
    CHECK(sample_time(1.0, 1.0, 0.73) == 1.0);
    CHECK(sample_time(0.0, 1.0, 0.0) == 0.0);
    CHECK(sample_time(0.5, 1.0, 0.5) == 0.75);
}

TEST_CASE("sample_time: stays in [t, T] and is monotone in u") {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double T = 0.25 + 4.0 * unit(gen);
        const double t = T * unit(gen);
        const double u1 = unit(gen);
        const double u2 = unit(gen);
        const double s1 = sample_time(t, T, std::min(u1, u2));
        const double s2 = sample_time(t, T, std::max(u1, u2));
        CHECK(s1 >= t);
        CHECK(s2 <= T);
        CHECK(s1 <= s2);
    }
    CHECK_THROWS_AS(sample_time(-0.1, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(sample_time(2.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(sample_time(0.0, 1.0, 1.5), std::invalid_argument);
}
