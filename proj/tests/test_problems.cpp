#include <doctest.h>

#include <cmath>
#include <vector>

#include "mlp/problems.hpp"

using namespace mlp;

namespace {

std::vector<double> eval_g(const SemilinearProblem& p, const std::vector<double>& x) {
    std::vector<double> out(p.k);
    p.g(x, out);
    return out;
}

std::vector<double> eval_f(const SemilinearProblem& p, const std::vector<double>& x,
                           const std::vector<double>& y) {
    std::vector<double> out(p.k);
    p.f(x, y, out);
    return out;
}

} // namespace

TEST_CASE("example names round-trip and reject unknowns") {
    for (auto ex : {BuiltinExample::allen_cahn, BuiltinExample::sine_gordon,
                    BuiltinExample::heat_system, BuiltinExample::semilinear_bs})
        CHECK(parse_example_name(example_name(ex)) == ex);
    CHECK(parse_example_name("allen_cahn") == BuiltinExample::allen_cahn);
    CHECK_THROWS_AS(parse_example_name("laplace"), std::invalid_argument);
}

TEST_CASE("allen-cahn: formulas at the benchmark point") {
    const auto p = builtin_problem(BuiltinExample::allen_cahn, 10);
    CHECK(p.k == 1);
    CHECK(p.T == 1.0);
    CHECK(eval_g(p, std::vector<double>(10, 0.0)) == std::vector<double>{0.5});
    CHECK(eval_f(p, std::vector<double>(10, 1.0), {0.0}) == std::vector<double>{0.0});
    CHECK(eval_f(p, std::vector<double>(10, 0.0), {2.0}) == std::vector<double>{2.0 - 8.0});
    CHECK(std::get<ScaledBrownian>(p.flow).scale == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("sine-gordon: formulas") {
    const auto p = builtin_problem(BuiltinExample::sine_gordon, 4);
    CHECK(eval_f(p, std::vector<double>(4, 0.0), {0.5}) == std::vector<double>{std::sin(0.5)});
    CHECK(eval_g(p, std::vector<double>(4, 0.0)) == std::vector<double>{0.5});
}

TEST_CASE("heat system: formulas") {
    const auto p = builtin_problem(BuiltinExample::heat_system, 10);
    CHECK(p.k == 2);
    CHECK(eval_f(p, std::vector<double>(10, 0.0), {0.0, 0.0}) == std::vector<double>{0.0, 0.0});
    const auto f = eval_f(p, std::vector<double>(10, 0.0), {3.0, 2.0});
    CHECK(f[0] == doctest::Approx(2.0 / 5.0).epsilon(1e-15));
    CHECK(f[1] == doctest::Approx(2.0).epsilon(1e-15));
    const auto g = eval_g(p, std::vector<double>(10, 0.0));
    CHECK(g[0] == 0.5);
    CHECK(g[1] == doctest::Approx(std::log(0.5)).epsilon(1e-15));
}

TEST_CASE("semilinear Black-Scholes: formulas at xi = (50,...,50)") {
    const auto p = builtin_problem(BuiltinExample::semilinear_bs, 10);
    CHECK(eval_f(p, std::vector<double>(10, 50.0), {1.0}) == std::vector<double>{0.5});
    const auto g = eval_g(p, std::vector<double>(10, 50.0));
    CHECK(g[0] == doctest::Approx(std::log(12500.5)).epsilon(1e-15));
    CHECK(g[0] == doctest::Approx(9.4335).epsilon(1e-4));
    CHECK(std::holds_alternative<UnitDriftGbm>(p.flow));
}

TEST_CASE("all built-in nonlinearities vanish at y = 0") {
    for (auto ex : {BuiltinExample::allen_cahn, BuiltinExample::sine_gordon,
                    BuiltinExample::heat_system, BuiltinExample::semilinear_bs}) {
        const auto p = builtin_problem(ex, 3);
        const auto out = eval_f(p, {0.3, -0.2, 4.0}, std::vector<double>(p.k, 0.0));
        CHECK(out == std::vector<double>(p.k, 0.0));
    }
}

TEST_CASE("default queries") {
    const auto ac = default_query(BuiltinExample::allen_cahn, 7);
    CHECK(ac.t == 0.0);
    CHECK(ac.x == std::vector<double>(7, 0.0));
    CHECK(ac.r == TruncationRadius::finite(4.0));

    const auto bs = default_query(BuiltinExample::semilinear_bs, 3);
    CHECK(bs.x == std::vector<double>{50.0, 50.0, 50.0});
    CHECK_FALSE(bs.r.is_finite());

    CHECK_FALSE(default_query(BuiltinExample::sine_gordon, 2).r.is_finite());
    CHECK_FALSE(default_query(BuiltinExample::heat_system, 2).r.is_finite());

    CHECK_THROWS_AS(default_query(BuiltinExample::allen_cahn, 0), std::invalid_argument);
    CHECK_THROWS_AS(builtin_problem(BuiltinExample::allen_cahn, -2), std::invalid_argument);
}

TEST_CASE("reference fixtures: complete grid and spot values") {
    const auto table = ReferenceTable::load(std::string(MLP_DATA_DIR) + "/reference_solutions.txt");
    CHECK(table.size() == 24);

    for (auto ex : {BuiltinExample::allen_cahn, BuiltinExample::sine_gordon,
                    BuiltinExample::heat_system, BuiltinExample::semilinear_bs})
        for (int d : {10, 100, 1000})
            for (auto prov : {Provenance::paper_ds, Provenance::paper_mlp}) {
                REQUIRE(table.has(ex, d, prov));
                const auto ref = table.lookup(ex, d, prov);
                CHECK(ref.value.size() == (ex == BuiltinExample::heat_system ? 2u : 1u));
                for (double v : ref.value)
                    CHECK(std::isfinite(v));
            }

    CHECK(table.lookup(BuiltinExample::allen_cahn, 10, Provenance::paper_mlp).value ==
          std::vector<double>{0.29555});
    CHECK(table.lookup(BuiltinExample::allen_cahn, 10, Provenance::paper_ds).value ==
          std::vector<double>{0.29614});
    CHECK(table.lookup(BuiltinExample::sine_gordon, 100, Provenance::paper_mlp).value ==
          std::vector<double>{0.03376});
    CHECK(table.lookup(BuiltinExample::heat_system, 10, Provenance::paper_mlp).value ==
          std::vector<double>{0.47621, 2.45726});
    CHECK(table.lookup(BuiltinExample::semilinear_bs, 1000, Provenance::paper_mlp).value ==
          std::vector<double>{17.07766});

    CHECK_FALSE(table.has(BuiltinExample::allen_cahn, 7, Provenance::paper_mlp));
    CHECK_THROWS_AS((void)table.lookup(BuiltinExample::allen_cahn, 7, Provenance::paper_mlp),
                    std::runtime_error);
}

TEST_CASE("provenance names") {
    CHECK(parse_provenance("paper-ds") == Provenance::paper_ds);
    CHECK(parse_provenance("ds") == Provenance::paper_ds);
    CHECK(parse_provenance("mlp") == Provenance::paper_mlp);
    CHECK(parse_provenance(provenance_name(Provenance::self_computed)) ==
          Provenance::self_computed);
    CHECK_THROWS_AS(parse_provenance("oracle"), std::invalid_argument);
}
