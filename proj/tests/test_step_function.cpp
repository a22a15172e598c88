#include <doctest.h>

#include "survtree/errors.hpp"
#include "survtree/step_function.hpp"

#include "test_util.hpp"

using namespace survtree;

TEST_CASE("step function evaluation is right-continuous with a left limit") {
    StepFunction f({1.0, 2.0, 4.0}, {0.8, 0.5, 0.1}, 1.0);
    CHECK(f(0.0) == 1.0);
    CHECK(f(0.999) == 1.0);
    CHECK(f(1.0) == 0.8);       // jump happens at the breakpoint
    CHECK(f(1.5) == 0.8);
    CHECK(f(2.0) == 0.5);
    CHECK(f(10.0) == 0.1);
    CHECK(f.left_limit(1.0) == 1.0);
    CHECK(f.left_limit(2.0) == 0.8);
    CHECK(f.left_limit(2.5) == 0.5);
    CHECK(f.left_limit(0.0) == 1.0);
}

TEST_CASE("step function rejects malformed inputs") {
    CHECK_THROWS_AS(StepFunction({2.0, 1.0}, {0.5, 0.2}), StructureError);
    CHECK_THROWS_AS(StepFunction({1.0}, {0.5, 0.2}), StructureError);
}

TEST_CASE("km estimator: all censored gives the constant function 1") {
    StepFunction s = km_estimator({1.0, 2.0, 3.0}, {0, 0, 0});
    CHECK(s.size() == 0);
    CHECK(s(0.5) == 1.0);
    CHECK(s(100.0) == 1.0);
}

TEST_CASE("km estimator: hand-computed product limits") {
    SUBCASE("times (1,2,3), events (1,1,0)") {
        StepFunction s = km_estimator({1, 2, 3}, {1, 1, 0});
        CHECK(s(0.5) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(s(2.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(s(3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("times (1,2,3,4), events (1,0,1,1)") {
        StepFunction s = km_estimator({1, 2, 3, 4}, {1, 0, 1, 1});
        CHECK(s(0.9) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s(1.0) == doctest::Approx(3.0 / 4.0).epsilon(1e-12));
        CHECK(s(2.5) == doctest::Approx(3.0 / 4.0).epsilon(1e-12));
        CHECK(s(3.0) == doctest::Approx(3.0 / 8.0).epsilon(1e-12));
        CHECK(s(4.0) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("km estimator rejects empty input") {
    CHECK_THROWS_AS(km_estimator({}, {}), ConfigError);
}

TEST_CASE("km estimator: nonincreasing, starts at 1, stays within [0,1]") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto ds = testutil::random_fixture(seed, 25, 3, 0.4);
        StepFunction s = km_estimator(ds.times(), ds.events());
        CHECK(s.initial_value() == 1.0);
        double prev = 1.0;
        for (double v : s.values()) {
            CHECK(v <= prev + 1e-15);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
        // matches the direct product-limit formula everywhere
        testutil::KmOracle oracle{ds.times(), ds.events()};
        for (double t : ds.grid().breakpoints) {
            CHECK(s(t) == doctest::Approx(oracle(t)).epsilon(1e-12));
            CHECK(s.left_limit(t) == doctest::Approx(oracle.left_limit(t)).epsilon(1e-12));
        }
    }
}
