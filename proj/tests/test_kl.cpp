#include <cmath>
#include <limits>

#include "doctest.h"
#include "support.hpp"
#include "marginforge/bounds.hpp"

using namespace marginforge;

TEST_SUITE("kl") {

TEST_CASE("kl examples") {
    CHECK(kl(0.5, 0.5) == 0.0);
    CHECK(kl(0.25, 0.75) == doctest::Approx(0.549306).epsilon(1e-6));
    CHECK(kl(0.25, 0.75) == doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-14));
    for (double p : {0.01, 0.3, 0.9, 0.999}) CHECK(kl(0.0, p) == doctest::Approx(-std::log(1.0 - p)).epsilon(1e-14));
    CHECK(kl(1.0, 0.25) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
}

TEST_CASE("kl boundary conventions") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(kl(0.0, 0.0) == 0.0);
    CHECK(kl(1.0, 1.0) == 0.0);
    CHECK(kl(0.3, 0.0) == inf);
    CHECK(kl(0.3, 1.0) == inf);
    CHECK(kl(0.0, 1.0) == inf);
    CHECK_THROWS_AS(kl(-0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(kl(0.5, 1.5), std::invalid_argument);
}

TEST_CASE("kl is non-negative, zero only on the diagonal, and above the Pinsker bound") {
    auto rng = make_rng(1, 0);
    for (int i = 0; i < 5000; ++i) {
        const double q = uniform01(rng);
        const double p = uniform01(rng);
        const double d = kl(q, p);
        CHECK(d >= 0.0);
        CHECK(d >= 2.0 * (q - p) * (q - p) - 1e-15);
        if (q != p) CHECK(d > 0.0);
    }
}

TEST_CASE("kl_inverse examples") {
    CHECK(kl_inverse(0.37, 0.0).value == 0.37);
    CHECK_FALSE(kl_inverse(0.37, 0.0).saturated);
    CHECK(kl_inverse(0.0, std::log(2.0)).value == doctest::Approx(0.5).epsilon(1e-12));
    const auto w = kl_inverse(0.1, 0.05);
    CHECK(std::abs(kl(0.1, w.value) - 0.05) <= 1e-10);
    CHECK(w.value > 0.1);
}

TEST_CASE("kl_inverse matches the closed form at q = 0") {
    for (double u : {1e-6, 1e-3, 0.1, 1.0, 5.0, 20.0}) {
        const auto w = kl_inverse(0.0, u);
        CHECK_FALSE(w.saturated);
        CHECK(w.value == doctest::Approx(-std::expm1(-u)).epsilon(1e-12));
    }
}

TEST_CASE("kl_inverse is self-consistent and monotone in the budget") {
    auto rng = make_rng(2, 0);
    for (int i = 0; i < 2000; ++i) {
        const double q = uniform01(rng) * 0.99;
        const double u1 = 3.0 * uniform01(rng);
        const double u2 = u1 + uniform01(rng);
        const auto a = kl_inverse(q, u1);
        const auto b = kl_inverse(q, u2);
        CHECK(a.value >= q);
        CHECK(b.value >= a.value);
        if (!a.saturated) {
            CHECK(kl(q, a.value) >= u1 - 1e-10);
            // Smallest such w: a hair to the left falls short.
            const double left = a.value - 1e-9;
            if (left > q) CHECK(kl(q, left) < u1);
        }
    }
}

TEST_CASE("kl_inverse saturates when even 1 - 1e-15 cannot spend the budget") {
    const auto w = kl_inverse(0.5, 100.0);
    CHECK(w.saturated);
    CHECK(w.value == 1.0);
    CHECK(kl_inverse(1.0, 0.3).value == 1.0);
}

TEST_CASE("kl_inverse rejects invalid arguments") {
    CHECK_THROWS_AS(kl_inverse(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(kl_inverse(1.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(kl_inverse(0.5, -1.0), std::invalid_argument);
}

}  // TEST_SUITE
