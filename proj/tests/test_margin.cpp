#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "marginforge/boost.hpp"
#include "marginforge/margin.hpp"

using namespace marginforge;

namespace {

MarginProfile p(std::vector<double> v) { return MarginProfile(std::move(v)); }

}  // namespace

TEST_SUITE("margin") {

TEST_CASE("a unanimous committee has every margin equal to 1") {
    const auto d = mf_test::signed_data({{-2, -1, 1, 2}}, {1, 1, -1, -1});
    VotingClassifier f;
    f.members = {{Stump::at_most(0, 0.0, 1), 0.25}, {Stump::at_most(0, 0.0, 1), 0.75}};
    f.normalized = true;
    const auto prof = profile(f, d);
    for (double v : prof.margins()) CHECK(v == 1.0);
}

TEST_CASE("0.7 right and 0.3 wrong gives margin 0.4") {
    const auto d = mf_test::signed_data({{1}}, {1});
    VotingClassifier f;
    f.members = {{Stump::constant(1), 0.7}, {Stump::constant(-1), 0.3}};
    f.normalized = true;
    CHECK(profile(f, d).min() == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("profile equals an independent per-instance sum over raw predictions") {
    auto rng = make_rng(13, 0);
    const auto d = mf_test::random_binary(13, 20, 2, 1);
    const auto& stumps = enumerate_hypotheses(d).stumps();
    VotingClassifier f;
    double total = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double a = uniform01(rng);
        total += a;
        f.members.push_back({stumps[uniform_index(rng, stumps.size())], a});
    }
    for (auto& m : f.members) m.alpha /= total;
    f.normalized = true;

    std::vector<double> expected;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto x = d.base().row(i);
        double right = 0.0, wrong = 0.0;
        for (const auto& m : f.members) (predict(m.stump, x) == d.y(i) ? right : wrong) += m.alpha;
        expected.push_back(right - wrong);
        // 1 - 2 * (weighted fraction misclassifying)
        CHECK(right - wrong == doctest::Approx(1.0 - 2.0 * wrong).epsilon(1e-12));
    }
    std::sort(expected.begin(), expected.end());
    const auto got = profile(f, d);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) CHECK(got.margins()[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("profile requires a normalized classifier and valid margins") {
    const auto d = mf_test::signed_data({{1}}, {1});
    VotingClassifier f;
    f.members = {{Stump::constant(1), 2.0}};
    CHECK_THROWS_AS(profile(f, d), std::invalid_argument);
    CHECK_THROWS_AS(p({0.5, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(p({}), std::invalid_argument);
}

TEST_CASE("kth_margin") {
    const auto q = p({0.3, -0.2, 0.1});
    CHECK(kth_margin(q, 1) == -0.2);
    CHECK(kth_margin(q, 2) == 0.1);
    CHECK(kth_margin(q, 3) == q.max());
    CHECK_THROWS_AS(kth_margin(q, 0), std::out_of_range);
    CHECK_THROWS_AS(kth_margin(q, 4), std::out_of_range);
}

TEST_CASE("cdf, strict and non-strict") {
    const auto q = p({0.1, 0.2, 0.3, 0.4});
    CHECK(cdf(q, 1.0, Inclusion::at_most) == 1.0);
    CHECK(cdf(q, 0.2, Inclusion::at_most) == 0.5);
    CHECK(cdf(q, 0.2, Inclusion::strictly_below) == 0.25);
    CHECK(cdf(q, 0.05, Inclusion::at_most) == 0.0);
    CHECK(cdf(q, 0.05, Inclusion::strictly_below) == 0.0);
}

TEST_CASE("cdf is monotone and strict <= non-strict") {
    auto rng = make_rng(2, 0);
    const auto q = mf_test::random_profile(rng, 50);
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double t = -1.0 + i / 200.0;
        const double a = cdf(q, t, Inclusion::at_most);
        CHECK(a >= prev);
        CHECK(cdf(q, t, Inclusion::strictly_below) <= a);
        prev = a;
    }
    for (std::size_t k = 1; k < q.size(); ++k) CHECK(kth_margin(q, k) <= kth_margin(q, k + 1));
}

TEST_CASE("moments") {
    const auto c = moments(p({0.3, 0.3, 0.3}));
    CHECK(c.mean == doctest::Approx(0.3));
    CHECK(c.variance == doctest::Approx(0.0));
    const auto s = moments(p({-1, 1}));
    CHECK(s.mean == 0.0);
    CHECK(s.variance == 1.0);
    const auto r = moments(p({0.1, 0.2, 0.3, 0.4}));
    CHECK(r.mean == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.variance == doctest::Approx(0.0125).epsilon(1e-13));
}

TEST_CASE("i_hat") {
    CHECK(i_hat(p({0.5, 0.6}), 0.4) == 0.0);
    CHECK(i_hat(p({0.2, 0.4, 0.6, 0.8}), 0.45) == doctest::Approx(0.375));
    CHECK(i_hat(p({0.01, 0.02}), 0.6) == 0.0);
    auto rng = make_rng(4, 0);
    const auto q = mf_test::random_profile(rng, 40);
    for (int i = 1; i <= 100; ++i) {
        const double t = i / 100.0;
        const double a = cdf(q, t, Inclusion::strictly_below);
        const double b = tail_at_least(q, 2.0 * t / 3.0);
        CHECK(i_hat(q, t) == a * b);
        CHECK(i_hat(q, t) <= std::min(a, b));
    }
}

TEST_CASE("emargin_theta") {
    const auto q = p({0.1, 0.2, 0.3, 0.4});
    CHECK(emargin_theta(q, 0.5, 1e12).value() == 0.3);
    CHECK(emargin_theta(q, 1.0, 1e12).value() == 1.0);
    CHECK(emargin_theta(q, std::size_t{4}, 1e12).value() == 1.0);
    // sqrt(8/200) = 0.2: the first order statistic 0.1 is inadmissible.
    CHECK_FALSE(emargin_theta(q, 0.0, 200.0).has_value());
    CHECK(emargin_theta(q, 0.5, 200.0).value() == 0.3);
    CHECK_THROWS_AS(emargin_theta(q, 0.3, 1e12), std::invalid_argument);
}

TEST_CASE("emargin_theta is the supremum of the admissible set (brute force over a fine grid)") {
    auto rng = make_rng(6, 0);
    for (int rep = 0; rep < 20; ++rep) {
        // Margins on a 0.01 grid so a 0.001 scan sees every jump.
        std::vector<double> v;
        for (int i = 0; i < 12; ++i) v.push_back(static_cast<double>(static_cast<int>(uniform_index(rng, 201)) - 100) / 100.0);
        const auto q = p(v);
        const double h = 50.0;  // sqrt(8/50) = 0.4
        for (std::size_t j = 0; j <= q.size(); ++j) {
            const double frac = static_cast<double>(j) / static_cast<double>(q.size());
            double sup = -1.0;
            for (int g = 0; g <= 1000; ++g) {
                const double t = g / 1000.0;
                if (t > std::sqrt(8.0 / h) && cdf(q, t, Inclusion::at_most) <= frac) sup = t;
            }
            const auto got = emargin_theta(q, j, h);
            if (sup < 0.0) {
                // No grid point admissible: either none, or the supremum sits in a gap below the next grid point.
                if (got) CHECK(*got - std::sqrt(8.0 / h) <= 1e-3);
            } else {
                REQUIRE(got.has_value());
                CHECK(std::abs(*got - sup) <= 1e-3 + 1e-12);
                CHECK(*got >= sup);
            }
        }
    }
}

TEST_CASE("CDF export has a header and covers the grid") {
    std::ostringstream s;
    write_cdf_csv(s, p({-0.5, 0.25, 0.25, 0.75}));
    const auto text = s.str();
    CHECK(text.rfind("theta,cdf\n", 0) == 0);
    CHECK(text.find("\n-1,0\n") != std::string::npos);
    CHECK(text.find("\n0.25,0.75\n") != std::string::npos);
    CHECK(text.find("\n1,1\n") != std::string::npos);
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    CHECK(lines == 1 + 1000 + 3);
}

}  // TEST_SUITE
