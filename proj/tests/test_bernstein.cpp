#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "doctest.h"
#include "support.hpp"
#include "marginforge/bernstein.hpp"
#include "marginforge/boost.hpp"

using namespace marginforge;

namespace {

double average_margin(const VotingClassifier& f, const BinaryDataset& d) {
    const auto v = instance_margins(f, d);
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

VotingClassifier trained(std::uint64_t seed, std::size_t rounds = 20) {
    BoostConfig c;
    c.rounds = rounds;
    return run(mf_test::random_binary(seed, 80, 3, 1), c).classifier;
}

}  // namespace

TEST_SUITE("bernstein") {

TEST_CASE("v_hat examples") {
    CHECK(v_hat(std::vector<double>{0.4, 0.4, 0.4}) == 0.0);
    CHECK(v_hat(std::vector<double>{0.0, 1.0}) == 0.5);
    CHECK(v_hat(std::vector<double>{0.0, 0.0, 1.0, 1.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(v_hat(std::vector<double>{0.0, 1.0}, VarianceForm::printed_half) == 0.25);
    CHECK_THROWS_AS(v_hat(std::vector<double>{0.5}), std::invalid_argument);
}

TEST_CASE("v_hat equals the pairwise definition and the unbiased sample variance") {
    auto rng = make_rng(1, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 2 + uniform_index(rng, 40);
        std::vector<double> z(m);
        for (double& x : z) x = uniform01(rng);
        double pairs = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) pairs += (z[i] - z[j]) * (z[i] - z[j]);
        const double md = static_cast<double>(m);
        const double mean = std::accumulate(z.begin(), z.end(), 0.0) / md;
        double ss = 0.0;
        for (double x : z) ss += (x - mean) * (x - mean);
        const double v = v_hat(z);
        CHECK(v == doctest::Approx(pairs / (2.0 * md * (md - 1.0))).epsilon(1e-12));
        CHECK(std::abs(v - ss / (md - 1.0)) <= 1e-12);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v_hat(z, VarianceForm::printed_half) == doctest::Approx(v / 2.0).epsilon(1e-15));
    }
}

TEST_CASE("sample_stats") {
    const auto s = sample_stats({0.0, 0.0, 1.0, 1.0});
    CHECK(s.m == 4);
    CHECK(s.mean == 0.5);
    CHECK(s.v_hat == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("empirical Bernstein radius examples") {
    const auto c = empirical_bernstein(std::vector<double>{0.3, 0.3, 0.3, 0.3}, 0.05);
    CHECK(c.upper == doctest::Approx(2.15186).epsilon(1e-5));
    CHECK(c.upper == doctest::Approx(7.0 * std::log(40.0) / 12.0).epsilon(1e-15));
    CHECK(c.lower == c.upper);
    const auto h = empirical_bernstein(std::vector<double>{0.0, 0.0, 1.0, 1.0}, 0.1);
    CHECK(h.upper == doctest::Approx(std::sqrt(2.0 / 3.0 * std::log(20.0) / 4.0) + 7.0 * std::log(20.0) / 12.0).epsilon(1e-14));
}

TEST_CASE("radius is monotone in delta and in the variance") {
    double prev = std::numeric_limits<double>::infinity();
    for (double delta = 0.01; delta < 1.0; delta += 0.01) {
        const double r = bernstein_radius(0.2, 50, delta);
        CHECK(r <= prev);
        prev = r;
    }
    CHECK(bernstein_radius(0.5, 50, 0.05) >= bernstein_radius(0.2, 50, 0.05));
}

TEST_CASE("empirical Bernstein preconditions") {
    CHECK_THROWS_AS(empirical_bernstein(std::vector<double>{0.1, 0.2, 0.3}, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(empirical_bernstein(std::vector<double>{0.1, 0.2, 0.3, 0.4}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(empirical_bernstein(std::vector<double>{0.1, 0.2, 0.3, 0.4}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(empirical_bernstein(std::vector<double>{0.1, 0.2, 0.3, 1.4}, 0.1), std::invalid_argument);
}

TEST_CASE("distribution tags") {
    CHECK(Distribution::parse("uniform").variance() == doctest::Approx(1.0 / 12.0));
    const auto b = Distribution::parse("bernoulli(0.1)");
    CHECK(b.mean() == doctest::Approx(0.1));
    CHECK(b.variance() == doctest::Approx(0.09));
    const auto t = Distribution::parse("two_point(0.2, 0.8, 0.25)");
    CHECK(t.mean() == doctest::Approx(0.25 * 0.2 + 0.75 * 0.8));
    CHECK(t.variance() == doctest::Approx(0.25 * 0.75 * 0.36));
    CHECK(Distribution::parse("point_mass(0.3)").variance() == 0.0);
    CHECK_THROWS_AS(Distribution::parse("gaussian"), std::invalid_argument);
    CHECK_THROWS_AS(Distribution::parse("bernoulli(1.5)"), std::invalid_argument);
    CHECK_THROWS_AS(Distribution::parse("bernoulli(x)"), std::invalid_argument);
}

TEST_CASE("sampled means match the analytic moments") {
    for (const auto& d : {Distribution::uniform(), Distribution::bernoulli(0.3), Distribution::two_point(0.1, 0.9, 0.6)}) {
        auto rng = make_rng(5, 0);
        const int n = 200000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = d.sample(rng);
            CHECK((x >= 0.0 && x <= 1.0));
            s += x;
            s2 += x * x;
        }
        const double mean = s / n;
        CHECK(std::abs(mean - d.mean()) <= 4.0 * std::sqrt(d.variance() / n));
        CHECK(s2 / n - mean * mean == doctest::Approx(d.variance()).epsilon(0.02));
    }
}

TEST_CASE("coverage result bookkeeping") {
    const auto r = CoverageResult::from_counts(20000, 1050, 0.05);
    CHECK(r.empirical_rate == 0.0525);
    CHECK(r.mc_stderr == doctest::Approx(std::sqrt(0.0525 * 0.9475 / 20000)));
    CHECK(r.pass());  // 0.0525 <= 0.05 + 3 * 0.00158
    CHECK_FALSE(CoverageResult::from_counts(20000, 1300, 0.05).pass());
}

TEST_CASE("coverage: point mass never violates") {
    CoverageSettings s;
    s.m = 10;
    s.trials = 1000;
    const auto r = coverage_test(Distribution::point_mass(0.4), s);
    CHECK(r.upper.violations == 0);
    CHECK(r.lower.violations == 0);
}

TEST_CASE("coverage: bernoulli(0.1), m = 100, delta = 0.05, 20000 trials") {
    CoverageSettings s;
    s.m = 100;
    s.delta = 0.05;
    s.trials = 20000;
    s.seed = 11;
    const auto r = coverage_test(Distribution::bernoulli(0.1), s);
    CHECK(r.upper.trials == 20000);
    CHECK(r.upper.pass());
    CHECK(r.lower.pass());
}

TEST_CASE("coverage: uniform, m = 10, delta = 0.5") {
    CoverageSettings s;
    s.m = 10;
    s.delta = 0.5;
    s.trials = 20000;
    s.seed = 12;
    CHECK(coverage_test(Distribution::uniform(), s).pass());
}

TEST_CASE("coverage is deterministic and independent of the thread count") {
    CoverageSettings s;
    s.m = 20;
    s.trials = 3000;
    s.seed = 3;
    s.jobs = 1;
    const auto a = coverage_test(Distribution::bernoulli(0.3), s);
    s.jobs = 4;
    const auto b = coverage_test(Distribution::bernoulli(0.3), s);
    CHECK(a.upper.violations == b.upper.violations);
    CHECK(a.lower.violations == b.lower.violations);
}

TEST_CASE("coverage: trial floor and m floor") {
    CoverageSettings s;
    s.trials = 999;
    CHECK_THROWS_AS(coverage_test(Distribution::uniform(), s), std::invalid_argument);
    s.trials = 1000;
    s.m = 3;
    CHECK_THROWS_AS(coverage_test(Distribution::uniform(), s), std::invalid_argument);
}

TEST_CASE("variance concentration: point mass gives zero rates") {
    CoverageSettings s;
    s.m = 10;
    s.trials = 1000;
    const auto r = variance_concentration_test(Distribution::point_mass(0.7), s);
    CHECK(r.lower.violations == 0);
    CHECK(r.upper.violations == 0);
    CHECK(r.true_variance == 0.0);
}

TEST_CASE("variance concentration: bernoulli(0.5), m = 50, delta = 0.05") {
    CoverageSettings s;
    s.m = 50;
    s.delta = 0.05;
    s.trials = 20000;
    s.seed = 21;
    const auto r = variance_concentration_test(Distribution::bernoulli(0.5), s);
    CHECK(r.true_variance == 0.25);
    CHECK(r.lower.pass());
    CHECK(r.upper.pass());
}

TEST_CASE("variance concentration: uniform, m = 4, delta = 0.2") {
    CoverageSettings s;
    s.m = 4;
    s.delta = 0.2;
    s.trials = 20000;
    s.seed = 22;
    const auto r = variance_concentration_test(Distribution::uniform(), s);
    CHECK(r.lower.pass());
    CHECK(r.upper.pass());
}

TEST_CASE("v_hat is unbiased over 1e5 trials; the printed half-form is not") {
    CoverageSettings s;
    s.m = 5;
    s.trials = 100000;
    s.seed = 23;
    const auto r = variance_concentration_test(Distribution::bernoulli(0.3), s);
    CHECK(r.unbiased());
    CHECK(std::abs(r.v_hat_mean - 0.21) <= 3.0 * r.v_hat_stderr);
    s.form = VarianceForm::printed_half;
    const auto h = variance_concentration_test(Distribution::bernoulli(0.3), s);
    CHECK_FALSE(h.unbiased());
    CHECK(h.v_hat_mean == doctest::Approx(0.105).epsilon(0.02));
}

TEST_CASE("committee of a single-member classifier is that classifier") {
    VotingClassifier f;
    f.members = {{Stump::at_most(0, 0.5, 1), 1.0}};
    f.normalized = true;
    for (std::size_t n : {1, 7, 64}) {
        const auto g = sample_committee(f, n, 9);
        CHECK(g.members.size() == n);
        for (const auto& m : g.members) {
            CHECK(m.stump == f.members[0].stump);
            CHECK(m.alpha == doctest::Approx(1.0 / static_cast<double>(n)));
        }
    }
}

TEST_CASE("committee member frequencies match the voting weights") {
    VotingClassifier f;
    f.members = {{Stump::constant(1), 0.5}, {Stump::at_most(0, 0.0, 1), 0.3}, {Stump::at_most(0, 1.0, -1), 0.2}};
    f.normalized = true;
    const std::size_t n = 10000;
    const auto g = sample_committee(f, n, 17);
    std::map<std::size_t, std::size_t> counts;
    for (const auto& m : g.members)
        for (std::size_t j = 0; j < f.members.size(); ++j)
            if (m.stump == f.members[j].stump) ++counts[j];
    for (std::size_t j = 0; j < f.members.size(); ++j) {
        const double a = f.members[j].alpha;
        const double freq = static_cast<double>(counts[j]) / static_cast<double>(n);
        CHECK(std::abs(freq - a) <= 3.0 * std::sqrt(a * (1.0 - a) / static_cast<double>(n)));
    }
    const auto again = sample_committee(f, n, 17);
    for (std::size_t k = 0; k < n; ++k) CHECK(again.members[k].stump == g.members[k].stump);
}

TEST_CASE("large committees approach the voting classifier's average margin") {
    const auto d = mf_test::random_binary(4, 80, 3, 1);
    BoostConfig c;
    c.rounds = 20;
    const auto f = run(d, c).classifier;
    const double ef = average_margin(f, d);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto g = sample_committee(f, 10000, seed);
        CHECK(std::abs(average_margin(g, d) - ef) <= 4.0 / std::sqrt(10000.0));
    }
}

TEST_CASE("committee tail: t > 2 is impossible; identical members never deviate") {
    const auto d = mf_test::random_binary(4, 80, 3, 1);
    const auto f = trained(4);
    CHECK(committee_tail_test(f, d, 16, 2.5, 2000, 1).result.violations == 0);
    VotingClassifier same;
    same.members = {{Stump::at_most(0, 1.0, 1), 0.4}, {Stump::at_most(0, 1.0, 1), 0.6}};
    same.normalized = true;
    CHECK(committee_tail_test(same, d, 16, 0.01, 2000, 1).result.violations == 0);
}

TEST_CASE("committee tail bound closed form") {
    CHECK(committee_tail_bound(64, 0.25, 0.0) == doctest::Approx(std::exp(-4.0 / (2.0 + 1.0 / 3.0))));
    CHECK(committee_tail_bound(64, 0.25, 0.5) < committee_tail_bound(64, 0.25, 0.0));
}

TEST_CASE("committee tail on a boosted classifier is reproducible and thread-count independent") {
    const auto d = mf_test::random_binary(4, 80, 3, 1);
    const auto f = trained(4);
    const auto a = committee_tail_test(f, d, 16, 0.25, 5000, 3, 1);
    const auto b = committee_tail_test(f, d, 16, 0.25, 5000, 3, 3);
    CHECK(a.result.violations == b.result.violations);
    CHECK(a.bound == doctest::Approx(committee_tail_bound(16, 0.25, average_margin(f, d))));
    CHECK_THROWS_AS(committee_tail_test(f, d, 16, 0.0, 5000, 3), std::invalid_argument);
    CHECK_THROWS_AS(committee_tail_test(f, d, 16, 0.25, 10, 3), std::invalid_argument);
}

}  // TEST_SUITE
