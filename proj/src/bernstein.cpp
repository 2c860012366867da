#include "marginforge/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "marginforge/margin.hpp"
#include "marginforge/parallel.hpp"

namespace marginforge {

namespace {

// Trials are grouped into fixed blocks so per-block partial sums, and thus
// floating-point totals, do not depend on the worker count.
constexpr std::size_t kBlock = 512;

std::size_t block_count(std::size_t trials) { return (trials + kBlock - 1) / kBlock; }

void check_settings(const CoverageSettings& s) {
    if (s.m < 4) throw std::invalid_argument("coverage tests need m >= 4");
    if (!(s.delta > 0.0 && s.delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (s.trials < kMinTrials)
        throw std::invalid_argument("trials = " + std::to_string(s.trials) + " is below the floor of " +
                                    std::to_string(kMinTrials));
}

void draw(const Distribution& dist, Rng& rng, std::vector<double>& out) {
    for (double& v : out) v = dist.sample(rng);
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double v_hat(std::span<const double> values, VarianceForm form) {
    const std::size_t m = values.size();
    if (m < 2) throw std::invalid_argument("v_hat needs at least two values");
    // Shifting by the first value keeps constant samples exactly at zero.
    const double shift = values[0];
    double mean = 0.0;
    for (double x : values) mean += x - shift;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double x : values) ss += (x - shift - mean) * (x - shift - mean);
    // sum_{i != j} (x_i - x_j)^2 = 2m * sum (x_i - mean)^2
    const double v = ss / static_cast<double>(m - 1);
    return form == VarianceForm::unbiased ? v : v / 2.0;
}

SampleStats sample_stats(std::vector<double> values) {
    SampleStats s;
    s.m = values.size();
    s.mean = s.m ? mean_of(values) : 0.0;
    s.v_hat = s.m >= 2 ? v_hat(values) : 0.0;
    s.values = std::move(values);
    return s;
}

double bernstein_radius(double variance, std::size_t m, double delta) {
    const double n = static_cast<double>(m);
    const double l = std::log(2.0 / delta);
    return std::sqrt(2.0 * variance * l / n) + 7.0 * l / (3.0 * n);
}

Deviation empirical_bernstein(std::span<const double> values, double delta, VarianceForm form) {
    if (values.size() < 4) throw std::invalid_argument("empirical Bernstein bound needs m >= 4");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("values must lie in [0, 1]");
    const double r = bernstein_radius(v_hat(values, form), values.size(), delta);
    return {r, r};
}

// --- distributions ----------------------------------------------------------

Distribution Distribution::parse(const std::string& tag) {
    static const std::regex bern(R"(bernoulli\(\s*([^,\s)]+)\s*\))");
    static const std::regex two(R"(two_point\(\s*([^,\s]+)\s*,\s*([^,\s]+)\s*,\s*([^,\s)]+)\s*\))");
    static const std::regex point(R"(point_mass\(\s*([^,\s)]+)\s*\))");
    auto num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size()) throw std::invalid_argument("bad number '" + s + "' in distribution '" + tag + "'");
        return v;
    };
    auto unit = [&](double v) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("distribution '" + tag + "' leaves [0, 1]");
        return v;
    };
    std::smatch mt;
    if (tag == "uniform") return uniform();
    if (std::regex_match(tag, mt, bern)) return bernoulli(unit(num(mt[1])));
    if (std::regex_match(tag, mt, two)) return two_point(unit(num(mt[1])), unit(num(mt[2])), unit(num(mt[3])));
    if (std::regex_match(tag, mt, point)) return point_mass(unit(num(mt[1])));
    throw std::invalid_argument("unknown distribution tag '" + tag + "'");
}

std::string Distribution::name() const {
    std::ostringstream s;
    switch (kind) {
        case Kind::bernoulli: s << "bernoulli(" << p << ')'; break;
        case Kind::uniform: s << "uniform"; break;
        case Kind::two_point: s << "two_point(" << a << ',' << b << ',' << p << ')'; break;
        case Kind::point_mass: s << "point_mass(" << a << ')'; break;
    }
    return s.str();
}

double Distribution::mean() const {
    switch (kind) {
        case Kind::bernoulli: return p;
        case Kind::uniform: return 0.5;
        case Kind::two_point: return p * a + (1.0 - p) * b;
        case Kind::point_mass: return a;
    }
    return 0.0;
}

double Distribution::variance() const {
    switch (kind) {
        case Kind::bernoulli: return p * (1.0 - p);
        case Kind::uniform: return 1.0 / 12.0;
        case Kind::two_point: return p * (1.0 - p) * (a - b) * (a - b);
        case Kind::point_mass: return 0.0;
    }
    return 0.0;
}

double Distribution::sample(Rng& rng) const {
    switch (kind) {
        case Kind::bernoulli: return uniform01(rng) < p ? 1.0 : 0.0;
        case Kind::uniform: return uniform01(rng);
        case Kind::two_point: return uniform01(rng) < p ? a : b;
        case Kind::point_mass: return a;
    }
    return 0.0;
}

// --- coverage ---------------------------------------------------------------

CoverageResult CoverageResult::from_counts(std::size_t trials, std::size_t violations, double target) {
    CoverageResult r;
    r.trials = trials;
    r.violations = violations;
    r.target_delta = target;
    r.empirical_rate = trials ? static_cast<double>(violations) / static_cast<double>(trials) : 0.0;
    r.mc_stderr = trials ? std::sqrt(r.empirical_rate * (1.0 - r.empirical_rate) / static_cast<double>(trials)) : 0.0;
    return r;
}

bool CoverageResult::pass() const { return empirical_rate <= target_delta + 3.0 * mc_stderr; }

BernsteinCoverage coverage_test(const Distribution& dist, const CoverageSettings& s) {
    check_settings(s);
    const double truth = dist.mean();
    std::vector<std::size_t> up(block_count(s.trials), 0), down(block_count(s.trials), 0);
    parallel_for(up.size(), s.jobs, [&](std::size_t b) {
        std::vector<double> sample(s.m);
        const std::size_t end = std::min(s.trials, (b + 1) * kBlock);
        for (std::size_t trial = b * kBlock; trial < end; ++trial) {
            auto rng = make_rng(s.seed, trial);
            draw(dist, rng, sample);
            const double mean = mean_of(sample);
            const double r = empirical_bernstein(sample, s.delta, s.form).upper;
            if (truth - mean > r) ++up[b];
            if (mean - truth > r) ++down[b];
        }
    });
    std::size_t u = 0, d = 0;
    for (std::size_t b = 0; b < up.size(); ++b) {
        u += up[b];
        d += down[b];
    }
    return {CoverageResult::from_counts(s.trials, u, s.delta), CoverageResult::from_counts(s.trials, d, s.delta)};
}

bool VarianceCoverage::unbiased() const { return std::abs(v_hat_mean - true_variance) <= 3.0 * v_hat_stderr; }

VarianceCoverage variance_concentration_test(const Distribution& dist, const CoverageSettings& s) {
    check_settings(s);
    const double sd = std::sqrt(dist.variance());
    const double n = static_cast<double>(s.m);
    const double slack_low = std::sqrt(std::log(1.0 / s.delta) / (16.0 * n));
    const double slack_high = std::sqrt(2.0 * std::log(1.0 / s.delta) / n);

    const std::size_t blocks = block_count(s.trials);
    std::vector<std::size_t> low(blocks, 0), high(blocks, 0);
    std::vector<double> sum(blocks, 0.0), sum_sq(blocks, 0.0);
    parallel_for(blocks, s.jobs, [&](std::size_t b) {
        std::vector<double> sample(s.m);
        const std::size_t end = std::min(s.trials, (b + 1) * kBlock);
        for (std::size_t trial = b * kBlock; trial < end; ++trial) {
            auto rng = make_rng(s.seed, trial);
            draw(dist, rng, sample);
            const double v = v_hat(sample, s.form);
            const double root = std::sqrt(v);
            if (sd < root - slack_low) ++low[b];
            if (sd > root + slack_high) ++high[b];
            sum[b] += v;
            sum_sq[b] += v * v;
        }
    });

    VarianceCoverage out;
    std::size_t lo = 0, hi = 0;
    double total = 0.0, total_sq = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        lo += low[b];
        hi += high[b];
        total += sum[b];
        total_sq += sum_sq[b];
    }
    const double t = static_cast<double>(s.trials);
    out.lower = CoverageResult::from_counts(s.trials, lo, s.delta);
    out.upper = CoverageResult::from_counts(s.trials, hi, s.delta);
    out.true_variance = dist.variance();
    out.v_hat_mean = total / t;
    const double var = std::max(0.0, (total_sq - total * total / t) / (t - 1.0));
    out.v_hat_stderr = std::sqrt(var / t);
    return out;
}

// --- committees ---------------------------------------------------------------

namespace {

std::vector<double> cumulative_weights(const VotingClassifier& f) {
    if (!f.normalized) throw std::invalid_argument("committee sampling needs a normalized classifier");
    if (f.members.empty()) throw std::invalid_argument("committee sampling needs a non-empty classifier");
    std::vector<double> cum;
    cum.reserve(f.members.size());
    double acc = 0.0;
    for (const auto& m : f.members) {
        if (!(m.alpha >= 0.0)) throw std::invalid_argument("committee sampling needs non-negative weights");
        acc += m.alpha;
        cum.push_back(acc);
    }
    return cum;
}

std::size_t pick(std::span<const double> cum, Rng& rng) {
    const double u = uniform01(rng) * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

}  // namespace

VotingClassifier sample_committee(const VotingClassifier& f, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("committee size must be >= 1");
    const auto cum = cumulative_weights(f);
    auto rng = make_rng(seed, 0);
    VotingClassifier g;
    g.normalized = true;
    g.members.reserve(n);
    for (std::size_t k = 0; k < n; ++k) g.members.push_back({f.members[pick(cum, rng)].stump, 1.0 / static_cast<double>(n)});
    return g;
}

double committee_tail_bound(std::size_t n, double t, double average_margin) {
    return std::exp(-static_cast<double>(n) * t * t / (2.0 - 2.0 * average_margin * average_margin + 4.0 * t / 3.0));
}

CommitteeTail committee_tail_test(const VotingClassifier& f, const BinaryDataset& d, std::size_t n, double t,
                                  std::size_t draws, std::uint64_t seed, std::size_t jobs) {
    if (!(t > 0.0)) throw std::invalid_argument("committee tail needs t > 0");
    if (n < 1) throw std::invalid_argument("committee size must be >= 1");
    if (draws < kMinTrials)
        throw std::invalid_argument("draws = " + std::to_string(draws) + " is below the floor of " +
                                    std::to_string(kMinTrials));
    const auto cum = cumulative_weights(f);
    const std::size_t m = d.size();

    // agreement[j * m + i] = y_i h_j(x_i)
    std::vector<std::int8_t> agreement(f.members.size() * m);
    for (std::size_t j = 0; j < f.members.size(); ++j) {
        const auto h = predict_all(f.members[j].stump, d.base());
        for (std::size_t i = 0; i < m; ++i) agreement[j * m + i] = static_cast<std::int8_t>(h[i] * d.y(i));
    }
    const auto yf = instance_margins(f, d);
    const double average = mean_of(yf);

    const std::size_t blocks = block_count(draws);
    std::vector<std::size_t> hits(blocks, 0);
    parallel_for(blocks, jobs, [&](std::size_t b) {
        const std::size_t end = std::min(draws, (b + 1) * kBlock);
        for (std::size_t k = b * kBlock; k < end; ++k) {
            auto rng = make_rng(seed, k);
            const std::size_t i = uniform_index(rng, m);
            long vote = 0;
            for (std::size_t c = 0; c < n; ++c) vote += agreement[pick(cum, rng) * m + i];
            const double yg = static_cast<double>(vote) / static_cast<double>(n);
            if (yg - yf[i] >= t) ++hits[b];
        }
    });
    std::size_t total = 0;
    for (auto h : hits) total += h;

    CommitteeTail out;
    out.bound = committee_tail_bound(n, t, average);
    out.result = CoverageResult::from_counts(draws, total, out.bound);
    out.average_margin = average;
    out.n = n;
    out.t = t;
    return out;
}

}  // namespace marginforge
