#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "marginforge/boost.hpp"
#include "marginforge/dataset.hpp"
#include "marginforge/random.hpp"

namespace marginforge {

/// Which pairwise variance statistic to use.
///  unbiased:     sum_{i != j} (Z_i - Z_j)^2 / (2m(m-1)), the sample variance
///  printed_half: sum_{i < j} (Z_i - Z_j)^2 / (2m(m-1)), half of the above
enum class VarianceForm { unbiased, printed_half };

/// Pairwise variance statistic via the sum of squared deviations. Needs m >= 2.
double v_hat(std::span<const double> values, VarianceForm form = VarianceForm::unbiased);

struct SampleStats {
    std::vector<double> values;
    std::size_t m = 0;
    double mean = 0.0;
    double v_hat = 0.0;
};

SampleStats sample_stats(std::vector<double> values);

/// sqrt(2 V ln(2/delta) / m) + 7 ln(2/delta) / (3m).
double bernstein_radius(double variance, std::size_t m, double delta);

struct Deviation {
    double upper = 0.0;  // E[Z] - mean <= upper
    double lower = 0.0;  // mean - E[Z] <= lower
};

/// Both deviation radii of the empirical Bernstein inequality. Needs m >= 4
/// and values in [0, 1].
Deviation empirical_bernstein(std::span<const double> values, double delta,
                              VarianceForm form = VarianceForm::unbiased);

/// Sampling distributions on [0, 1] with analytic mean and variance.
struct Distribution {
    enum class Kind { bernoulli, uniform, two_point, point_mass };
    Kind kind = Kind::uniform;
    double p = 0.5;  // success probability (bernoulli, two_point)
    double a = 0.0;  // two_point value taken with probability p; point_mass location
    double b = 1.0;  // two_point value taken otherwise

    static Distribution bernoulli(double p) { return {Kind::bernoulli, p, 0.0, 1.0}; }
    static Distribution uniform() { return {Kind::uniform, 0.5, 0.0, 1.0}; }
    static Distribution two_point(double a, double b, double p) { return {Kind::two_point, p, a, b}; }
    static Distribution point_mass(double c) { return {Kind::point_mass, 1.0, c, c}; }

    /// Accepts "bernoulli(p)", "uniform", "two_point(a,b,p)", "point_mass(c)".
    /// Throws std::invalid_argument for anything else.
    static Distribution parse(const std::string& tag);

    std::string name() const;
    double mean() const;
    double variance() const;
    double sample(Rng& rng) const;
};

inline constexpr std::size_t kMinTrials = 1000;

struct CoverageResult {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double empirical_rate = 0.0;
    double target_delta = 0.0;
    double mc_stderr = 0.0;

    static CoverageResult from_counts(std::size_t trials, std::size_t violations, double target);
    /// rate <= target + 3 * mc_stderr
    bool pass() const;
};

struct CoverageSettings {
    std::size_t m = 100;
    double delta = 0.05;
    std::size_t trials = 20000;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    VarianceForm form = VarianceForm::unbiased;
};

struct BernsteinCoverage {
    CoverageResult upper;  // E[Z] - mean > radius
    CoverageResult lower;  // mean - E[Z] > radius
    bool pass() const { return upper.pass() && lower.pass(); }
};

BernsteinCoverage coverage_test(const Distribution& dist, const CoverageSettings& s);

struct VarianceCoverage {
    // sqrt(Var) < sqrt(V_hat) - sqrt(ln(1/delta) / (16m))
    CoverageResult lower;
    // sqrt(Var) > sqrt(V_hat) + sqrt(2 ln(1/delta) / m)
    CoverageResult upper;
    double true_variance = 0.0;
    double v_hat_mean = 0.0;
    double v_hat_stderr = 0.0;  // Monte Carlo standard error of v_hat_mean

    bool unbiased() const;
    bool pass() const { return lower.pass() && upper.pass() && unbiased(); }
};

VarianceCoverage variance_concentration_test(const Distribution& dist, const CoverageSettings& s);

/// n members drawn i.i.d. from the distribution given by f's weights, each
/// with weight 1/n. f must be normalized.
VotingClassifier sample_committee(const VotingClassifier& f, std::size_t n, std::uint64_t seed);

/// exp(-n t^2 / (2 - 2 E^2 + 4t/3)) with E the average margin.
double committee_tail_bound(std::size_t n, double t, double average_margin);

struct CommitteeTail {
    CoverageResult result;  // target_delta holds the closed-form bound
    double bound = 0.0;
    double average_margin = 0.0;
    std::size_t n = 0;
    double t = 0.0;
};

/// Frequency of yg(x) - yf(x) >= t over draws of a uniform instance of d and
/// an independent committee g of size n.
CommitteeTail committee_tail_test(const VotingClassifier& f, const BinaryDataset& d, std::size_t n, double t,
                                  std::size_t draws, std::uint64_t seed, std::size_t jobs = 0);

}  // namespace marginforge
