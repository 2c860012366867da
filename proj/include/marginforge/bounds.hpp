#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "marginforge/margin.hpp"

namespace marginforge {

// ---------------------------------------------------------------------------
// Bernoulli KL divergence and its upper inverse. Natural logarithms.
// ---------------------------------------------------------------------------

/// KL(q||p) with 0 log 0 = 0; +infinity when p sits on {0,1} and disagrees with q.
double kl(double q, double p);

struct KlInverse {
    double value = 0.0;
    bool saturated = false;  // no w < 1 - 1e-15 reaches the budget; value is 1
};

inline constexpr double kKlInverseCeiling = 1.0 - 1e-15;
inline constexpr int kKlInverseIterations = 64;

/// Smallest w >= q with KL(q||w) >= u, by fixed-iteration bisection on [q, 1).
KlInverse kl_inverse(double q, double u);

// ---------------------------------------------------------------------------
// Bound evaluation
// ---------------------------------------------------------------------------

struct BoundInputs {
    double h_size = 2.0;  // |H|
    double delta = 0.05;
    MarginProfile profile;

    std::size_t m() const { return profile.size(); }
    /// Throws std::invalid_argument unless m >= 1, |H| >= 2 and delta in (0, 1).
    void validate() const;
};

struct Precondition {
    std::string name;
    bool satisfied = false;
    std::string detail;
};

struct BoundReport {
    std::string name;
    double value = 0.0;      // may exceed 1; never clipped (except `lower`, see raw_value)
    double raw_value = 0.0;  // equals value except for the clipped lower bound
    std::optional<double> arg;
    std::string arg_kind;  // "theta", "k" or "q"
    std::vector<Precondition> preconditions;
    std::vector<std::pair<std::string, double>> intermediates;
    std::vector<std::string> notes;
    bool rigorous = false;

    bool preconditions_hold() const;
    std::optional<double> intermediate(const std::string& key) const;
};

/// Candidate thetas for the inf/sup over (0, 1]: unique positive margins
/// together with the grid {i/1000 : i = 1..1000}, ascending.
std::vector<double> theta_candidates(const MarginProfile& p);

/// All-equal profile: m copies of theta.
MarginProfile constant_profile(std::size_t m, double theta);

// Minimum-margin bound (Breiman).
double breiman_r(std::size_t m, double h_size, double theta);
double breiman_value(std::size_t m, double h_size, double delta, double theta);
BoundReport bound_breiman(const BoundInputs& in);

// k-th margin bound.
double kth_q(std::size_t m, double h_size, double delta, double theta);
BoundReport bound_kth(const BoundInputs& in, std::size_t k);

// Emargin bound, with the infimum-over-k form alongside.
BoundReport bound_emargin(const BoundInputs& in);

// Empirical-Bernstein margin-distribution bound.
double mu_new(std::size_t m, double h_size, double delta, double theta);
double new_objective(const BoundInputs& in, double theta);
BoundReport bound_new(const BoundInputs& in);

struct Corollary2Verdict {
    bool preconditions = false;  // every entry of checks holds
    bool holds = false;          // new bound <= Breiman bound
    double new_value = 0.0;
    double breiman_value = 0.0;
    double r = 0.0;
    double penalty_at_theta1 = 0.0;  // (7 mu_1 + 3 sqrt(2 mu_1)) / (3m)
    bool penalty_at_theta1_holds = false;
    std::vector<Precondition> checks;
};

Corollary2Verdict check_corollary2(const BoundInputs& in);

// Lower bound. Pr_S[yg < 0] is evaluated as Pr_S[yf < 0].
double lower_objective(const BoundInputs& in, double theta);
BoundReport bound_lower(const BoundInputs& in);

// Average-margin / variance bound.
struct DistributionTerms {
    double below = 0.0;        // Pr_S[yf < theta]
    double sqrt_mu = 0.0;      // sqrt(6 mu) / m^{3/2}
    double linear_mu = 0.0;    // 7 mu / (3m)
    double variance = 0.0;     // sqrt(2 mu / m * I_hat(theta))
    double exponential = 0.0;  // exp(-2 ln m / (1 - E^2 + theta/9))
    double mu = 0.0;

    double total() const { return below + sqrt_mu + linear_mu + variance + exponential; }
};

double mu_distribution(std::size_t m, double h_size, double delta, double theta);
double distribution_exponential(std::size_t m, double average_margin, double theta);
DistributionTerms distribution_terms(const BoundInputs& in, double theta);
BoundReport bound_distribution(const BoundInputs& in);

/// Schapire-style margin index with the unspecified O(.) constant set to 1.
/// A comparison index only; never a rigorous bound.
double index_schapire(const BoundInputs& in, double theta);
BoundReport bound_schapire_index(const BoundInputs& in);

}  // namespace marginforge
