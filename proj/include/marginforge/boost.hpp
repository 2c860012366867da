#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "marginforge/dataset.hpp"
#include "marginforge/stump.hpp"

namespace marginforge {

enum class Rule { adaboost, arcgv };

std::string to_string(Rule rule);
std::optional<Rule> parse_rule(std::string_view name);

struct Member {
    Stump stump;
    double alpha = 0.0;
};

/// f = sum alpha_i h_i. When normalized, alphas are non-negative and sum to 1.
struct VotingClassifier {
    std::vector<Member> members;
    bool normalized = false;

    double total_weight() const;
    /// f(x) in [-1, 1] for a normalized classifier.
    double score(std::span<const Value> x) const;
    int predict(std::span<const Value> x) const { return score(x) > 0.0 ? 1 : -1; }
};

struct RoundRecord {
    std::size_t t = 0;
    double gamma = 0.0;
    double alpha_raw = 0.0;
    double alpha_used = 0.0;
    double rho = 0.0;
    double z = 1.0;
    double train_error = 0.0;
};

struct BoostTrace {
    std::vector<RoundRecord> rounds;
    std::size_t clamped_rounds = 0;  // arc-gv rounds whose raw step was negative
    bool stopped_early = false;
};

struct BoostConfig {
    std::size_t rounds = 100;
    Rule rule = Rule::adaboost;
    // Negative arc-gv steps are replaced by 0 unless this is false.
    bool clamp_negative_alpha = true;
    // Arc-gv with rho pinned at 0; reproduces AdaBoost's steps.
    bool force_zero_rho = false;
};

struct BoostResult {
    VotingClassifier classifier;
    BoostTrace trace;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kGammaClamp = 1.0 - 1e-12;
inline constexpr double kEarlyStopEdge = 1e-12;

/// Half log-odds 0.5*ln((1+g)/(1-g)) after clamping |g| to 1 - 1e-12.
double alpha_adaboost(double gamma);
double alpha_arcgv(double gamma, double rho);

/// Multiplies D by exp(-alpha * agreement) and renormalizes in place.
/// Returns Z, the normalizer. Throws TrainingError if all mass vanishes.
double update_weights(std::vector<double>& distribution, double alpha,
                      std::span<const std::int8_t> agreements);

BoostResult run(const BinaryDataset& d, const HypothesisSpace& space, const BoostConfig& config);
BoostResult run(const BinaryDataset& d, const BoostConfig& config);

}  // namespace marginforge
