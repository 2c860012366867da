#include "marginforge/boost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace marginforge {

std::string to_string(Rule rule) { return rule == Rule::adaboost ? "adaboost" : "arcgv"; }

std::optional<Rule> parse_rule(std::string_view name) {
    if (name == "adaboost") return Rule::adaboost;
    if (name == "arcgv" || name == "arc-gv") return Rule::arcgv;
    return std::nullopt;
}

double VotingClassifier::total_weight() const {
    double s = 0.0;
    for (const auto& member : members) s += member.alpha;
    return s;
}

double VotingClassifier::score(std::span<const Value> x) const {
    double f = 0.0;
    for (const auto& member : members) f += member.alpha * marginforge::predict(member.stump, x);
    return f;
}

double alpha_adaboost(double gamma) {
    const double g = std::clamp(gamma, -kGammaClamp, kGammaClamp);
    return 0.5 * std::log((1.0 + g) / (1.0 - g));
}

double alpha_arcgv(double gamma, double rho) { return alpha_adaboost(gamma) - alpha_adaboost(rho); }

double update_weights(std::vector<double>& distribution, double alpha,
                      std::span<const std::int8_t> agreements) {
    if (agreements.size() != distribution.size())
        throw std::invalid_argument("agreement vector length does not match distribution");
    const double up = std::exp(alpha);
    const double down = std::exp(-alpha);
    double z = 0.0;
    for (std::size_t i = 0; i < distribution.size(); ++i) {
        distribution[i] *= agreements[i] > 0 ? down : up;
        z += distribution[i];
    }
    if (!(z > 0.0) || !std::isfinite(z))
        throw TrainingError("weight update annihilated the distribution (Z = " + std::to_string(z) + ")");
    for (double& w : distribution) w /= z;
    return z;
}

BoostResult run(const BinaryDataset& d, const HypothesisSpace& space, const BoostConfig& config) {
    if (config.rounds < 1) throw std::invalid_argument("boosting needs at least one round");
    const std::size_t m = d.size();
    if (space.sample_size() != m) throw std::invalid_argument("hypothesis space built on a different sample");

    BoostResult result;
    auto& trace = result.trace;
    auto& members = result.classifier.members;
    trace.rounds.reserve(config.rounds);
    members.reserve(config.rounds);

    std::vector<double> dist(m, 1.0 / static_cast<double>(m));
    std::vector<double> scores(m, 0.0);
    std::vector<std::int8_t> agreements(m);
    double sum_alpha = 0.0;

    for (std::size_t t = 1; t <= config.rounds; ++t) {
        double rho = 0.0;
        if (config.rule == Rule::arcgv && !config.force_zero_rho && sum_alpha > 0.0) {
            rho = *std::min_element(scores.begin(), scores.end()) / sum_alpha;
            rho = std::clamp(rho, -1.0, 1.0);
        }

        const auto fit = space.best(dist);
        if (config.rule == Rule::adaboost && fit.edge <= kEarlyStopEdge) {
            trace.stopped_early = true;
            break;
        }

        const auto h = predict_all(fit.stump, d.base());
        for (std::size_t i = 0; i < m; ++i) agreements[i] = static_cast<std::int8_t>(d.y(i) * h[i]);

        RoundRecord rec;
        rec.t = t;
        rec.gamma = fit.edge;
        rec.rho = rho;
        rec.alpha_raw = config.rule == Rule::adaboost ? alpha_adaboost(fit.edge) : alpha_arcgv(fit.edge, rho);
        rec.alpha_used = rec.alpha_raw;
        if (config.rule == Rule::arcgv && rec.alpha_raw < 0.0 && config.clamp_negative_alpha) {
            rec.alpha_used = 0.0;
            ++trace.clamped_rounds;
        }

        rec.z = update_weights(dist, rec.alpha_used, agreements);
        sum_alpha += rec.alpha_used;
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < m; ++i) {
            scores[i] += rec.alpha_used * agreements[i];
            if (scores[i] <= 0.0) ++wrong;
        }
        rec.train_error = static_cast<double>(wrong) / static_cast<double>(m);

        trace.rounds.push_back(rec);
        members.push_back({fit.stump, rec.alpha_used});
    }

    if (!(sum_alpha > 0.0))
        throw TrainingError("total vote weight is " + std::to_string(sum_alpha) +
                            " after " + std::to_string(trace.rounds.size()) + " rounds; cannot normalize");
    for (auto& member : members) member.alpha /= sum_alpha;
    result.classifier.normalized = true;
    return result;
}

BoostResult run(const BinaryDataset& d, const BoostConfig& config) {
    return run(d, HypothesisSpace(d), config);
}

}  // namespace marginforge
