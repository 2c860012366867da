#include "marginforge/stump.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace marginforge {

namespace {

const Feature& checked_feature(const Stump& s, const Dataset& d) {
    if (s.feature >= d.arity())
        throw ArityError("stump tests feature " + std::to_string(s.feature) + " but data has " +
                         std::to_string(d.arity()) + " features");
    const auto& f = d.feature(s.feature);
    const auto wanted = s.kind == StumpKind::threshold ? FeatureKind::numeric : FeatureKind::categorical;
    if (f.kind != wanted)
        throw ArityError("stump on feature " + f.name + " does not match the feature kind");
    return f;
}

}  // namespace

int predict(const Stump& s, std::span<const Value> x) {
    bool outcome = true;
    switch (s.kind) {
        case StumpKind::constant:
            break;
        case StumpKind::threshold: {
            if (s.feature >= x.size()) throw ArityError("feature vector too short for stump");
            const auto* v = std::get_if<double>(&x[s.feature]);
            if (!v) throw ArityError("threshold stump applied to a categorical value");
            outcome = *v <= s.threshold;
            break;
        }
        case StumpKind::category: {
            if (s.feature >= x.size()) throw ArityError("feature vector too short for stump");
            const auto* v = std::get_if<std::string>(&x[s.feature]);
            if (!v) throw ArityError("category stump applied to a numeric value");
            outcome = *v == s.category;
            break;
        }
    }
    return outcome ? s.polarity : -s.polarity;
}

std::vector<std::int8_t> predict_all(const Stump& s, const Dataset& d) {
    const auto pos = static_cast<std::int8_t>(s.polarity);
    const auto neg = static_cast<std::int8_t>(-s.polarity);
    std::vector<std::int8_t> out(d.size(), pos);
    if (s.kind == StumpKind::constant) return out;

    const auto& f = checked_feature(s, d);
    const auto col = d.column(s.feature);
    if (s.kind == StumpKind::threshold) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = col[i] <= s.threshold ? pos : neg;
        return out;
    }
    auto it = std::lower_bound(f.categories.begin(), f.categories.end(), s.category);
    const bool known = it != f.categories.end() && *it == s.category;
    const double code = static_cast<double>(it - f.categories.begin());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (known && col[i] == code) ? pos : neg;
    return out;
}

double edge(const Stump& s, const BinaryDataset& d, std::span<const double> weights) {
    const auto h = predict_all(s, d.base());
    double g = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) g += weights[i] * d.y(i) * h[i];
    return g;
}

HypothesisSpace::HypothesisSpace(const BinaryDataset& d) : y_(d.y().begin(), d.y().end()) {
    const auto& base = d.base();
    const auto m = static_cast<std::uint32_t>(d.size());
    if (m == 0) throw DataError("cannot enumerate hypotheses on an empty sample");

    stumps_.push_back(Stump::constant(1));
    stumps_.push_back(Stump::constant(-1));

    for (std::size_t j = 0; j < base.arity(); ++j) {
        const auto col = base.column(j);
        const auto& f = base.feature(j);
        if (f.kind == FeatureKind::numeric) {
            NumericScan scan{j, {}, {}, {}};
            scan.order.resize(m);
            std::iota(scan.order.begin(), scan.order.end(), 0u);
            std::stable_sort(scan.order.begin(), scan.order.end(),
                             [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
            for (std::uint32_t p = 1; p < m; ++p) {
                const double lo = col[scan.order[p - 1]];
                const double hi = col[scan.order[p]];
                if (lo < hi) {
                    scan.cuts.push_back(p);
                    scan.thresholds.push_back(lo + (hi - lo) / 2.0);
                }
            }
            for (double t : scan.thresholds) {
                stumps_.push_back(Stump::at_most(j, t, 1));
                stumps_.push_back(Stump::at_most(j, t, -1));
            }
            blocks_.push_back({true, numeric_.size()});
            numeric_.push_back(std::move(scan));
        } else {
            CategoryScan scan{j, {}, {}};
            scan.codes.resize(m);
            for (std::uint32_t i = 0; i < m; ++i) scan.codes[i] = static_cast<std::uint32_t>(col[i]);
            scan.observed = scan.codes;
            std::sort(scan.observed.begin(), scan.observed.end());
            scan.observed.erase(std::unique(scan.observed.begin(), scan.observed.end()),
                                scan.observed.end());
            for (auto code : scan.observed) {
                stumps_.push_back(Stump::equals(j, f.categories.at(code), 1));
                stumps_.push_back(Stump::equals(j, f.categories.at(code), -1));
            }
            blocks_.push_back({false, categorical_.size()});
            categorical_.push_back(std::move(scan));
        }
    }
}

StumpFit HypothesisSpace::best(std::span<const double> weights) const {
    const std::size_t m = y_.size();
    if (weights.size() != m) throw std::invalid_argument("weight vector length does not match sample");

    std::vector<double> signed_w(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        signed_w[i] = weights[i] * y_[i];
        total += signed_w[i];
    }

    double best_edge = total;
    std::size_t best_index = 0;
    // Prefix sums reorder the additions, so exact ties can differ by rounding.
    // Anything within kTieTolerance of the incumbent counts as a tie.
    constexpr double kTieTolerance = 1e-12;
    auto consider = [&](double g, std::size_t index) {
        if (g > best_edge + kTieTolerance) {
            best_edge = g;
            best_index = index;
        }
    };
    consider(-total, 1);

    std::size_t index = 2;
    std::vector<double> per_code;
    for (const auto& block : blocks_) {
        if (block.numeric) {
            const auto& scan = numeric_[block.index];
            double prefix = 0.0;
            std::size_t p = 0;
            for (auto cut : scan.cuts) {
                for (; p < cut; ++p) prefix += signed_w[scan.order[p]];
                const double g = 2.0 * prefix - total;
                consider(g, index);
                consider(-g, index + 1);
                index += 2;
            }
        } else {
            const auto& scan = categorical_[block.index];
            const std::size_t dict = scan.observed.empty() ? 0 : scan.observed.back() + 1;
            per_code.assign(dict, 0.0);
            for (std::size_t i = 0; i < m; ++i) per_code[scan.codes[i]] += signed_w[i];
            for (auto code : scan.observed) {
                const double g = 2.0 * per_code[code] - total;
                consider(g, index);
                consider(-g, index + 1);
                index += 2;
            }
        }
    }
    return {stumps_[best_index], best_edge};
}

HypothesisSpace enumerate_hypotheses(const BinaryDataset& d) { return HypothesisSpace(d); }

void check_distribution(std::span<const double> weights, std::size_t m) {
    if (weights.size() != m)
        throw std::invalid_argument("weight vector has " + std::to_string(weights.size()) +
                                    " entries for " + std::to_string(m) + " instances");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be finite and non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
}

StumpFit train_stump(const HypothesisSpace& space, std::span<const double> weights) {
    check_distribution(weights, space.sample_size());
    return space.best(weights);
}

StumpFit train_stump(const BinaryDataset& d, std::span<const double> weights) {
    return train_stump(HypothesisSpace(d), weights);
}

}  // namespace marginforge
