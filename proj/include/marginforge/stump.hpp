#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "marginforge/dataset.hpp"

namespace marginforge {

enum class StumpKind { constant, threshold, category };

/// Depth-one classifier. The test (x_j <= threshold, x_j == category, or
/// always-true for constants) maps to +1/-1 and is multiplied by polarity.
struct Stump {
    StumpKind kind = StumpKind::constant;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::string category;
    int polarity = 1;

    static Stump constant(int polarity) { return {StumpKind::constant, 0, 0.0, {}, polarity}; }
    static Stump at_most(std::size_t feature, double threshold, int polarity) {
        return {StumpKind::threshold, feature, threshold, {}, polarity};
    }
    static Stump equals(std::size_t feature, std::string category, int polarity) {
        return {StumpKind::category, feature, 0.0, std::move(category), polarity};
    }

    Stump flipped() const {
        Stump s = *this;
        s.polarity = -polarity;
        return s;
    }

    bool operator==(const Stump&) const = default;
};

class ArityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

int predict(const Stump& s, std::span<const Value> x);

/// Predictions of s on every row of d. Category tokens are resolved against
/// d's dictionary once; tokens unknown to d never match.
std::vector<std::int8_t> predict_all(const Stump& s, const Dataset& d);

/// Direct (unoptimized) edge sum_i w_i y_i s(x_i).
double edge(const Stump& s, const BinaryDataset& d, std::span<const double> weights);

struct StumpFit {
    Stump stump;
    double edge = 0.0;
};

/// The finite stump space of one training sample, with the sorted column
/// layout needed for O(d*m) weighted training.
class HypothesisSpace {
public:
    explicit HypothesisSpace(const BinaryDataset& d);

    std::size_t size() const { return stumps_.size(); }
    const std::vector<Stump>& stumps() const { return stumps_; }
    std::size_t sample_size() const { return y_.size(); }

    /// Maximum-edge stump; ties go to the earliest stump in enumeration order.
    StumpFit best(std::span<const double> weights) const;

private:
    struct NumericScan {
        std::size_t feature;
        std::vector<std::uint32_t> order;  // rows sorted by value
        std::vector<std::uint32_t> cuts;   // positions in order just past each group except the last
        std::vector<double> thresholds;    // midpoint for each cut
    };
    struct CategoryScan {
        std::size_t feature;
        std::vector<std::uint32_t> codes;  // per row
        std::vector<std::uint32_t> observed;  // sorted observed codes
    };
    struct Block {
        bool numeric;
        std::size_t index;
    };

    std::vector<int> y_;
    std::vector<Stump> stumps_;
    std::vector<NumericScan> numeric_;
    std::vector<CategoryScan> categorical_;
    std::vector<Block> blocks_;  // feature order
};

HypothesisSpace enumerate_hypotheses(const BinaryDataset& d);

/// Validates weights (non-negative, summing to 1 within 1e-9).
void check_distribution(std::span<const double> weights, std::size_t m);

StumpFit train_stump(const HypothesisSpace& space, std::span<const double> weights);
StumpFit train_stump(const BinaryDataset& d, std::span<const double> weights);

}  // namespace marginforge
