#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "marginforge/boost.hpp"
#include "marginforge/dataset.hpp"

namespace marginforge {

/// Sorted margins y_i f(x_i) of one classifier on one sample.
class MarginProfile {
public:
    MarginProfile() = default;
    /// Sorts; every entry must lie in [-1, 1].
    explicit MarginProfile(std::vector<double> margins);

    std::size_t size() const { return margins_.size(); }
    std::span<const double> margins() const { return margins_; }
    double min() const { return margins_.front(); }
    double max() const { return margins_.back(); }

private:
    std::vector<double> margins_;
};

/// Per-instance margins in sample order (unsorted).
std::vector<double> instance_margins(const VotingClassifier& f, const BinaryDataset& d);

MarginProfile profile(const VotingClassifier& f, const BinaryDataset& d);

/// k-th smallest margin, 1-based. k = 1 is the minimum margin.
double kth_margin(const MarginProfile& p, std::size_t k);

enum class Inclusion { at_most, strictly_below };

/// Pr_S[yf <= theta] (at_most) or Pr_S[yf < theta] (strictly_below).
double cdf(const MarginProfile& p, double theta, Inclusion inclusion);

/// Fraction of margins >= theta.
double tail_at_least(const MarginProfile& p, double theta);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // population (divide by m)
};

Moments moments(const MarginProfile& p);

/// Pr_S[yf < theta] * Pr_S[yf >= 2 theta / 3].
double i_hat(const MarginProfile& p, double theta);

/// sup{theta in (sqrt(8/h), 1] : Pr_S[yf <= theta] <= q} with q = q_index/m.
/// Realized as the (q_index+1)-th order statistic (or 1 when q_index = m);
/// empty when that value does not exceed sqrt(8/h).
std::optional<double> emargin_theta(const MarginProfile& p, std::size_t q_index, double h_size);
/// Same, for q given as a fraction on the grid {0, 1/m, ..., 1}.
std::optional<double> emargin_theta(const MarginProfile& p, double q, double h_size);

/// Two-column CSV (theta,cdf) over the unique margins and a 1000-point grid on [-1, 1].
void write_cdf_csv(std::ostream& out, const MarginProfile& p);

}  // namespace marginforge
