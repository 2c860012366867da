#include "marginforge/margin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "marginforge/report.hpp"

namespace marginforge {

MarginProfile::MarginProfile(std::vector<double> margins) : margins_(std::move(margins)) {
    if (margins_.empty()) throw std::invalid_argument("margin profile needs at least one margin");
    for (double v : margins_) {
        if (!(v >= -1.0 && v <= 1.0))
            throw std::invalid_argument("margin " + std::to_string(v) + " outside [-1, 1]");
    }
    std::sort(margins_.begin(), margins_.end());
}

std::vector<double> instance_margins(const VotingClassifier& f, const BinaryDataset& d) {
    std::vector<double> out(d.size(), 0.0);
    for (const auto& member : f.members) {
        const auto h = predict_all(member.stump, d.base());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += member.alpha * d.y(i) * h[i];
    }
    // Rounding in the weight sum can push a unanimous vote a few ulps past 1.
    for (double& v : out) v = std::clamp(v, -1.0, 1.0);
    return out;
}

MarginProfile profile(const VotingClassifier& f, const BinaryDataset& d) {
    if (!f.normalized) throw std::invalid_argument("margins require a normalized classifier");
    return MarginProfile(instance_margins(f, d));
}

double kth_margin(const MarginProfile& p, std::size_t k) {
    if (k < 1 || k > p.size())
        throw std::out_of_range("k = " + std::to_string(k) + " outside [1, " + std::to_string(p.size()) + "]");
    return p.margins()[k - 1];
}

double cdf(const MarginProfile& p, double theta, Inclusion inclusion) {
    const auto m = p.margins();
    const auto it = inclusion == Inclusion::at_most ? std::upper_bound(m.begin(), m.end(), theta)
                                                    : std::lower_bound(m.begin(), m.end(), theta);
    return static_cast<double>(it - m.begin()) / static_cast<double>(m.size());
}

double tail_at_least(const MarginProfile& p, double theta) {
    return 1.0 - cdf(p, theta, Inclusion::strictly_below);
}

Moments moments(const MarginProfile& p) {
    const auto m = p.margins();
    const double n = static_cast<double>(m.size());
    double sum = 0.0;
    for (double v : m) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : m) ss += (v - mean) * (v - mean);
    return {mean, ss / n};
}

double i_hat(const MarginProfile& p, double theta) {
    return cdf(p, theta, Inclusion::strictly_below) * tail_at_least(p, 2.0 * theta / 3.0);
}

std::optional<double> emargin_theta(const MarginProfile& p, std::size_t q_index, double h_size) {
    const std::size_t m = p.size();
    if (q_index > m) throw std::out_of_range("q index beyond m");
    const double floor_theta = std::sqrt(8.0 / h_size);
    const double sup = q_index == m ? 1.0 : std::min(1.0, p.margins()[q_index]);
    if (!(sup > floor_theta)) return std::nullopt;
    return sup;
}

std::optional<double> emargin_theta(const MarginProfile& p, double q, double h_size) {
    const double scaled = q * static_cast<double>(p.size());
    const double index = std::round(scaled);
    if (q < 0.0 || q > 1.0 || std::abs(scaled - index) > 1e-9)
        throw std::invalid_argument("q = " + std::to_string(q) + " is not on the grid {0, 1/m, ..., 1}");
    return emargin_theta(p, static_cast<std::size_t>(index), h_size);
}

void write_cdf_csv(std::ostream& out, const MarginProfile& p) {
    std::vector<double> thetas(p.margins().begin(), p.margins().end());
    for (int i = 0; i < 1000; ++i) thetas.push_back(-1.0 + 2.0 * i / 999.0);
    std::sort(thetas.begin(), thetas.end());
    thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());
    out << "theta,cdf\n";
    for (double t : thetas) out << format_real(t) << ',' << format_real(cdf(p, t, Inclusion::at_most)) << '\n';
}

}  // namespace marginforge
