#include "marginforge/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace marginforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dm(std::size_t m) { return static_cast<double>(m); }

std::string describe(double lhs, const char* op, double rhs) {
    std::ostringstream s;
    s.precision(6);
    s << lhs << ' ' << op << ' ' << rhs;
    return s.str();
}

Precondition gate(std::string name, bool ok, std::string detail) {
    return {std::move(name), ok, std::move(detail)};
}

BoundReport start(const BoundInputs& in, std::string name) {
    in.validate();
    BoundReport r;
    r.name = std::move(name);
    return r;
}

void finish(BoundReport& r, bool rigorous_if_preconditions = true) {
    r.raw_value = r.value;
    r.rigorous = rigorous_if_preconditions && r.preconditions_hold() && std::isfinite(r.value);
}

// ln(2 m^2 / ln|H|), the common factor of the k-th margin and Emargin bounds.
double log_ratio(std::size_t m, double h_size) { return std::log(2.0 * dm(m) * dm(m) / std::log(h_size)); }

}  // namespace

void BoundInputs::validate() const {
    if (profile.size() < 1) throw std::invalid_argument("bound inputs need m >= 1");
    if (!(h_size >= 2.0)) throw std::invalid_argument("bound inputs need |H| >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bound inputs need delta in (0, 1)");
}

bool BoundReport::preconditions_hold() const {
    return std::all_of(preconditions.begin(), preconditions.end(),
                       [](const Precondition& p) { return p.satisfied; });
}

std::optional<double> BoundReport::intermediate(const std::string& key) const {
    for (const auto& [k, v] : intermediates)
        if (k == key) return v;
    return std::nullopt;
}

std::vector<double> theta_candidates(const MarginProfile& p) {
    std::vector<double> out;
    out.reserve(p.size() + 1000);
    for (double v : p.margins())
        if (v > 0.0) out.push_back(v);
    for (int i = 1; i <= 1000; ++i) out.push_back(i / 1000.0);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

MarginProfile constant_profile(std::size_t m, double theta) {
    return MarginProfile(std::vector<double>(m, theta));
}

// --- minimum margin ---------------------------------------------------------

double breiman_r(std::size_t m, double h_size, double theta) {
    return 32.0 * std::log(2.0 * h_size) / (dm(m) * theta * theta);
}

double breiman_value(std::size_t m, double h_size, double delta, double theta) {
    if (!(theta > 0.0)) return kInf;
    const double r = breiman_r(m, h_size, theta);
    return r * (std::log(2.0 * dm(m)) + std::log(1.0 / r) + 1.0) + std::log(h_size / delta) / dm(m);
}

BoundReport bound_breiman(const BoundInputs& in) {
    auto r = start(in, "breiman");
    const std::size_t m = in.m();
    const double theta = in.profile.min();
    const double floor_theta = 4.0 * std::sqrt(2.0 / in.h_size);
    r.arg = theta;
    r.arg_kind = "theta";
    r.preconditions.push_back(gate("theta1 > 4*sqrt(2/|H|)", theta > floor_theta, describe(theta, ">", floor_theta)));
    if (!(theta > 0.0)) {
        r.value = kInf;
        r.intermediates.emplace_back("R", kInf);
        r.preconditions.push_back(gate("R <= 2m", false, "minimum margin is not positive; R undefined"));
        r.notes.push_back("minimum margin <= 0: bound undefined");
        finish(r);
        return r;
    }
    const double big_r = breiman_r(m, in.h_size, theta);
    r.preconditions.push_back(gate("R <= 2m", big_r <= 2.0 * dm(m), describe(big_r, "<=", 2.0 * dm(m))));
    r.intermediates.emplace_back("R", big_r);
    r.value = breiman_value(m, in.h_size, in.delta, theta);
    finish(r);
    return r;
}

// --- k-th margin ------------------------------------------------------------

double kth_q(std::size_t m, double h_size, double delta, double theta) {
    return 8.0 * std::log(2.0 * h_size) / (theta * theta) * log_ratio(m, h_size) + std::log(h_size) +
           std::log(dm(m) / delta);
}

BoundReport bound_kth(const BoundInputs& in, std::size_t k) {
    auto r = start(in, "kth_margin");
    const std::size_t m = in.m();
    const double theta = kth_margin(in.profile, k);
    const double floor_theta = std::sqrt(8.0 / in.h_size);
    r.arg = static_cast<double>(k);
    r.arg_kind = "k";
    r.intermediates.emplace_back("theta", theta);
    r.preconditions.push_back(gate("theta_k > sqrt(8/|H|)", theta > floor_theta, describe(theta, ">", floor_theta)));
    if (!(theta > 0.0)) {
        r.value = kInf;
        r.notes.push_back("k-th margin <= 0: bound undefined");
        finish(r);
        return r;
    }
    const double q = kth_q(m, in.h_size, in.delta, theta);
    const auto inv = kl_inverse(static_cast<double>(k - 1) / dm(m), q / dm(m));
    r.intermediates.emplace_back("q", q);
    r.value = std::log(in.h_size) / dm(m) + inv.value;
    if (inv.saturated) r.notes.push_back("KL inverse saturated at 1");

    if (dm(m) > 4.0 * static_cast<double>(k)) {
        const double kk = static_cast<double>(k);
        const double inner = 8.0 * std::log(2.0 * in.h_size) / (theta * theta) * log_ratio(m, in.h_size) +
                             std::log(in.h_size) + std::log(kk) + (kk - 1.0) * std::log(dm(m)) - std::log(in.delta);
        r.intermediates.emplace_back("constant_k_value", std::log(in.h_size) / dm(m) + 2.0 / dm(m) * inner);
    } else {
        r.notes.push_back("constant-k variant withheld: requires m > 4k");
    }
    finish(r);
    return r;
}

// --- Emargin ----------------------------------------------------------------

BoundReport bound_emargin(const BoundInputs& in) {
    auto r = start(in, "emargin");
    const std::size_t m = in.m();
    r.arg_kind = "q";
    r.preconditions.push_back(gate("|H| >= 9", in.h_size >= 9.0, describe(in.h_size, ">=", 9.0)));

    const double ln_h = std::log(in.h_size);
    double best = kInf;
    std::size_t best_j = 0;
    double best_theta = 0.0;
    double best_u = 0.0;
    std::size_t admissible = 0;
    if (in.h_size >= 9.0) {
        for (std::size_t j = 0; j <= m; ++j) {
            const auto theta_hat = emargin_theta(in.profile, j, in.h_size);
            if (!theta_hat) continue;
            ++admissible;
            const double th = *theta_hat;
            const double u = (8.0 * ln_h / (th * th) * log_ratio(m, in.h_size) + ln_h + std::log(dm(m) / in.delta)) / dm(m);
            const double term = kl_inverse(static_cast<double>(j) / dm(m), u).value;
            if (term < best) {
                best = term;
                best_j = j;
                best_theta = th;
                best_u = u;
            }
        }
    }
    if (admissible == 0) {
        r.value = kInf;
        r.notes.push_back("no admissible q on the grid");
    } else {
        r.value = ln_h / dm(m) + best;
        r.arg = static_cast<double>(best_j) / dm(m);
        r.intermediates.emplace_back("theta_hat", best_theta);
        r.intermediates.emplace_back("u", best_u);
    }

    // Infimum over k of the k-th margin bound, restricted to gated k.
    double kth_best = kInf;
    std::size_t kth_arg = 0;
    const double floor_theta = std::sqrt(8.0 / in.h_size);
    for (std::size_t k = 1; k <= m; ++k) {
        const double th = kth_margin(in.profile, k);
        if (!(th > floor_theta) || !(th > 0.0)) continue;
        const double q = kth_q(m, in.h_size, in.delta, th);
        const double v = ln_h / dm(m) + kl_inverse(static_cast<double>(k - 1) / dm(m), q / dm(m)).value;
        if (v < kth_best) {
            kth_best = v;
            kth_arg = k;
        }
    }
    r.intermediates.emplace_back("kth_infimum", kth_best);
    if (kth_arg > 0) r.intermediates.emplace_back("kth_infimum_k", static_cast<double>(kth_arg));
    finish(r);
    return r;
}

// --- new upper bound --------------------------------------------------------

double mu_new(std::size_t m, double h_size, double delta, double theta) {
    return 8.0 / (theta * theta) * std::log(dm(m)) * std::log(2.0 * h_size) + std::log(2.0 * h_size / delta);
}

double new_objective(const BoundInputs& in, double theta) {
    const std::size_t m = in.m();
    const double below = cdf(in.profile, theta, Inclusion::strictly_below);
    const double mu = mu_new(m, in.h_size, in.delta, theta);
    return below + (7.0 * mu + 3.0 * std::sqrt(2.0 * mu)) / (3.0 * dm(m)) + std::sqrt(2.0 * mu / dm(m) * below);
}

BoundReport bound_new(const BoundInputs& in) {
    auto r = start(in, "new");
    const std::size_t m = in.m();
    r.arg_kind = "theta";
    r.preconditions.push_back(gate("m >= 4", m >= 4, describe(dm(m), ">=", 4.0)));
    double best = kInf;
    double best_theta = 1.0;
    for (double theta : theta_candidates(in.profile)) {
        const double v = new_objective(in, theta);
        if (v < best) {
            best = v;
            best_theta = theta;
        }
    }
    r.value = 2.0 / dm(m) + best;
    r.arg = best_theta;
    r.intermediates.emplace_back("mu", mu_new(m, in.h_size, in.delta, best_theta));
    r.intermediates.emplace_back("pr_below", cdf(in.profile, best_theta, Inclusion::strictly_below));
    finish(r);
    return r;
}

Corollary2Verdict check_corollary2(const BoundInputs& in) {
    in.validate();
    const std::size_t m = in.m();
    const double theta1 = in.profile.min();
    Corollary2Verdict v;
    const double theta_floor = 4.0 * std::sqrt(2.0 / in.h_size);
    v.checks.push_back(gate("theta1 > 0", theta1 > 0.0, describe(theta1, ">", 0.0)));
    v.checks.push_back(gate("theta1 > 4*sqrt(2/|H|)", theta1 > theta_floor, describe(theta1, ">", theta_floor)));
    if (theta1 > 0.0) {
        v.r = breiman_r(m, in.h_size, theta1);
        v.checks.push_back(gate("R <= 2m", v.r <= 2.0 * dm(m), describe(v.r, "<=", 2.0 * dm(m))));
        const double need = std::max(4.0, std::exp(theta1 * theta1 / (4.0 * std::log(2.0 * in.h_size)) *
                                                    std::log(in.h_size / in.delta)));
        v.checks.push_back(gate("m >= max{4, exp(...)}", dm(m) >= need, describe(dm(m), ">=", need)));
        const double mu1 = mu_new(m, in.h_size, in.delta, theta1);
        v.penalty_at_theta1 = (7.0 * mu1 + 3.0 * std::sqrt(2.0 * mu1)) / (3.0 * dm(m));
    } else {
        v.r = kInf;
        v.checks.push_back(gate("R <= 2m", false, "R undefined"));
        v.checks.push_back(gate("m >= max{4, exp(...)}", false, "minimum margin not positive"));
        v.penalty_at_theta1 = kInf;
    }
    v.preconditions = std::all_of(v.checks.begin(), v.checks.end(), [](const Precondition& p) { return p.satisfied; });
    const auto nb = bound_new(in);
    v.new_value = nb.value;
    v.breiman_value = breiman_value(m, in.h_size, in.delta, theta1);
    v.holds = v.new_value <= v.breiman_value;
    v.penalty_at_theta1_holds = nb.value - 2.0 / dm(m) <= v.penalty_at_theta1;
    return v;
}

// --- lower bound ------------------------------------------------------------

double lower_objective(const BoundInputs& in, double theta) {
    const std::size_t m = in.m();
    const double below_neg = cdf(in.profile, -theta, Inclusion::strictly_below);
    const double wrong = cdf(in.profile, 0.0, Inclusion::strictly_below);
    const double mu = mu_new(m, in.h_size, in.delta, theta);
    return below_neg - std::sqrt(2.0 * mu / dm(m) * wrong) - (7.0 * mu + 3.0 * std::sqrt(2.0 * mu)) / (3.0 * dm(m));
}

BoundReport bound_lower(const BoundInputs& in) {
    auto r = start(in, "lower");
    const std::size_t m = in.m();
    r.arg_kind = "theta";
    r.preconditions.push_back(gate("m >= 4", m >= 4, describe(dm(m), ">=", 4.0)));
    r.notes.push_back("Pr_S[yg(x)<0] evaluated as Pr_S[yf(x)<0]");

    auto candidates = theta_candidates(in.profile);
    // Pr_S[yf < -theta] drops at theta = -margin; the supremum sits just below.
    for (double v : in.profile.margins()) {
        if (v < 0.0) {
            candidates.push_back(-v);
            const double below = std::nextafter(-v, 0.0);
            if (below > 0.0) candidates.push_back(below);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double best = -kInf;
    double best_theta = 1.0;
    for (double theta : candidates) {
        const double v = lower_objective(in, theta);
        if (v > best) {
            best = v;
            best_theta = theta;
        }
    }
    r.raw_value = best - 2.0 / dm(m);
    r.value = std::max(0.0, r.raw_value);
    r.arg = best_theta;
    r.intermediates.emplace_back("raw_value", r.raw_value);
    r.intermediates.emplace_back("mu", mu_new(m, in.h_size, in.delta, best_theta));
    r.rigorous = false;
    return r;
}

// --- average margin / variance bound ---------------------------------------

double mu_distribution(std::size_t m, double h_size, double delta, double theta) {
    return 144.0 * std::log(dm(m)) * std::log(2.0 * h_size) / (theta * theta) + std::log(2.0 * h_size / delta);
}

double distribution_exponential(std::size_t m, double average_margin, double theta) {
    return std::exp(-2.0 * std::log(dm(m)) / (1.0 - average_margin * average_margin + theta / 9.0));
}

DistributionTerms distribution_terms(const BoundInputs& in, double theta) {
    const std::size_t m = in.m();
    const double n = dm(m);
    DistributionTerms t;
    t.mu = mu_distribution(m, in.h_size, in.delta, theta);
    t.below = cdf(in.profile, theta, Inclusion::strictly_below);
    t.sqrt_mu = std::sqrt(6.0 * t.mu) / std::pow(n, 1.5);
    t.linear_mu = 7.0 * t.mu / (3.0 * n);
    t.variance = std::sqrt(2.0 * t.mu / n * i_hat(in.profile, theta));
    t.exponential = distribution_exponential(m, moments(in.profile).mean, theta);
    return t;
}

BoundReport bound_distribution(const BoundInputs& in) {
    auto r = start(in, "distribution");
    const std::size_t m = in.m();
    r.arg_kind = "theta";
    r.preconditions.push_back(gate("m >= 4", m >= 4, describe(dm(m), ">=", 4.0)));
    double best = kInf;
    double best_theta = 1.0;
    DistributionTerms best_terms;
    for (double theta : theta_candidates(in.profile)) {
        const auto terms = distribution_terms(in, theta);
        if (terms.total() < best) {
            best = terms.total();
            best_theta = theta;
            best_terms = terms;
        }
    }
    const double tail = std::pow(dm(m), -50.0);
    r.value = tail + best;
    r.arg = best_theta;
    r.intermediates.emplace_back("mu", best_terms.mu);
    r.intermediates.emplace_back("term_pr_below", best_terms.below);
    r.intermediates.emplace_back("term_sqrt_mu", best_terms.sqrt_mu);
    r.intermediates.emplace_back("term_linear_mu", best_terms.linear_mu);
    r.intermediates.emplace_back("term_variance", best_terms.variance);
    r.intermediates.emplace_back("term_exponential", best_terms.exponential);
    r.intermediates.emplace_back("term_m_pow_minus_50", tail);
    r.intermediates.emplace_back("average_margin", moments(in.profile).mean);
    finish(r);
    return r;
}

// --- Schapire index -----------------------------------------------------------

double index_schapire(const BoundInputs& in, double theta) {
    in.validate();
    if (!(theta > 0.0)) return kInf;
    const double n = dm(in.m());
    const double penalty = std::sqrt(std::log(n) * std::log(in.h_size) / (theta * theta) + std::log(1.0 / in.delta)) / std::sqrt(n);
    return cdf(in.profile, theta, Inclusion::at_most) + penalty;
}

BoundReport bound_schapire_index(const BoundInputs& in) {
    auto r = start(in, "schapire_index");
    r.arg_kind = "theta";
    r.notes.push_back("non-rigorous index: the O(.) constant is unspecified and set to 1");
    double best = kInf;
    double best_theta = 1.0;
    for (double theta : theta_candidates(in.profile)) {
        const double v = index_schapire(in, theta);
        if (v < best) {
            best = v;
            best_theta = theta;
        }
    }
    r.value = best;
    r.raw_value = best;
    r.arg = best_theta;
    r.rigorous = false;
    return r;
}

}  // namespace marginforge
