#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "marginforge/boost.hpp"
#include "marginforge/bounds.hpp"
#include "marginforge/dataset.hpp"
#include "marginforge/report.hpp"

namespace marginforge {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    std::vector<std::filesystem::path> datasets;  // resolved against the config file's directory
    std::size_t rounds = 100;                     // "T"
    std::size_t trials = 10;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    double delta = 0.05;
    std::vector<Rule> algorithms{Rule::adaboost, Rule::arcgv};
    std::filesystem::path output_dir = "results";
    std::size_t jobs = 0;  // 0: hardware concurrency; never part of the echo

    /// Throws ConfigError on any out-of-range field.
    void validate(bool need_datasets = true) const;
};

/// Reads {datasets, T, trials, folds, seed, delta, algorithms, output_dir}.
/// Relative paths resolve against base_dir.
ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Resolved config echo embedded in every benchmark output.
Json to_json(const ExperimentConfig& c);

// --- bound sweep ---------------------------------------------------------------

struct BoundSweep {
    // breiman, kth_margin (best k), emargin, new, lower, distribution, schapire_index
    std::vector<BoundReport> reports;
    // Every k with a positive k-th margin; filled only when requested.
    std::vector<BoundReport> kth_all;
    std::size_t kth_evaluated = 0;
    // Number of k with a positive k-th margin whose k-th margin bound is below Emargin.
    std::size_t emargin_violations = 0;
    // The subset of those whose k-th margin also clears the sqrt(8/|H|) gate.
    std::size_t emargin_violations_gated = 0;
    Corollary2Verdict corollary2;
    double h_size = 0.0;

    const BoundReport& get(const std::string& name) const;
    bool corollary2_violation() const { return corollary2.preconditions && !corollary2.holds; }
};

BoundSweep bound_sweep(const VotingClassifier& f, const BinaryDataset& d, double h_size, double delta,
                       bool keep_kth_all = false);
BoundSweep bound_sweep(const MarginProfile& p, double h_size, double delta, bool keep_kth_all = false);

// --- cross-validated comparison ---------------------------------------------------

struct FoldRun {
    std::size_t trial = 0;
    std::size_t fold = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t h_size = 0;
    double test_error = 0.0;
    double train_error = 0.0;
    double min_margin = 0.0;
    double average_margin = 0.0;
    BoundSweep bounds;
};

struct RunResult {
    std::string dataset;
    Rule algorithm = Rule::adaboost;
    std::vector<FoldRun> folds;  // (trial, fold) order, skipped folds absent
    double mean = 0.0;
    double std = 0.0;  // unbiased

    std::vector<double> errors() const;
};

struct SkippedFold {
    std::size_t trial = 0;
    std::size_t fold = 0;
    std::string reason;
};

struct ExperimentResult {
    std::string dataset;
    std::size_t m = 0;
    SplitPlan plan;
    std::vector<RunResult> runs;  // config.algorithms order
    std::vector<SkippedFold> skipped;

    const RunResult* run(Rule r) const;
};

/// Mean and unbiased standard deviation (0 when n < 2).
std::pair<double, double> mean_std(std::span<const double> v);

/// Trains every algorithm on every (trial, fold) of one shared split plan and
/// evaluates test error, training margins and the bound sweep.
ExperimentResult run_experiment(const BinaryDataset& d, const ExperimentConfig& config);

// --- significance -----------------------------------------------------------------

enum class Winner { adaboost, arcgv, tie };
std::string to_string(Winner w);

struct Comparison {
    std::string dataset;
    Winner winner = Winner::tie;
    double t_statistic = 0.0;
    double critical_value = 0.0;
    std::size_t n = 0;
    double mean_difference = 0.0;  // mean(a - b)
};

/// Two-sided 95% Student t critical value for df >= 1.
double t_critical_95(std::size_t df);

/// a: AdaBoost per-fold errors, b: arc-gv per-fold errors, paired.
/// Throws std::invalid_argument on a length mismatch or n < 2.
Comparison paired_t_test(std::span<const double> a, std::span<const double> b, std::string dataset = {});

struct WinTieLoss {
    std::size_t win = 0;
    std::size_t tie = 0;
    std::size_t loss = 0;
    bool operator==(const WinTieLoss&) const = default;
};

/// Tallies from AdaBoost's perspective.
WinTieLoss win_tie_loss(std::span<const Comparison> comparisons);
WinTieLoss win_tie_loss(std::span<const Winner> winners);

// --- full benchmark ---------------------------------------------------------------

struct DatasetOutcome {
    std::filesystem::path path;
    std::optional<ExperimentResult> result;
    std::optional<Comparison> comparison;
    std::string error;  // non-empty when the dataset failed
    int error_code = 0;
};

struct BenchmarkOutcome {
    std::vector<DatasetOutcome> datasets;
    WinTieLoss tally;
    std::size_t corollary2_eligible = 0;
    std::size_t corollary2_violations = 0;
    int first_error_code = 0;
};

/// Runs every dataset and writes results.csv, bounds.csv, margins/*.csv and
/// summary.json under config.output_dir. Dataset failures are recorded and
/// the remaining datasets still run.
BenchmarkOutcome run_benchmark(const ExperimentConfig& config);

}  // namespace marginforge
