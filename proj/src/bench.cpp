#include "marginforge/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "marginforge/margin.hpp"
#include "marginforge/parallel.hpp"
#include "marginforge/stump.hpp"

namespace marginforge {

namespace fs = std::filesystem;

// --- config -------------------------------------------------------------------------

void ExperimentConfig::validate(bool need_datasets) const {
    if (need_datasets && datasets.empty()) throw ConfigError("config lists no datasets");
    if (rounds < 1) throw ConfigError("T must be >= 1");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (algorithms.empty()) throw ConfigError("config lists no algorithms");
}

ExperimentConfig config_from_json(const Json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::array<const char*, 9> known{"datasets", "T", "trials", "folds", "seed",
                                                  "delta", "algorithms", "output_dir", "jobs"};
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key '" + key + "'");
    }
    ExperimentConfig c;
    if (!j.contains("datasets") || !j["datasets"].is_array())
        throw ConfigError("config key 'datasets' must be a list of paths");
    try {
        for (const auto& p : j.at("datasets")) {
            fs::path path = p.get<std::string>();
            c.datasets.push_back(path.is_absolute() ? path : (base_dir / path).lexically_normal());
        }
        c.rounds = j.value("T", c.rounds);
        c.trials = j.value("trials", c.trials);
        c.folds = j.value("folds", c.folds);
        c.seed = j.value("seed", c.seed);
        c.delta = j.value("delta", c.delta);
        c.jobs = j.value("jobs", c.jobs);
        if (j.contains("algorithms")) {
            c.algorithms.clear();
            for (const auto& a : j.at("algorithms")) {
                const auto name = a.get<std::string>();
                const auto rule = parse_rule(name);
                if (!rule) throw ConfigError("unknown algorithm '" + name + "'");
                c.algorithms.push_back(*rule);
            }
        }
        if (j.contains("output_dir")) {
            fs::path out = j.at("output_dir").get<std::string>();
            c.output_dir = out.is_absolute() ? out : (base_dir / out).lexically_normal();
        } else {
            c.output_dir = (base_dir / c.output_dir).lexically_normal();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

Json to_json(const ExperimentConfig& c) {
    Json datasets = Json::array();
    for (const auto& p : c.datasets) datasets.push_back(p.string());
    Json algorithms = Json::array();
    for (auto r : c.algorithms) algorithms.push_back(to_string(r));
    return Json{{"datasets", std::move(datasets)}, {"T", c.rounds},       {"trials", c.trials},
                {"folds", c.folds},                {"seed", c.seed},      {"delta", c.delta},
                {"algorithms", std::move(algorithms)}, {"output_dir", c.output_dir.string()}};
}

// --- bound sweep -----------------------------------------------------------------------

const BoundReport& BoundSweep::get(const std::string& name) const {
    for (const auto& r : reports)
        if (r.name == name) return r;
    throw std::out_of_range("no bound named '" + name + "' in sweep");
}

BoundSweep bound_sweep(const MarginProfile& p, double h_size, double delta, bool keep_kth_all) {
    BoundInputs in{h_size, delta, p};
    BoundSweep s;
    s.h_size = h_size;
    const auto emargin = bound_emargin(in);

    std::optional<BoundReport> best_kth;
    for (std::size_t k = 1; k <= p.size(); ++k) {
        if (!(kth_margin(p, k) > 0.0)) continue;
        auto r = bound_kth(in, k);
        ++s.kth_evaluated;
        if (r.value < emargin.value) {
            ++s.emargin_violations;
            s.emargin_violations_gated += r.preconditions_hold();
        }
        if (!best_kth || r.value < best_kth->value) best_kth = r;
        if (keep_kth_all) s.kth_all.push_back(std::move(r));
    }
    if (!best_kth) {
        // No positive margin at all: report k = 1, which is +infinity with its gate failed.
        best_kth = bound_kth(in, 1);
    }

    s.reports.push_back(bound_breiman(in));
    s.reports.push_back(*best_kth);
    s.reports.push_back(emargin);
    s.reports.push_back(bound_new(in));
    s.reports.push_back(bound_lower(in));
    s.reports.push_back(bound_distribution(in));
    s.reports.push_back(bound_schapire_index(in));
    s.corollary2 = check_corollary2(in);
    return s;
}

BoundSweep bound_sweep(const VotingClassifier& f, const BinaryDataset& d, double h_size, double delta,
                       bool keep_kth_all) {
    return bound_sweep(profile(f, d), h_size, delta, keep_kth_all);
}

// --- experiment ------------------------------------------------------------------------

std::vector<double> RunResult::errors() const {
    std::vector<double> e;
    e.reserve(folds.size());
    for (const auto& f : folds) e.push_back(f.test_error);
    return e;
}

const RunResult* ExperimentResult::run(Rule r) const {
    for (const auto& run : runs)
        if (run.algorithm == r) return &run;
    return nullptr;
}

std::pair<double, double> mean_std(std::span<const double> v) {
    if (v.empty()) return {0.0, 0.0};
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

namespace {

double error_rate(const VotingClassifier& f, const BinaryDataset& d) {
    std::vector<double> score(d.size(), 0.0);
    for (const auto& m : f.members) {
        const auto h = predict_all(m.stump, d.base());
        for (std::size_t i = 0; i < score.size(); ++i) score[i] += m.alpha * h[i];
    }
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < score.size(); ++i)
        if ((score[i] > 0.0 ? 1 : -1) != d.y(i)) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(d.size());
}

}  // namespace

ExperimentResult run_experiment(const BinaryDataset& d, const ExperimentConfig& config) {
    config.validate(false);
    ExperimentResult out;
    out.dataset = d.base().name();
    out.m = d.size();
    out.plan = cv_splits(d, config.trials, config.folds, config.seed);

    const std::size_t cells = config.trials * config.folds;
    const std::size_t algos = config.algorithms.size();

    struct Cell {
        bool skipped = false;
        std::string reason;
        std::vector<FoldRun> runs;
    };
    std::vector<Cell> cells_out(cells);

    parallel_for(cells, config.jobs, [&](std::size_t c) {
        const std::size_t trial = c / config.folds;
        const std::size_t fold = c % config.folds;
        auto& cell = cells_out[c];
        const auto train = d.subset(out.plan.train_indices(trial, fold));
        const auto test = d.subset(out.plan.test_indices(trial, fold));
        if (!train.has_both_classes()) {
            cell.skipped = true;
            cell.reason = "training split holds a single class";
            return;
        }
        const HypothesisSpace space(train);
        for (std::size_t a = 0; a < algos; ++a) {
            BoostConfig bc;
            bc.rounds = config.rounds;
            bc.rule = config.algorithms[a];
            FoldRun r;
            r.trial = trial;
            r.fold = fold;
            r.train_size = train.size();
            r.test_size = test.size();
            r.h_size = space.size();
            try {
                const auto result = run(train, space, bc);
                const auto p = profile(result.classifier, train);
                r.test_error = error_rate(result.classifier, test);
                r.train_error = result.trace.rounds.empty() ? 0.0 : result.trace.rounds.back().train_error;
                r.min_margin = p.min();
                r.average_margin = moments(p).mean;
                r.bounds = bound_sweep(p, static_cast<double>(space.size()), config.delta);
            } catch (const TrainingError& e) {
                cell.skipped = true;
                cell.reason = std::string(to_string(bc.rule)) + " failed: " + e.what();
                cell.runs.clear();
                return;
            }
            cell.runs.push_back(std::move(r));
        }
    });

    out.runs.resize(algos);
    for (std::size_t a = 0; a < algos; ++a) {
        out.runs[a].dataset = out.dataset;
        out.runs[a].algorithm = config.algorithms[a];
    }
    for (std::size_t c = 0; c < cells; ++c) {
        auto& cell = cells_out[c];
        if (cell.skipped) {
            out.skipped.push_back({c / config.folds, c % config.folds, cell.reason});
            continue;
        }
        for (std::size_t a = 0; a < algos; ++a) out.runs[a].folds.push_back(std::move(cell.runs[a]));
    }
    for (auto& r : out.runs) {
        const auto e = r.errors();
        std::tie(r.mean, r.std) = mean_std(e);
    }
    return out;
}

// --- significance ---------------------------------------------------------------------

std::string to_string(Winner w) {
    switch (w) {
        case Winner::adaboost: return "adaboost";
        case Winner::arcgv: return "arcgv";
        case Winner::tie: return "tie";
    }
    return "?";
}

namespace {

// Two-sided 95% quantiles t_{0.975, df} for df = 1..200.
constexpr std::array<double, 200> kTTable{
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582,
    2.446912, 2.364624, 2.306004, 2.262157, 2.228139,
    2.200985, 2.178813, 2.160369, 2.144787, 2.131450,
    2.119905, 2.109816, 2.100922, 2.093024, 2.085963,
    2.079614, 2.073873, 2.068658, 2.063899, 2.059539,
    2.055529, 2.051831, 2.048407, 2.045230, 2.042272,
    2.039513, 2.036933, 2.034515, 2.032245, 2.030108,
    2.028094, 2.026192, 2.024394, 2.022691, 2.021075,
    2.019541, 2.018082, 2.016692, 2.015368, 2.014103,
    2.012896, 2.011741, 2.010635, 2.009575, 2.008559,
    2.007584, 2.006647, 2.005746, 2.004879, 2.004045,
    2.003241, 2.002465, 2.001717, 2.000995, 2.000298,
    1.999624, 1.998972, 1.998341, 1.997730, 1.997138,
    1.996564, 1.996008, 1.995469, 1.994945, 1.994437,
    1.993943, 1.993464, 1.992997, 1.992543, 1.992102,
    1.991673, 1.991254, 1.990847, 1.990450, 1.990063,
    1.989686, 1.989319, 1.988960, 1.988610, 1.988268,
    1.987934, 1.987608, 1.987290, 1.986979, 1.986675,
    1.986377, 1.986086, 1.985802, 1.985523, 1.985251,
    1.984984, 1.984723, 1.984467, 1.984217, 1.983972,
    1.983731, 1.983495, 1.983264, 1.983038, 1.982815,
    1.982597, 1.982383, 1.982173, 1.981967, 1.981765,
    1.981567, 1.981372, 1.981180, 1.980992, 1.980808,
    1.980626, 1.980448, 1.980272, 1.980100, 1.979930,
    1.979764, 1.979600, 1.979439, 1.979280, 1.979124,
    1.978971, 1.978820, 1.978671, 1.978524, 1.978380,
    1.978239, 1.978099, 1.977961, 1.977826, 1.977692,
    1.977561, 1.977431, 1.977304, 1.977178, 1.977054,
    1.976931, 1.976811, 1.976692, 1.976575, 1.976460,
    1.976346, 1.976233, 1.976122, 1.976013, 1.975905,
    1.975799, 1.975694, 1.975590, 1.975488, 1.975387,
    1.975288, 1.975189, 1.975092, 1.974996, 1.974902,
    1.974808, 1.974716, 1.974625, 1.974535, 1.974446,
    1.974358, 1.974271, 1.974185, 1.974100, 1.974017,
    1.973934, 1.973852, 1.973771, 1.973691, 1.973612,
    1.973534, 1.973457, 1.973381, 1.973305, 1.973231,
    1.973157, 1.973084, 1.973012, 1.972941, 1.972870,
    1.972800, 1.972731, 1.972663, 1.972595, 1.972528,
    1.972462, 1.972396, 1.972332, 1.972268, 1.972204,
    1.972141, 1.972079, 1.972017, 1.971957, 1.971896,
};

constexpr double kNormal975 = 1.959964;

}  // namespace

double t_critical_95(std::size_t df) {
    if (df < 1) throw std::invalid_argument("t critical value needs df >= 1");
    return df <= kTTable.size() ? kTTable[df - 1] : kNormal975;
}

Comparison paired_t_test(std::span<const double> a, std::span<const double> b, std::string dataset) {
    if (a.size() != b.size()) throw std::invalid_argument("paired t-test needs equal-length samples");
    if (a.size() < 2) throw std::invalid_argument("paired t-test needs n >= 2");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const auto [mean, sd] = mean_std(diff);

    Comparison c;
    c.dataset = std::move(dataset);
    c.n = a.size();
    c.mean_difference = mean;
    c.critical_value = t_critical_95(c.n - 1);
    if (sd == 0.0) {
        if (mean == 0.0) {
            c.t_statistic = 0.0;
            c.winner = Winner::tie;
        } else {
            c.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            c.winner = mean < 0 ? Winner::adaboost : Winner::arcgv;
        }
        return c;
    }
    c.t_statistic = mean / (sd / std::sqrt(static_cast<double>(c.n)));
    if (std::abs(c.t_statistic) <= c.critical_value)
        c.winner = Winner::tie;
    else
        c.winner = c.t_statistic < 0 ? Winner::adaboost : Winner::arcgv;
    return c;
}

WinTieLoss win_tie_loss(std::span<const Winner> winners) {
    WinTieLoss w;
    for (auto x : winners) {
        if (x == Winner::adaboost)
            ++w.win;
        else if (x == Winner::arcgv)
            ++w.loss;
        else
            ++w.tie;
    }
    return w;
}

WinTieLoss win_tie_loss(std::span<const Comparison> comparisons) {
    std::vector<Winner> w;
    w.reserve(comparisons.size());
    for (const auto& c : comparisons) w.push_back(c.winner);
    return win_tie_loss(w);
}

// --- benchmark --------------------------------------------------------------------------

namespace {

std::string slug(const std::string& s) {
    std::string out;
    for (char ch : s) out.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_');
    return out;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
}

Json fold_summary(const ExperimentResult& r, const RunResult& run) {
    std::size_t eligible = 0, violations = 0, emargin_violations = 0, lower_over_test = 0, lower_over_upper = 0;
    for (const auto& f : run.folds) {
        if (f.bounds.corollary2.preconditions) ++eligible;
        if (f.bounds.corollary2_violation()) ++violations;
        emargin_violations += f.bounds.emargin_violations;
        const double lower = f.bounds.get("lower").value;
        if (lower > f.test_error + 0.05) ++lower_over_test;
        for (const auto& b : f.bounds.reports)
            if (b.name != "lower" && b.rigorous && lower > b.value) ++lower_over_upper;
    }
    std::vector<double> minm, avgm;
    for (const auto& f : run.folds) {
        minm.push_back(f.min_margin);
        avgm.push_back(f.average_margin);
    }
    (void)r;
    return Json{{"mean", run.mean},
                {"std", run.std},
                {"folds", run.folds.size()},
                {"mean_min_margin", mean_std(minm).first},
                {"mean_average_margin", mean_std(avgm).first},
                {"corollary2_eligible", eligible},
                {"corollary2_violations", violations},
                {"emargin_dominance_violations", emargin_violations},
                {"lower_above_test_error_plus_0.05", lower_over_test},
                {"lower_above_rigorous_upper", lower_over_upper}};
}

}  // namespace

BenchmarkOutcome run_benchmark(const ExperimentConfig& config) {
    config.validate();
    const Json echo = to_json(config);
    BenchmarkOutcome outcome;

    fs::create_directories(config.output_dir / "margins");
    auto results_csv = open_out(config.output_dir / "results.csv");
    auto bounds_csv = open_out(config.output_dir / "bounds.csv");
    write_provenance(results_csv, echo);
    write_provenance(bounds_csv, echo);
    results_csv << "dataset,algorithm,mean,std,folds,winner,win\n";
    bounds_csv << "dataset,algorithm,trial,fold,bound,value,arg,rigorous\n";

    Json datasets = Json::array();
    std::vector<Comparison> comparisons;

    for (const auto& path : config.datasets) {
        DatasetOutcome d;
        d.path = path;
        Json entry{{"path", path.string()}};
        try {
            const auto data = load_dataset(path);
            const auto binary = binarize(data);
            auto result = run_experiment(binary, config);
            entry["name"] = result.dataset;
            entry["m"] = result.m;

            const auto* ada = result.run(Rule::adaboost);
            const auto* arc = result.run(Rule::arcgv);
            if (ada && arc && ada->folds.size() >= 2) {
                d.comparison = paired_t_test(ada->errors(), arc->errors(), result.dataset);
                comparisons.push_back(*d.comparison);
                entry["comparison"] = Json{{"winner", to_string(d.comparison->winner)},
                                           {"t_statistic", real(d.comparison->t_statistic)},
                                           {"critical_value", d.comparison->critical_value},
                                           {"n", d.comparison->n},
                                           {"mean_difference", d.comparison->mean_difference}};
            }
            const std::string winner = d.comparison ? to_string(d.comparison->winner) : "n/a";

            Json algos = Json::object();
            for (const auto& run : result.runs) {
                const bool won = d.comparison && to_string(d.comparison->winner) == to_string(run.algorithm);
                results_csv << result.dataset << ',' << to_string(run.algorithm) << ',' << format_real(run.mean) << ','
                            << format_real(run.std) << ',' << run.folds.size() << ',' << winner << ','
                            << (won ? "*" : "") << '\n';
                for (const auto& f : run.folds) {
                    for (const auto& b : f.bounds.reports) {
                        bounds_csv << result.dataset << ',' << to_string(run.algorithm) << ',' << f.trial << ','
                                   << f.fold << ',' << b.name << ',' << format_real(b.value) << ','
                                   << (b.arg ? format_real(*b.arg) : std::string()) << ',' << (b.rigorous ? 1 : 0)
                                   << '\n';
                    }
                    if (f.bounds.corollary2.preconditions) ++outcome.corollary2_eligible;
                    if (f.bounds.corollary2_violation()) ++outcome.corollary2_violations;
                }
                algos[to_string(run.algorithm)] = fold_summary(result, run);
            }
            entry["algorithms"] = std::move(algos);
            Json skipped = Json::array();
            for (const auto& s : result.skipped)
                skipped.push_back({{"trial", s.trial}, {"fold", s.fold}, {"reason", s.reason}});
            entry["skipped_folds"] = std::move(skipped);

            // Margin distributions of classifiers trained on the whole dataset.
            for (auto rule : config.algorithms) {
                BoostConfig bc;
                bc.rounds = config.rounds;
                bc.rule = rule;
                const auto trained = run(binary, bc);
                auto f = open_out(config.output_dir / "margins" /
                                  (slug(result.dataset) + "_" + to_string(rule) + ".csv"));
                write_provenance(f, echo);
                write_cdf_csv(f, profile(trained.classifier, binary));
            }
            d.result = std::move(result);
        } catch (const DataError& e) {
            d.error = e.what();
            d.error_code = 3;
        } catch (const TrainingError& e) {
            d.error = e.what();
            d.error_code = 4;
        }
        if (!d.error.empty()) {
            std::cerr << "benchmark: " << path.string() << ": " << d.error << '\n';
            entry["error"] = d.error;
            entry["exit_code"] = d.error_code;
            if (outcome.first_error_code == 0) outcome.first_error_code = d.error_code;
        }
        datasets.push_back(std::move(entry));
        outcome.datasets.push_back(std::move(d));
    }

    outcome.tally = win_tie_loss(comparisons);
    Json summary{{"config", echo},
                 {"datasets", std::move(datasets)},
                 {"win_tie_loss", Json{{"win", outcome.tally.win}, {"tie", outcome.tally.tie}, {"loss", outcome.tally.loss}}},
                 {"corollary2", Json{{"eligible_folds", outcome.corollary2_eligible},
                                     {"violations", outcome.corollary2_violations}}}};
    auto summary_json = open_out(config.output_dir / "summary.json");
    summary_json << summary.dump(2) << '\n';
    return outcome;
}

}  // namespace marginforge
