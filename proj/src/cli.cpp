#include "marginforge/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "marginforge/bench.hpp"
#include "marginforge/bernstein.hpp"
#include "marginforge/boost.hpp"
#include "marginforge/bounds.hpp"
#include "marginforge/dataset.hpp"
#include "marginforge/margin.hpp"
#include "marginforge/report.hpp"
#include "marginforge/stump.hpp"

#ifndef MARGINFORGE_DATA_DIR
#define MARGINFORGE_DATA_DIR "data"
#endif

namespace marginforge {

namespace fs = std::filesystem;

namespace {

// Raised for option values CLI11 cannot validate on its own.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct DataOptions {
    std::string label;
    std::string missing = "?";
    std::string schema;

    Json echo() const {
        Json j{{"label", label}, {"missing", missing}};
        if (!schema.empty()) j["schema"] = schema;
        return j;
    }
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
    cmd->add_option("--label", o.label, "Label column: name or 0-based index (default: last column)");
    cmd->add_option("--missing", o.missing, "Missing-value token")->capture_default_str();
    cmd->add_option("--schema", o.schema, "Schema sidecar JSON (default: <stem>.schema.json when present)");
}

Dataset read_dataset(const std::string& path, const DataOptions& o) {
    if (!fs::exists(path)) throw DataError("dataset file not found: " + path);
    CsvOptions opts;
    opts.missing_token = o.missing;
    if (!o.label.empty()) {
        if (std::all_of(o.label.begin(), o.label.end(), [](unsigned char c) { return std::isdigit(c); }))
            opts.label_column = std::stoul(o.label);
        else
            opts.label_name = o.label;
    }
    if (!o.schema.empty()) return load_csv(path, load_schema(o.schema, opts));
    return load_dataset(path, opts);
}

ClassifierArtifact read_classifier(const std::string& path) {
    if (!fs::exists(path)) throw DataError("classifier file not found: " + path);
    return read_artifact(path);
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    f << text;
}

// Writes to `path`, or to `out` when no path was given.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty())
        out << text;
    else
        write_file(path, text);
}

bool ends_with_csv(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

// --- train --------------------------------------------------------------------------

struct TrainArgs {
    std::string dataset;
    std::string rule = "adaboost";
    std::size_t rounds = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string trace;
    bool no_clamp = false;
    DataOptions data;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err, int verbosity) {
    const auto rule = parse_rule(a.rule);
    if (!rule) throw UsageError("unknown rule '" + a.rule + "' (expected adaboost or arcgv)");
    if (a.rounds < 1) throw UsageError("--rounds must be >= 1");

    const auto data = read_dataset(a.dataset, a.data);
    const auto binary = binarize(data);
    BoostConfig bc;
    bc.rounds = a.rounds;
    bc.rule = *rule;
    bc.clamp_negative_alpha = !a.no_clamp;
    const auto result = run(binary, bc);

    ClassifierArtifact art;
    art.classifier = result.classifier;
    art.label_map = binary.label_map();
    art.features = data.features();
    art.config = Json{{"command", "train"},
                      {"dataset", a.dataset},
                      {"rule", to_string(*rule)},
                      {"rounds", a.rounds},
                      {"seed", a.seed},
                      {"clamp_negative_alpha", bc.clamp_negative_alpha},
                      {"data", a.data.echo()},
                      {"rounds_run", result.trace.rounds.size()},
                      {"stopped_early", result.trace.stopped_early},
                      {"clamped_rounds", result.trace.clamped_rounds}};

    std::ostringstream trace;
    write_trace_csv(trace, result.trace, art.config);
    const std::string model = to_json(art).dump(2) + "\n";
    if (a.out.empty()) {
        out << model;
    } else {
        write_file(fs::path(a.out) / "classifier.json", model);
        write_file(fs::path(a.out) / "trace.csv", trace.str());
    }
    if (!a.trace.empty()) write_file(a.trace, trace.str());
    if (verbosity > 0)
        err << "train: " << result.trace.rounds.size() << " rounds, final training error "
            << (result.trace.rounds.empty() ? 0.0 : result.trace.rounds.back().train_error) << '\n';
    return kExitOk;
}

// --- bounds / margins / compare ------------------------------------------------------

struct BoundsArgs {
    std::string classifier;
    std::string dataset;
    double delta = 0.05;
    std::string out;
    bool all_k = false;
    DataOptions data;
};

Json sweep_json(const BoundSweep& s, const MarginProfile& p) {
    Json bounds = Json::array();
    for (const auto& r : s.reports) bounds.push_back(to_json(r));
    const auto mo = moments(p);
    Json j{{"m", p.size()},
           {"h_size", s.h_size},
           {"margins", Json{{"min", p.min()}, {"max", p.max()}, {"mean", mo.mean}, {"variance", mo.variance}}},
           {"bounds", std::move(bounds)},
           {"corollary2", to_json(s.corollary2)},
           {"emargin_dominance", Json{{"k_evaluated", s.kth_evaluated}, {"violations", s.emargin_violations}}}};
    if (!s.kth_all.empty()) {
        Json all = Json::array();
        for (const auto& r : s.kth_all) all.push_back(to_json(r));
        j["kth_all"] = std::move(all);
    }
    return j;
}

int cmd_bounds(const BoundsArgs& a, std::ostream& out, std::ostream& err) {
    if (!(a.delta > 0.0 && a.delta < 1.0)) throw UsageError("--delta must lie in (0, 1)");
    const auto art = read_classifier(a.classifier);
    const auto data = read_dataset(a.dataset, a.data);
    const auto binary = align(art, data);
    const auto space = enumerate_hypotheses(binary);
    const auto p = profile(art.classifier, binary);
    const auto sweep = bound_sweep(p, static_cast<double>(space.size()), a.delta, a.all_k);

    const Json echo{{"command", "bounds"}, {"classifier", a.classifier}, {"dataset", a.dataset},
                    {"delta", a.delta},    {"data", a.data.echo()},       {"classifier_config", art.config}};
    if (ends_with_csv(a.out)) {
        std::ostringstream csv;
        write_bounds_csv(csv, sweep.reports, echo);
        emit(a.out, csv.str(), out);
    } else {
        Json j{{"config", echo}};
        j.update(sweep_json(sweep, p));
        emit(a.out, j.dump(2) + "\n", out);
    }
    if (sweep.corollary2_violation()) {
        err << "bounds: new bound " << sweep.corollary2.new_value << " exceeds the minimum-margin bound "
            << sweep.corollary2.breiman_value << " although every precondition holds\n";
        return kExitCorollaryViolation;
    }
    return kExitOk;
}

struct MarginsArgs {
    std::string classifier;
    std::string dataset;
    std::string out;
    DataOptions data;
};

int cmd_margins(const MarginsArgs& a, std::ostream& out) {
    const auto art = read_classifier(a.classifier);
    const auto data = read_dataset(a.dataset, a.data);
    const auto p = profile(art.classifier, align(art, data));
    std::ostringstream csv;
    write_provenance(csv, Json{{"command", "margins"}, {"classifier", a.classifier}, {"dataset", a.dataset},
                               {"data", a.data.echo()}});
    write_cdf_csv(csv, p);
    emit(a.out, csv.str(), out);
    return kExitOk;
}

struct CompareArgs {
    std::string first;
    std::string second;
    std::string dataset;
    double delta = 0.05;
    std::string out;
    DataOptions data;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
    if (!(a.delta > 0.0 && a.delta < 1.0)) throw UsageError("--delta must lie in (0, 1)");
    const auto fa = read_classifier(a.first);
    const auto fb = read_classifier(a.second);
    const auto data = read_dataset(a.dataset, a.data);
    const auto da = align(fa, data);
    const auto db = align(fb, data);
    if (da.label_map() != db.label_map()) throw IncompatibleArtifacts("the two classifiers use different label maps");
    const double h = static_cast<double>(enumerate_hypotheses(da).size());
    const auto pa = profile(fa.classifier, da);
    const auto pb = profile(fb.classifier, db);
    const auto sa = bound_sweep(pa, h, a.delta);
    const auto sb = bound_sweep(pb, h, a.delta);

    Json diff = Json::object();
    for (std::size_t i = 0; i < sa.reports.size(); ++i) diff[sa.reports[i].name] = real(sb.reports[i].value - sa.reports[i].value);
    const auto ma = moments(pa);
    const auto mb = moments(pb);
    Json j{{"config", Json{{"command", "compare"}, {"first", a.first}, {"second", a.second}, {"dataset", a.dataset},
                           {"delta", a.delta}, {"data", a.data.echo()}}},
           {"first", sweep_json(sa, pa)},
           {"second", sweep_json(sb, pb)},
           {"difference", Json{{"bounds", std::move(diff)},
                               {"min_margin", pb.min() - pa.min()},
                               {"average_margin", mb.mean - ma.mean},
                               {"margin_variance", mb.variance - ma.variance}}}};
    emit(a.out, j.dump(2) + "\n", out);
    return kExitOk;
}

// --- validate -------------------------------------------------------------------------

struct ValidateArgs {
    std::string suite;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::string classifier;
    std::string dataset;
    std::string out;
    DataOptions data;
};

Json coverage_json(const CoverageResult& r) {
    return Json{{"trials", r.trials},   {"violations", r.violations}, {"rate", r.empirical_rate},
                {"delta", r.target_delta}, {"mc_stderr", r.mc_stderr}, {"pass", r.pass()}};
}

const std::vector<Distribution>& grid_distributions() {
    static const std::vector<Distribution> d{Distribution::bernoulli(0.1), Distribution::bernoulli(0.5),
                                             Distribution::uniform()};
    return d;
}
constexpr std::size_t kGridM[] = {4, 30, 100};
constexpr double kGridDelta[] = {0.05, 0.2};

int cmd_validate(const ValidateArgs& a, std::size_t jobs, std::ostream& out, std::ostream& err) {
    const bool committee = a.suite == "committee";
    const std::size_t trials = a.trials ? a.trials : (committee ? 50000 : 20000);
    if (trials < kMinTrials)
        throw UsageError("--trials " + std::to_string(trials) + " is below the floor of " + std::to_string(kMinTrials));

    Json cells = Json::array();
    bool all_pass = true;
    std::uint64_t counter = 0;
    if (a.suite == "bernstein" || a.suite == "variance") {
        for (const auto& dist : grid_distributions()) {
            for (auto m : kGridM) {
                for (auto delta : kGridDelta) {
                    CoverageSettings s;
                    s.m = m;
                    s.delta = delta;
                    s.trials = trials;
                    s.seed = derive_seed(a.seed, counter++);
                    s.jobs = jobs;
                    Json cell{{"distribution", dist.name()}, {"m", m}, {"delta", delta}};
                    bool pass = false;
                    if (a.suite == "bernstein") {
                        const auto r = coverage_test(dist, s);
                        cell["upper"] = coverage_json(r.upper);
                        cell["lower"] = coverage_json(r.lower);
                        pass = r.pass();
                    } else {
                        const auto r = variance_concentration_test(dist, s);
                        cell["lower"] = coverage_json(r.lower);
                        cell["upper"] = coverage_json(r.upper);
                        cell["true_variance"] = r.true_variance;
                        cell["v_hat_mean"] = r.v_hat_mean;
                        cell["v_hat_stderr"] = r.v_hat_stderr;
                        cell["unbiased"] = r.unbiased();
                        pass = r.pass();
                    }
                    cell["pass"] = pass;
                    all_pass = all_pass && pass;
                    cells.push_back(std::move(cell));
                }
            }
        }
    } else if (committee) {
        const std::string data_path = a.dataset.empty() ? std::string(MARGINFORGE_DATA_DIR) + "/toy.csv" : a.dataset;
        const auto data = read_dataset(data_path, a.data);
        VotingClassifier f;
        BinaryDataset binary;
        if (a.classifier.empty()) {
            binary = binarize(data);
            BoostConfig bc;
            bc.rounds = 50;
            f = run(binary, bc).classifier;
        } else {
            const auto art = read_classifier(a.classifier);
            binary = align(art, data);
            f = art.classifier;
        }
        for (double t : {0.1, 0.25, 0.5}) {
            for (std::size_t n : {16, 64}) {
                const auto r = committee_tail_test(f, binary, n, t, trials, derive_seed(a.seed, counter++), jobs);
                Json cell{{"n", n}, {"t", t}, {"average_margin", r.average_margin}, {"bound", r.bound}};
                cell["result"] = coverage_json(r.result);
                cell["pass"] = r.result.pass();
                all_pass = all_pass && r.result.pass();
                cells.push_back(std::move(cell));
            }
        }
    } else {
        throw UsageError("unknown suite '" + a.suite + "'");
    }

    Json j{{"config", Json{{"command", "validate"}, {"suite", a.suite}, {"trials", trials}, {"seed", a.seed}}},
           {"cells", std::move(cells)},
           {"pass", all_pass}};
    emit(a.out, j.dump(2) + "\n", out);
    if (!all_pass) {
        err << "validate: coverage check failed in suite '" << a.suite << "'\n";
        return kExitCoverageFailure;
    }
    return kExitOk;
}

// --- benchmark ------------------------------------------------------------------------

struct BenchmarkArgs {
    std::string config;
    std::string out;
};

int cmd_benchmark(const BenchmarkArgs& a, std::size_t jobs, std::ostream& err) {
    auto config = load_config(a.config);
    if (jobs > 0) config.jobs = jobs;
    if (!a.out.empty()) config.output_dir = a.out;
    const auto outcome = run_benchmark(config);
    err << "benchmark: win/tie/loss " << outcome.tally.win << '/' << outcome.tally.tie << '/' << outcome.tally.loss
        << ", outputs in " << config.output_dir.string() << '\n';
    if (outcome.first_error_code != 0) return outcome.first_error_code;
    if (outcome.corollary2_violations > 0) {
        err << "benchmark: " << outcome.corollary2_violations << " violations of new <= breiman among "
            << outcome.corollary2_eligible << " eligible folds\n";
        return kExitCorollaryViolation;
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"marginforge: boosting and margin-theory lab"};
    app.require_subcommand(1);
    std::size_t jobs = 0;
    int verbosity = 0;
    app.add_option("--jobs,-j", jobs, "Worker threads (0: all cores)")->envname("MARGINFORGE_JOBS");
    app.add_flag("-v,--verbose", verbosity, "More diagnostics on stderr");

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Boost decision stumps on a dataset");
    c_train->add_option("dataset", train.dataset, "CSV dataset")->required();
    c_train->add_option("--rule", train.rule, "adaboost or arcgv")->capture_default_str();
    c_train->add_option("--rounds,-T", train.rounds, "Boosting rounds")->capture_default_str();
    c_train->add_option("--seed", train.seed, "Seed (recorded for provenance)")->capture_default_str();
    c_train->add_option("--out,-o", train.out, "Output directory for classifier.json and trace.csv");
    c_train->add_option("--trace", train.trace, "Also write the trace CSV here");
    c_train->add_flag("--no-clamp", train.no_clamp, "Keep negative arc-gv steps");
    add_data_options(c_train, train.data);

    BoundsArgs bounds;
    auto* c_bounds = app.add_subcommand("bounds", "Evaluate every generalization bound for a classifier");
    c_bounds->add_option("classifier", bounds.classifier, "Classifier JSON")->required();
    c_bounds->add_option("dataset", bounds.dataset, "Training sample CSV")->required();
    c_bounds->add_option("--delta", bounds.delta, "Confidence parameter")->capture_default_str();
    c_bounds->add_option("--out,-o", bounds.out, "Output file (.json or .csv)");
    c_bounds->add_flag("--all-k", bounds.all_k, "Include the k-th margin bound for every positive k");
    add_data_options(c_bounds, bounds.data);

    MarginsArgs margins;
    auto* c_margins = app.add_subcommand("margins", "Export the margin CDF");
    c_margins->add_option("classifier", margins.classifier, "Classifier JSON")->required();
    c_margins->add_option("dataset", margins.dataset, "Dataset CSV")->required();
    c_margins->add_option("--out,-o", margins.out, "Output CSV");
    add_data_options(c_margins, margins.data);

    ValidateArgs validate;
    auto* c_validate = app.add_subcommand("validate", "Monte Carlo certification of the concentration results");
    c_validate->add_option("--suite", validate.suite, "bernstein, variance or committee")
        ->required()
        ->check(CLI::IsMember({"bernstein", "variance", "committee"}));
    c_validate->add_option("--trials", validate.trials, "Trials per cell (default 20000; committee 50000)");
    c_validate->add_option("--seed", validate.seed, "Master seed")->capture_default_str();
    c_validate->add_option("--classifier", validate.classifier, "Committee suite: classifier JSON");
    c_validate->add_option("--dataset", validate.dataset, "Committee suite: dataset CSV (default: shipped toy)");
    c_validate->add_option("--out,-o", validate.out, "Output JSON");
    add_data_options(c_validate, validate.data);

    BenchmarkArgs bench;
    auto* c_bench = app.add_subcommand("benchmark", "Cross-validated AdaBoost versus arc-gv comparison");
    c_bench->add_option("config", bench.config, "Experiment config JSON")->required();
    c_bench->add_option("--out,-o", bench.out, "Override the config's output_dir");

    CompareArgs compare;
    auto* c_compare = app.add_subcommand("compare", "Bound and margin differences between two classifiers");
    c_compare->add_option("first", compare.first, "Classifier JSON")->required();
    c_compare->add_option("second", compare.second, "Classifier JSON")->required();
    c_compare->add_option("dataset", compare.dataset, "Dataset CSV")->required();
    c_compare->add_option("--delta", compare.delta, "Confidence parameter")->capture_default_str();
    c_compare->add_option("--out,-o", compare.out, "Output JSON");
    add_data_options(c_compare, compare.data);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalidConfig;
    }

    try {
        if (c_train->parsed()) return cmd_train(train, out, err, verbosity);
        if (c_bounds->parsed()) return cmd_bounds(bounds, out, err);
        if (c_margins->parsed()) return cmd_margins(margins, out);
        if (c_validate->parsed()) return cmd_validate(validate, jobs, out, err);
        if (c_bench->parsed()) return cmd_benchmark(bench, jobs, err);
        if (c_compare->parsed()) return cmd_compare(compare, out);
    } catch (const IncompatibleArtifacts& e) {
        err << "error: " << e.what() << '\n';
        return kExitIncompatible;
    } catch (const ArityError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIncompatible;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    } catch (const TrainingError& e) {
        err << "error: " << e.what() << '\n';
        return kExitTrainingFailure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalidConfig;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitInvalidConfig;
}

}  // namespace marginforge
