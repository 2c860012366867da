#include "marginforge/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <system_error>

namespace marginforge {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Json real(double v) {
    if (std::isfinite(v)) return v;
    return format_real(v);
}

namespace {

const char* kind_name(StumpKind k) {
    switch (k) {
        case StumpKind::constant: return "constant";
        case StumpKind::threshold: return "threshold";
        case StumpKind::category: return "category";
    }
    return "?";
}

}  // namespace

Json to_json(const Stump& s) {
    Json j;
    j["feature"] = s.feature;
    j["kind"] = kind_name(s.kind);
    if (s.kind == StumpKind::threshold) j["threshold"] = s.threshold;
    if (s.kind == StumpKind::category) j["category"] = s.category;
    j["polarity"] = s.polarity;
    return j;
}

Stump stump_from_json(const Json& j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        const int polarity = j.at("polarity").get<int>();
        if (polarity != 1 && polarity != -1) throw IncompatibleArtifacts("stump polarity must be +1 or -1");
        if (kind == "constant") return Stump::constant(polarity);
        const auto feature = j.at("feature").get<std::size_t>();
        if (kind == "threshold") return Stump::at_most(feature, j.at("threshold").get<double>(), polarity);
        if (kind == "category") return Stump::equals(feature, j.at("category").get<std::string>(), polarity);
        throw IncompatibleArtifacts("unknown stump kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw IncompatibleArtifacts(std::string("malformed stump: ") + e.what());
    }
}

Json to_json(const ClassifierArtifact& a) {
    Json j;
    j["config"] = a.config;
    Json members = Json::array();
    for (const auto& m : a.classifier.members) members.push_back({{"stump", to_json(m.stump)}, {"alpha", m.alpha}});
    j["members"] = std::move(members);
    j["normalized"] = a.classifier.normalized;
    Json labels = Json::object();
    for (const auto& [k, v] : a.label_map) labels[k] = v;
    j["label_map"] = std::move(labels);
    Json features = Json::array();
    for (const auto& f : a.features) {
        Json fj{{"name", f.name}, {"kind", f.kind == FeatureKind::numeric ? "numeric" : "categorical"}};
        if (f.kind == FeatureKind::categorical) fj["categories"] = f.categories;
        features.push_back(std::move(fj));
    }
    j["features"] = std::move(features);
    return j;
}

ClassifierArtifact artifact_from_json(const Json& j) {
    ClassifierArtifact a;
    try {
        for (const auto& m : j.at("members"))
            a.classifier.members.push_back({stump_from_json(m.at("stump")), m.at("alpha").get<double>()});
        a.classifier.normalized = j.at("normalized").get<bool>();
        for (const auto& [k, v] : j.at("label_map").items()) a.label_map[k] = v.get<int>();
        for (const auto& fj : j.at("features")) {
            Feature f;
            f.name = fj.at("name").get<std::string>();
            const auto kind = fj.at("kind").get<std::string>();
            if (kind == "categorical") {
                f.kind = FeatureKind::categorical;
                f.categories = fj.value("categories", std::vector<std::string>{});
            } else if (kind != "numeric") {
                throw IncompatibleArtifacts("unknown feature kind '" + kind + "'");
            }
            a.features.push_back(std::move(f));
        }
        if (j.contains("config")) a.config = j.at("config");
    } catch (const nlohmann::json::exception& e) {
        throw IncompatibleArtifacts(std::string("malformed classifier: ") + e.what());
    }
    if (a.classifier.members.empty()) throw IncompatibleArtifacts("classifier has no members");
    for (const auto& m : a.classifier.members) {
        if (m.stump.kind != StumpKind::constant && m.stump.feature >= a.features.size())
            throw IncompatibleArtifacts("stump refers to feature " + std::to_string(m.stump.feature) +
                                        " beyond the recorded schema");
    }
    return a;
}

ClassifierArtifact read_artifact(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open classifier file " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IncompatibleArtifacts(path.string() + " is not valid JSON: " + e.what());
    }
    return artifact_from_json(j);
}

BinaryDataset align(const ClassifierArtifact& a, const Dataset& d) {
    if (d.arity() != a.features.size())
        throw IncompatibleArtifacts("classifier expects " + std::to_string(a.features.size()) + " features, dataset has " +
                                    std::to_string(d.arity()));
    for (std::size_t j = 0; j < d.arity(); ++j) {
        const auto& want = a.features[j];
        const auto& have = d.feature(j);
        if (want.name != have.name || want.kind != have.kind)
            throw IncompatibleArtifacts("feature " + std::to_string(j) + " mismatch: classifier has '" + want.name +
                                        "', dataset has '" + have.name + "'");
    }
    for (const auto& [label, count] : d.class_counts()) {
        (void)count;
        if (!a.label_map.count(label))
            throw IncompatibleArtifacts("dataset class '" + label + "' is unknown to the classifier");
    }
    return BinaryDataset(d, a.label_map);
}

void write_provenance(std::ostream& out, const Json& config) { out << "# config: " << config.dump() << '\n'; }

void write_trace_csv(std::ostream& out, const BoostTrace& trace, const Json& config) {
    write_provenance(out, config);
    out << "t,gamma,alpha_raw,alpha_used,rho,Z,train_error\n";
    for (const auto& r : trace.rounds) {
        out << r.t << ',' << format_real(r.gamma) << ',' << format_real(r.alpha_raw) << ',' << format_real(r.alpha_used)
            << ',' << format_real(r.rho) << ',' << format_real(r.z) << ',' << format_real(r.train_error) << '\n';
    }
}

Json to_json(const BoundReport& r) {
    Json j;
    j["name"] = r.name;
    j["value"] = real(r.value);
    if (r.raw_value != r.value) j["raw_value"] = real(r.raw_value);
    j["arg"] = r.arg ? real(*r.arg) : Json(nullptr);
    j["arg_kind"] = r.arg_kind;
    j["rigorous"] = r.rigorous;
    Json pre = Json::array();
    for (const auto& p : r.preconditions) pre.push_back({{"name", p.name}, {"satisfied", p.satisfied}, {"detail", p.detail}});
    j["preconditions"] = std::move(pre);
    Json inter = Json::object();
    for (const auto& [k, v] : r.intermediates) inter[k] = real(v);
    j["intermediates"] = std::move(inter);
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

Json to_json(const Corollary2Verdict& v) {
    Json checks = Json::array();
    for (const auto& p : v.checks) checks.push_back({{"name", p.name}, {"satisfied", p.satisfied}, {"detail", p.detail}});
    return Json{{"preconditions", v.preconditions},
                {"holds", v.holds},
                {"violation", v.preconditions && !v.holds},
                {"new_value", real(v.new_value)},
                {"breiman_value", real(v.breiman_value)},
                {"R", real(v.r)},
                {"penalty_at_theta1", real(v.penalty_at_theta1)},
                {"penalty_at_theta1_holds", v.penalty_at_theta1_holds},
                {"checks", std::move(checks)}};
}

void write_bounds_csv(std::ostream& out, const std::vector<BoundReport>& reports, const Json& config) {
    write_provenance(out, config);
    out << "name,value,raw_value,arg_kind,arg,rigorous,preconditions_hold\n";
    for (const auto& r : reports) {
        out << r.name << ',' << format_real(r.value) << ',' << format_real(r.raw_value) << ',' << r.arg_kind << ','
            << (r.arg ? format_real(*r.arg) : std::string()) << ',' << (r.rigorous ? 1 : 0) << ','
            << (r.preconditions_hold() ? 1 : 0) << '\n';
    }
}

}  // namespace marginforge
