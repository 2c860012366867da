#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "marginforge/boost.hpp"
#include "marginforge/bounds.hpp"
#include "marginforge/dataset.hpp"
#include "marginforge/stump.hpp"

namespace marginforge {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double.
std::string format_real(double v);

/// Serialized classifier or dataset that does not match its counterpart.
class IncompatibleArtifacts : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Json to_json(const Stump& s);
Stump stump_from_json(const Json& j);

/// Everything needed to apply a saved classifier to a fresh dataset.
struct ClassifierArtifact {
    VotingClassifier classifier;
    std::map<std::string, int> label_map;
    std::vector<Feature> features;  // names, kinds, and category dictionaries
    Json config;                    // provenance echo
};

Json to_json(const ClassifierArtifact& a);
ClassifierArtifact artifact_from_json(const Json& j);
ClassifierArtifact read_artifact(const std::filesystem::path& path);

/// Throws IncompatibleArtifacts unless features (name and kind) and labels
/// line up. Returns the dataset binarized with the artifact's label map.
BinaryDataset align(const ClassifierArtifact& a, const Dataset& d);

/// Columns t,gamma,alpha_raw,alpha_used,rho,Z,train_error after a provenance line.
void write_trace_csv(std::ostream& out, const BoostTrace& trace, const Json& config);

Json to_json(const BoundReport& r);
Json to_json(const Corollary2Verdict& v);
/// Flat CSV header plus rows: name,value,raw_value,arg_kind,arg,rigorous,preconditions_hold.
void write_bounds_csv(std::ostream& out, const std::vector<BoundReport>& reports, const Json& config);

/// "# config: {...}" provenance line for CSV outputs.
void write_provenance(std::ostream& out, const Json& config);

/// Non-finite reals become JSON strings ("inf", "-inf", "nan").
Json real(double v);

}  // namespace marginforge
