#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace marginforge {

/// Raised for anything wrong with input data: unreadable files, ragged rows,
/// unusable columns, invalid label structure.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FeatureKind { numeric, categorical };

struct Feature {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    // Sorted category dictionary; the code of a category is its index here.
    std::vector<std::string> categories;
};

/// One feature value of a single instance.
using Value = std::variant<double, std::string>;
using FeatureVector = std::vector<Value>;

/// Columnar labelled sample. Numeric columns hold reals; categorical columns
/// hold category codes (as doubles) into Feature::categories.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::string name, std::vector<Feature> features,
            std::vector<std::vector<double>> columns, std::vector<std::string> labels);

    const std::string& name() const { return name_; }
    std::size_t size() const { return labels_.size(); }
    std::size_t arity() const { return features_.size(); }

    const std::vector<Feature>& features() const { return features_; }
    const Feature& feature(std::size_t j) const { return features_.at(j); }
    std::span<const double> column(std::size_t j) const { return columns_.at(j); }
    double value(std::size_t j, std::size_t i) const { return columns_[j][i]; }
    const std::vector<std::string>& labels() const { return labels_; }

    FeatureVector row(std::size_t i) const;

    /// Sorted distinct class identifiers with their instance counts.
    std::map<std::string, std::size_t> class_counts() const;

    /// Rows in the given order; dictionaries are shared with the parent.
    Dataset subset(std::span<const std::size_t> rows) const;

private:
    std::string name_;
    std::vector<Feature> features_;
    std::vector<std::vector<double>> columns_;
    std::vector<std::string> labels_;
};

struct CsvOptions {
    // Label column by index; when unset, label_name is used, else the last column.
    std::optional<std::size_t> label_column;
    std::string label_name;
    std::string missing_token = "?";
    // Columns forced categorical regardless of syntax.
    std::vector<std::string> categorical;
};

/// Reads the optional schema sidecar {"label": name, "categorical": [names]}
/// into the matching CsvOptions fields.
CsvOptions load_schema(const std::filesystem::path& path, CsvOptions base = {});

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset load_csv(const std::filesystem::path& path, std::size_t label_column,
                 std::string_view missing_token = "?");
/// "<dir>/<stem>.schema.json" next to a data file.
std::filesystem::path schema_sidecar(const std::filesystem::path& path);
/// load_csv, applying the schema sidecar on top of `options` when one exists.
Dataset load_dataset(const std::filesystem::path& path, CsvOptions options = {});
Dataset parse_csv(std::istream& in, std::string name, const CsvOptions& options = {});

/// Two-class view of a dataset with labels mapped to {-1, +1}.
class BinaryDataset {
public:
    BinaryDataset() = default;
    BinaryDataset(Dataset base, std::map<std::string, int> label_map);

    const Dataset& base() const { return base_; }
    const std::map<std::string, int>& label_map() const { return label_map_; }
    std::span<const int> y() const { return y_; }
    int y(std::size_t i) const { return y_[i]; }
    std::size_t size() const { return y_.size(); }
    std::size_t count(int label) const;
    bool has_both_classes() const { return count(1) > 0 && count(-1) > 0; }

    BinaryDataset subset(std::span<const std::size_t> rows) const;

private:
    Dataset base_;
    std::map<std::string, int> label_map_;
    std::vector<int> y_;
};

/// Splits the classes into two meta-classes of near-equal total size.
BinaryDataset binarize(const Dataset& d);

/// Largest class count for which binarize searches partitions exhaustively.
inline constexpr std::size_t kExhaustiveClassLimit = 12;

struct SplitPlan {
    std::size_t trials = 0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    std::size_t m = 0;
    // assignments[trial][instance] = fold index.
    std::vector<std::vector<std::uint32_t>> assignments;

    std::vector<std::size_t> test_indices(std::size_t trial, std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t trial, std::size_t fold) const;

    bool operator==(const SplitPlan&) const = default;
};

SplitPlan cv_splits(std::size_t m, std::size_t trials, std::size_t folds, std::uint64_t seed);
inline SplitPlan cv_splits(const BinaryDataset& d, std::size_t trials, std::size_t folds,
                           std::uint64_t seed) {
    return cv_splits(d.size(), trials, folds, seed);
}

}  // namespace marginforge
