#include "marginforge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "marginforge/random.hpp"

namespace marginforge {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            out.emplace_back(was_quoted ? field : std::string(trim(field)));
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(c);
        }
    }
    out.emplace_back(was_quoted ? field : std::string(trim(field)));
    return out;
}

std::optional<double> parse_real(std::string_view token) {
    if (token.empty()) return std::nullopt;
    if (token.front() == '+') token.remove_prefix(1);
    double v = 0.0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

}  // namespace

Dataset::Dataset(std::string name, std::vector<Feature> features,
                 std::vector<std::vector<double>> columns, std::vector<std::string> labels)
    : name_(std::move(name)),
      features_(std::move(features)),
      columns_(std::move(columns)),
      labels_(std::move(labels)) {
    if (labels_.empty()) throw DataError("dataset '" + name_ + "' has no instances");
    if (columns_.size() != features_.size())
        throw DataError("dataset '" + name_ + "': column count does not match feature count");
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].size() != labels_.size())
            throw DataError("dataset '" + name_ + "': column " + features_[j].name +
                            " has the wrong length");
    }
}

FeatureVector Dataset::row(std::size_t i) const {
    FeatureVector x;
    x.reserve(arity());
    for (std::size_t j = 0; j < arity(); ++j) {
        if (features_[j].kind == FeatureKind::numeric) {
            x.emplace_back(columns_[j][i]);
        } else {
            x.emplace_back(features_[j].categories[static_cast<std::size_t>(columns_[j][i])]);
        }
    }
    return x;
}

std::map<std::string, std::size_t> Dataset::class_counts() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& label : labels_) ++counts[label];
    return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    std::vector<std::vector<double>> cols(arity());
    for (std::size_t j = 0; j < arity(); ++j) {
        cols[j].reserve(rows.size());
        for (auto i : rows) cols[j].push_back(columns_[j].at(i));
    }
    std::vector<std::string> labels;
    labels.reserve(rows.size());
    for (auto i : rows) labels.push_back(labels_.at(i));
    return Dataset(name_, features_, std::move(cols), std::move(labels));
}

CsvOptions load_schema(const std::filesystem::path& path, CsvOptions base) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read schema file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed schema file " + path.string() + ": " + e.what());
    }
    if (j.contains("label")) {
        base.label_name = j.at("label").get<std::string>();
        base.label_column.reset();
    }
    if (j.contains("categorical")) base.categorical = j.at("categorical").get<std::vector<std::string>>();
    return base;
}

Dataset parse_csv(std::istream& in, std::string name, const CsvOptions& options) {
    std::string line;
    std::vector<std::string> header;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (!trim(line).empty()) {
            header = split_record(line);
            break;
        }
    }
    if (header.empty()) throw DataError("'" + name + "': missing header row");

    std::size_t label_col = header.size() - 1;
    if (options.label_column) {
        label_col = *options.label_column;
        if (label_col >= header.size())
            throw DataError("'" + name + "': label column " + std::to_string(label_col) +
                            " out of range (" + std::to_string(header.size()) + " columns)");
    } else if (!options.label_name.empty()) {
        auto it = std::find(header.begin(), header.end(), options.label_name);
        if (it == header.end()) throw DataError("'" + name + "': no column named " + options.label_name);
        label_col = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::vector<std::string>> cells(header.size());
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto record = split_record(line);
        if (record.size() != header.size())
            throw DataError("'" + name + "' line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, found " +
                            std::to_string(record.size()));
        for (std::size_t j = 0; j < record.size(); ++j) cells[j].push_back(std::move(record[j]));
    }
    if (cells[label_col].empty()) throw DataError("'" + name + "': no data rows");

    const std::set<std::string> forced(options.categorical.begin(), options.categorical.end());
    const auto& missing = options.missing_token;
    const std::size_t m = cells[label_col].size();

    std::vector<std::string> labels = std::move(cells[label_col]);
    for (std::size_t i = 0; i < m; ++i) {
        if (labels[i] == missing || labels[i].empty())
            throw DataError("'" + name + "': missing label on data row " + std::to_string(i + 1));
    }

    std::vector<Feature> features;
    std::vector<std::vector<double>> columns;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == label_col) continue;
        const auto& tokens = cells[j];
        Feature f;
        f.name = header[j];

        std::vector<std::optional<double>> parsed(m);
        bool numeric = !forced.contains(f.name);
        std::size_t present = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (tokens[i] == missing || tokens[i].empty()) continue;
            ++present;
            if (numeric) {
                parsed[i] = parse_real(tokens[i]);
                if (!parsed[i]) numeric = false;
            }
        }
        if (present == 0)
            throw DataError("'" + name + "': column " + f.name + " is entirely missing");

        std::vector<double> col(m);
        if (numeric) {
            f.kind = FeatureKind::numeric;
            double sum = 0.0;
            for (const auto& v : parsed)
                if (v) sum += *v;
            const double mean = sum / static_cast<double>(present);
            for (std::size_t i = 0; i < m; ++i) col[i] = parsed[i] ? *parsed[i] : mean;
        } else {
            f.kind = FeatureKind::categorical;
            std::map<std::string, std::size_t> freq;
            for (const auto& t : tokens)
                if (t != missing && !t.empty()) ++freq[t];
            std::string mode;
            std::size_t best = 0;
            for (const auto& [token, count] : freq) {
                if (count > best) {
                    best = count;
                    mode = token;
                }
            }
            for (const auto& [token, count] : freq) f.categories.push_back(token);
            for (std::size_t i = 0; i < m; ++i) {
                const auto& t = (tokens[i] == missing || tokens[i].empty()) ? mode : tokens[i];
                auto it = std::lower_bound(f.categories.begin(), f.categories.end(), t);
                col[i] = static_cast<double>(it - f.categories.begin());
            }
        }
        features.push_back(std::move(f));
        columns.push_back(std::move(col));
    }
    return Dataset(std::move(name), std::move(features), std::move(columns), std::move(labels));
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read dataset file " + path.string());
    return parse_csv(in, path.stem().string(), options);
}

std::filesystem::path schema_sidecar(const std::filesystem::path& path) {
    auto p = path;
    p.replace_extension(".schema.json");
    return p;
}

Dataset load_dataset(const std::filesystem::path& path, CsvOptions options) {
    const auto sidecar = schema_sidecar(path);
    if (std::filesystem::exists(sidecar)) options = load_schema(sidecar, std::move(options));
    return load_csv(path, options);
}

Dataset load_csv(const std::filesystem::path& path, std::size_t label_column,
                 std::string_view missing_token) {
    CsvOptions options;
    options.label_column = label_column;
    options.missing_token = std::string(missing_token);
    return load_csv(path, options);
}

BinaryDataset::BinaryDataset(Dataset base, std::map<std::string, int> label_map)
    : base_(std::move(base)), label_map_(std::move(label_map)) {
    y_.reserve(base_.size());
    for (const auto& label : base_.labels()) {
        auto it = label_map_.find(label);
        if (it == label_map_.end()) throw DataError("class '" + label + "' missing from label map");
        if (it->second != 1 && it->second != -1)
            throw DataError("label map must send classes to -1 or +1");
        y_.push_back(it->second);
    }
}

std::size_t BinaryDataset::count(int label) const {
    return static_cast<std::size_t>(std::count(y_.begin(), y_.end(), label));
}

BinaryDataset BinaryDataset::subset(std::span<const std::size_t> rows) const {
    return BinaryDataset(base_.subset(rows), label_map_);
}

BinaryDataset binarize(const Dataset& d) {
    const auto counts = d.class_counts();
    if (counts.size() < 2)
        throw DataError("dataset '" + d.name() + "' has a single class; cannot binarize");

    std::vector<std::string> ids;
    std::vector<long long> sizes;
    for (const auto& [id, n] : counts) {
        ids.push_back(id);
        sizes.push_back(static_cast<long long>(n));
    }
    const std::size_t c = ids.size();
    const long long total = std::accumulate(sizes.begin(), sizes.end(), 0LL);
    std::vector<bool> positive(c, false);

    if (c <= kExhaustiveClassLimit) {
        // Class 0 (lexicographically smallest) is pinned to +1; among equally
        // balanced partitions the smallest mask wins.
        const std::uint32_t full = (1u << c) - 1;
        std::uint32_t best_mask = 1;
        long long best_diff = -1;
        for (std::uint32_t mask = 1; mask < full; mask += 2) {
            long long side = 0;
            for (std::size_t k = 0; k < c; ++k)
                if (mask & (1u << k)) side += sizes[k];
            const long long diff = std::llabs(2 * side - total);
            if (best_diff < 0 || diff < best_diff) {
                best_diff = diff;
                best_mask = mask;
            }
        }
        for (std::size_t k = 0; k < c; ++k) positive[k] = (best_mask >> k) & 1u;
    } else {
        std::vector<std::size_t> order(c);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
        long long pos = 0;
        long long neg = 0;
        for (auto k : order) {
            if (pos <= neg) {
                positive[k] = true;
                pos += sizes[k];
            } else {
                neg += sizes[k];
            }
        }
        if (!positive[0]) positive.flip();
    }

    std::map<std::string, int> label_map;
    for (std::size_t k = 0; k < c; ++k) label_map[ids[k]] = positive[k] ? 1 : -1;
    return BinaryDataset(d, std::move(label_map));
}

std::vector<std::size_t> SplitPlan::test_indices(std::size_t trial, std::size_t fold) const {
    std::vector<std::size_t> out;
    const auto& a = assignments.at(trial);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> SplitPlan::train_indices(std::size_t trial, std::size_t fold) const {
    std::vector<std::size_t> out;
    const auto& a = assignments.at(trial);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != fold) out.push_back(i);
    return out;
}

SplitPlan cv_splits(std::size_t m, std::size_t trials, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("cv_splits: folds must be at least 2");
    if (folds > m) throw std::invalid_argument("cv_splits: more folds than instances");
    if (trials < 1) throw std::invalid_argument("cv_splits: trials must be at least 1");

    SplitPlan plan{trials, folds, seed, m, {}};
    plan.assignments.resize(trials);
    std::vector<std::size_t> perm(m);
    for (std::size_t t = 0; t < trials; ++t) {
        std::iota(perm.begin(), perm.end(), 0);
        auto rng = make_rng(seed, t);
        for (std::size_t i = m - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(uniform_index(rng, i + 1));
            std::swap(perm[i], perm[j]);
        }
        auto& a = plan.assignments[t];
        a.assign(m, 0);
        for (std::size_t pos = 0; pos < m; ++pos)
            a[perm[pos]] = static_cast<std::uint32_t>(pos % folds);
    }
    return plan;
}

}  // namespace marginforge
