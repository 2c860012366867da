#pragma once

// Small builders shared by the unit tests.

#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "marginforge/dataset.hpp"
#include "marginforge/margin.hpp"
#include "marginforge/random.hpp"

namespace mf_test {

using namespace marginforge;

inline std::filesystem::path data_dir() { return MARGINFORGE_DATA_DIR; }
inline std::filesystem::path source_dir() { return MARGINFORGE_SOURCE_DIR; }

inline Dataset csv(const std::string& text, const CsvOptions& options = {}) {
    std::istringstream in(text);
    return parse_csv(in, "inline", options);
}

/// All-numeric dataset; columns[j][i] is feature j of instance i.
inline Dataset numeric(std::vector<std::vector<double>> columns, std::vector<std::string> labels) {
    std::vector<Feature> features;
    for (std::size_t j = 0; j < columns.size(); ++j) features.push_back({"f" + std::to_string(j), FeatureKind::numeric, {}});
    return Dataset("numeric", std::move(features), std::move(columns), std::move(labels));
}

/// Labels "+" and "-" mapped to +1 and -1.
inline BinaryDataset signed_data(std::vector<std::vector<double>> columns, const std::vector<int>& y) {
    std::vector<std::string> labels;
    for (int v : y) labels.push_back(v > 0 ? "+" : "-");
    return BinaryDataset(numeric(std::move(columns), std::move(labels)), {{"+", 1}, {"-", -1}});
}

/// Random mixed-type binary dataset: `numeric_features` columns with values on
/// a coarse grid (so ties occur) and `categorical_features` columns over
/// `categories` tokens.
inline BinaryDataset random_binary(std::uint64_t seed, std::size_t m, std::size_t numeric_features,
                                   std::size_t categorical_features, std::size_t categories = 3) {
    auto rng = make_rng(seed, 0);
    std::ostringstream text;
    for (std::size_t j = 0; j < numeric_features; ++j) text << "n" << j << ',';
    for (std::size_t j = 0; j < categorical_features; ++j) text << "c" << j << ',';
    text << "class\n";
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < numeric_features; ++j) text << static_cast<double>(uniform_index(rng, 8)) / 2.0 << ',';
        for (std::size_t j = 0; j < categorical_features; ++j) text << "k" << uniform_index(rng, categories) << ',';
        // Guarantee both classes.
        const bool pos = i == 0 ? true : (i == 1 ? false : uniform01(rng) < 0.5);
        text << (pos ? "a" : "b") << '\n';
    }
    std::istringstream in(text.str());
    CsvOptions opts;
    for (std::size_t j = 0; j < categorical_features; ++j) opts.categorical.push_back("c" + std::to_string(j));
    return binarize(parse_csv(in, "random", opts));
}

/// Uniform random margins in [lo, hi].
inline MarginProfile random_profile(Rng& rng, std::size_t m, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(m);
    for (double& x : v) x = lo + (hi - lo) * uniform01(rng);
    return MarginProfile(std::move(v));
}

/// Dyadic probability vector (exactly representable partial sums).
inline std::vector<double> dyadic_weights(Rng& rng, std::size_t m) {
    std::vector<std::uint64_t> raw(m);
    std::uint64_t total = 0;
    for (auto& r : raw) {
        r = uniform_index(rng, 16);
        total += r;
    }
    if (total == 0) {
        raw[0] = 1;
        total = 1;
    }
    // Scale into 2^-20 units.
    std::vector<double> w(m);
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::uint64_t units = raw[i] * (1u << 20) / total;
        w[i] = static_cast<double>(units);
        assigned += units;
    }
    w[0] += static_cast<double>((1u << 20) - assigned);
    for (double& x : w) x /= static_cast<double>(1u << 20);
    return w;
}

}  // namespace mf_test
