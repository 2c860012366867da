#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "marginforge/cli.hpp"
#include "marginforge/report.hpp"

using namespace marginforge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    args.insert(args.begin(), "marginforge");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string toy() { return (mf_test::data_dir() / "toy.csv").string(); }

// Strip the leading "# config:" provenance line of a CSV.
std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("#", 0) != 0) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"train", toy(), "--rule", "svm"}).code == 2);
    CHECK(cli({"train", toy(), "--rounds", "0"}).code == 2);
}

TEST_CASE("train is deterministic and writes classifier and trace") {
    const auto dir = scratch("mf_cli_train");
    const auto a = cli({"train", toy(), "--rule", "arcgv", "-T", "15", "--out", (dir / "a").string()});
    const auto b = cli({"train", toy(), "--rule", "arcgv", "-T", "15", "--out", (dir / "b").string()});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(dir / "a" / "classifier.json") == slurp(dir / "b" / "classifier.json"));
    CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
    const auto lines = csv_lines(slurp(dir / "a" / "trace.csv"));
    REQUIRE(lines.size() == 16);
    CHECK(lines[0] == "t,gamma,alpha_raw,alpha_used,rho,Z,train_error");
    // rho is the fifth column; the first round starts from 0.
    std::istringstream row(lines[1]);
    std::string cell;
    for (int c = 0; c < 5; ++c) std::getline(row, cell, ',');
    CHECK(cell == "0");
    CHECK(slurp(dir / "a" / "trace.csv").rfind("# config: ", 0) == 0);
    const auto art = read_artifact(dir / "a" / "classifier.json");
    CHECK(art.config["rule"] == "arcgv");
}

TEST_CASE("train without --out prints the classifier JSON") {
    const auto r = cli({"train", toy(), "-T", "5"});
    REQUIRE(r.code == 0);
    const auto j = Json::parse(r.out);
    CHECK(artifact_from_json(j).classifier.members.size() == 5);
}

TEST_CASE("bounds: seven named bounds, JSON and CSV, monotone in delta") {
    const auto dir = scratch("mf_cli_bounds");
    REQUIRE(cli({"train", toy(), "-T", "30", "--out", dir.string()}).code == 0);
    const auto clf = (dir / "classifier.json").string();
    const auto csv = cli({"bounds", clf, toy(), "--out", (dir / "b.csv").string()});
    CHECK(csv.code == 0);
    const auto lines = csv_lines(slurp(dir / "b.csv"));
    REQUIRE(lines.size() == 8);
    const char* names[] = {"breiman", "kth_margin", "emargin", "new", "lower", "distribution", "schapire_index"};
    for (std::size_t i = 0; i < 7; ++i) CHECK(lines[i + 1].rfind(std::string(names[i]) + ",", 0) == 0);

    const auto tight = Json::parse(cli({"bounds", clf, toy(), "--delta", "0.1"}).out);
    const auto loose = Json::parse(cli({"bounds", clf, toy(), "--delta", "0.01", "--all-k"}).out);
    CHECK(loose.contains("kth_all"));
    CHECK_FALSE(tight.contains("kth_all"));
    CHECK(tight["m"] == 60);
    for (std::size_t i = 0; i < 7; ++i) {
        const auto& t = tight["bounds"][i];
        const auto& l = loose["bounds"][i];
        if (!t["value"].is_number() || !l["value"].is_number()) continue;
        if (t["name"] == "lower")
            CHECK(l.value("raw_value", l["value"].get<double>()) <= t.value("raw_value", t["value"].get<double>()));
        else if (t["name"] != "kth_margin")  // best k may move with delta
            CHECK(l["value"].get<double>() >= t["value"].get<double>());
    }
    CHECK(cli({"bounds", clf, toy(), "--delta", "1.5"}).code == 2);
}

TEST_CASE("margins exports the CDF") {
    const auto dir = scratch("mf_cli_margins");
    REQUIRE(cli({"train", toy(), "-T", "10", "--out", dir.string()}).code == 0);
    const auto r = cli({"margins", (dir / "classifier.json").string(), toy()});
    CHECK(r.code == 0);
    const auto lines = csv_lines(r.out);
    CHECK(lines.at(0) == "theta,cdf");
    CHECK(lines.back() == "1,1");
}

TEST_CASE("exit codes: data error, incompatible artifacts, coverage floor, empty benchmark") {
    const auto dir = scratch("mf_cli_codes");
    CHECK(cli({"train", "/nonexistent/x.csv"}).code == 3);
    REQUIRE(cli({"train", toy(), "-T", "5", "--out", dir.string()}).code == 0);
    const auto clf = (dir / "classifier.json").string();
    const auto iris = (mf_test::data_dir() / "iris.csv").string();
    CHECK(cli({"bounds", clf, iris}).code == 5);
    std::ofstream(dir / "bad.json") << "{";
    CHECK(cli({"bounds", (dir / "bad.json").string(), toy()}).code == 5);
    CHECK(cli({"bounds", (dir / "none.json").string(), toy()}).code == 3);
    CHECK(cli({"validate", "--suite", "bernstein", "--trials", "100"}).code == 2);
    CHECK(cli({"validate", "--suite", "nonsense"}).code == 2);
    std::ofstream(dir / "empty.json") << R"({"datasets": []})";
    CHECK(cli({"benchmark", (dir / "empty.json").string()}).code == 2);
    std::ofstream(dir / "unknown.json") << R"({"datasets": ["x.csv"], "rounds": 3})";
    CHECK(cli({"benchmark", (dir / "unknown.json").string()}).code == 2);
    // A single-class dataset cannot be boosted.
    std::ofstream(dir / "one.csv") << "x,class\n1,a\n2,a\n";
    CHECK(cli({"train", (dir / "one.csv").string()}).code == 3);
}

TEST_CASE("validate committee suite reports every cell") {
    const auto r = cli({"validate", "--suite", "committee", "--trials", "2000", "--seed", "1"});
    const auto j = Json::parse(r.out);
    CHECK(j["cells"].size() == 6);
    CHECK((r.code == 0) == j["pass"].get<bool>());
    CHECK((r.code == 0 || r.code == 6));
}

TEST_CASE("compare reports differences between two classifiers") {
    const auto dir = scratch("mf_cli_compare");
    REQUIRE(cli({"train", toy(), "-T", "20", "--out", (dir / "a").string()}).code == 0);
    REQUIRE(cli({"train", toy(), "-T", "20", "--rule", "arcgv", "--out", (dir / "g").string()}).code == 0);
    const auto r = cli({"compare", (dir / "a" / "classifier.json").string(), (dir / "g" / "classifier.json").string(), toy()});
    REQUIRE(r.code == 0);
    const auto j = Json::parse(r.out);
    CHECK(j["difference"]["bounds"].size() == 7);
    CHECK(j["difference"]["min_margin"].get<double>() ==
          doctest::Approx(j["second"]["margins"]["min"].get<double>() - j["first"]["margins"]["min"].get<double>()));
    const auto self = Json::parse(cli({"compare", (dir / "a" / "classifier.json").string(),
                                       (dir / "a" / "classifier.json").string(), toy()}).out);
    CHECK(self["difference"]["min_margin"] == 0.0);
}

TEST_CASE("the installed binary maps errors to process exit codes") {
    const std::string bin = MARGINFORGE_CLI;
    const int status = std::system((bin + " train /nonexistent/x.csv > /dev/null 2>&1").c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 3);
    const int ok = std::system((bin + " --help > /dev/null 2>&1").c_str());
    CHECK(WEXITSTATUS(ok) == 0);
}

}  // TEST_SUITE
