#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "lqsim/errors.hpp"
#include "lqsim/report.hpp"
#include "lqsim/runner.hpp"
#include "lqsim/scenario.hpp"

using namespace lqs;
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> fixtures()
{
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(LQSIM_SCENARIO_DIR))
        if (e.path().extension() == ".json")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("lqsim_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const char* kMinimal = R"({
  "name": "m",
  "layout": {"width": 4, "height": 4},
  "grouping": {"preset": "G1"},
  "pattern": {"pairs": [[0, 2, 1]]},
  "vectors": [[1, 1, 1, 1], [0, 0, 0, 0], [1, 1, 1, 1], [0, 0, 0, 0]]
})";

std::string with(std::string text, const std::string& from, const std::string& to)
{
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

} // namespace

TEST_CASE("every fixture round-trips byte for byte in canonical form")
{
    const auto files = fixtures();
    REQUIRE(files.size() >= 30);
    for (const auto& f : files) {
        CAPTURE(f.filename().string());
        const auto canonical = serialize(load_scenario(f.string()));
        CHECK(serialize(parse_scenario(canonical)) == canonical);
    }
}

TEST_CASE("fixture names match their file names and carry tolerances")
{
    for (const auto& f : fixtures()) {
        const auto s = load_scenario(f.string());
        CHECK(s.name == f.stem().string());
        CHECK(s.checks.tolerance > 0.0);
        if (s.reconstructed && s.action == "verify" && s.checks.tolerance > 1e-9)
            CHECK(s.checks.tolerance <= 0.1);
    }
}

TEST_CASE("grouping presets expand to explicit sets")
{
    auto s = parse_scenario(kMinimal);
    REQUIRE(s.grouping);
    CHECK(s.grouping->sets == std::vector<std::vector<QubitIndex>>{{0, 1, 4, 5}, {2, 3, 6, 7}, {8, 9, 12, 13}, {10, 11, 14, 15}});

    s = parse_scenario(with(kMinimal, "\"G1\"", "\"G2\""));
    // Every set has one qubit in each 2x2 quadrant.
    for (const auto& set : s.grouping->sets) {
        std::set<std::pair<std::size_t, std::size_t>> quadrants;
        for (auto q : set)
            quadrants.insert({q % 4 / 2, q / 4 / 2});
        CHECK(quadrants.size() == 4);
    }
    CHECK(s.grouping->sets[0] == std::vector<QubitIndex>{0, 2, 8, 10});

    const auto bricks = parse_scenario(R"({"name": "b", "layout": {"width": 10, "height": 4, "cutoff_delta": 1},
                                          "grouping": {"preset": "fig6b"}})");
    REQUIRE(bricks.grouping->sets.size() == 4);
    CHECK(bricks.grouping->sets[2] == std::vector<QubitIndex>{22, 23, 24, 25, 32, 33, 34, 35});
    CHECK(bricks.grouping->set_class == std::vector<std::size_t>{0, 0, 1, 1});

    const auto plus = parse_scenario(R"({"name": "p", "layout": {"width": 9, "height": 9},
                                        "grouping": {"preset": "fig8c"}})");
    std::set<QubitIndex> used;
    for (const auto& set : plus.grouping->sets) {
        REQUIRE(set.size() == 5);
        const auto centre = set[2];
        CHECK(set == std::vector<QubitIndex>{centre - 9, centre - 1, centre, centre + 1, centre + 9});
        used.insert(set.begin(), set.end());
    }
    CHECK(used.size() == 5 * plus.grouping->sets.size()); // pluses do not overlap
}

TEST_CASE("fig8 groupings have four bonds between every pair of sets")
{
    for (const char* preset : {"fig8a", "fig8b"}) {
        const std::size_t n = preset[4] == 'a' ? 4 : 5;
        const auto s = parse_scenario(fmt::format(
            R"({{"name": "x", "layout": {{"width": {0}, "height": {0}, "cutoff_delta": 1}}, "grouping": {{"preset": "{1}"}}}})",
            n, preset));
        const auto layout = s.layout->build();
        const auto g = s.build_grouping();
        std::map<std::pair<std::size_t, std::size_t>, int> bonds;
        for (auto [a, b] : layout.edges()) {
            const auto sa = g.locate(a)->set, sb = g.locate(b)->set;
            REQUIRE(sa != sb);
            ++bonds[std::minmax(sa, sb)];
        }
        CHECK(bonds.size() == n * (n - 1) / 2);
        for (const auto& [k, v] : bonds)
            CHECK(v == 4);
    }
}

TEST_CASE("lattice and cube pattern presets")
{
    // Brick-wall pattern on 2x2 blocks: interior blocks have three neighbours.
    const auto hex = parse_scenario(R"({"name": "h", "layout": {"width": 12, "height": 12, "cutoff_delta": 1},
        "grouping": {"preset": "fig6a"},
        "pattern": {"preset": "lattice", "directions": [{"offset": [1, 0], "weight": 1, "from_class": 0},
                                                          {"offset": [0, 1], "weight": 1}]}})");
    std::vector<int> degree(36, 0);
    for (const auto& e : hex.pattern->pairs) {
        CHECK(e.value == 1.0);
        ++degree[e.i];
        ++degree[e.j];
    }
    for (std::size_t by = 1; by < 5; ++by)
        for (std::size_t bx = 1; bx < 5; ++bx)
            CHECK(degree[by * 6 + bx] == 3);

    const auto cube = parse_scenario(R"({"name": "c", "pattern": {"preset": "cube-full", "logical_qubits": 8}})");
    std::map<double, int> counts;
    for (const auto& e : cube.pattern->pairs)
        ++counts[e.value];
    CHECK(counts.size() == 3);
    CHECK(counts[1.0] == 12);
    CHECK(counts[1.0 / std::sqrt(2.0)] == 12);
    CHECK(counts[1.0 / std::sqrt(3.0)] == 4);

    const auto nearest = parse_scenario(R"({"name": "c", "pattern": {"preset": "cube-nearest", "logical_qubits": 8}})");
    CHECK(nearest.pattern->pairs.size() == 12);
}

TEST_CASE("class vectors expand per set")
{
    const auto s = parse_scenario(R"({"name": "h", "layout": {"width": 4, "height": 4, "cutoff_delta": 1},
        "grouping": {"preset": "fig6a"}, "class_vectors": [[0, 1, 0, 1], [0.83, 1, 0.17, 1]]})");
    REQUIRE(s.vectors.size() == 4);
    CHECK(s.vectors[0] == std::vector<double>{0, 1, 0, 1});
    CHECK(s.vectors[1] == std::vector<double>{0.83, 1, 0.17, 1});
    CHECK(s.vectors[3] == std::vector<double>{0, 1, 0, 1});
}

TEST_CASE("malformed configs raise config errors")
{
    CHECK_THROWS_AS(parse_scenario("{"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("[]"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(R"({"layout": {"width": 1, "height": 1}})"), ConfigError); // no name
    CHECK_THROWS_AS(parse_scenario(with(kMinimal, "\"G1\"", "\"G9\"")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(with(kMinimal, "\"name\"", "\"nmae\"")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(with(kMinimal, "\"width\": 4", "\"width\": 5")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(with(kMinimal, "[0, 2, 1]", "[0, 7, 1]")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(with(kMinimal, "[0, 2, 1]", "[2, 2, 1]")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(with(kMinimal, "[0, 0, 0, 0]]", "[0, 0, 0]]")), ConfigError);
    CHECK_THROWS_AS(parse_scenario(with(kMinimal, "\"name\": \"m\"", "\"name\": \"m\", \"action\": \"fly\"")),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario(with(kMinimal, "\"width\": 4,", "\"width\": 4, \"coupling_J\": -1,")), ConfigError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("report text and records keep insertion order")
{
    Report r;
    r.add("b", "x", 1.5);
    r.add("a", "y", std::size_t{3});
    r.add("b", "z", true);
    r.add("b", "x", 2.0); // overwrite keeps position
    CHECK(r.text() == "[b]\nx = 2\nz = true\n\n[a]\ny = 3\n");
    CHECK(r.records() == "b.x = 2\nb.z = true\na.y = 3\n");
    CHECK(r.passed());
    r.check("c1", false, "off");
    r.check("c2", true, "fine");
    CHECK_FALSE(r.passed());
    CHECK(r.failure_count() == 1);
    CHECK(r.find("checks", "c1") == std::optional<std::string>("FAIL (off)"));
    CHECK(format_number(-0.0) == "0");
}

TEST_CASE("DOT diagrams are deterministic and encode sign and weight")
{
    PairMap ring(4);
    ring.at(0, 1) = ring.at(0, 2) = ring.at(1, 3) = ring.at(2, 3) = 2.3;
    const auto g = interaction_graph("ring", ring);
    CHECK(g.edges.size() == 4);
    const auto dot = render_dot(g);
    CHECK(dot == render_dot(interaction_graph("ring", ring)));
    CHECK(dot.find("0 -- 1 [penwidth=4.000") != std::string::npos);
    CHECK(dot.find("dashed") == std::string::npos);

    PairMap mixed(3);
    mixed.at(0, 1) = 2.0;
    mixed.at(1, 2) = -1.0;
    mixed.at(0, 2) = 1e-12; // below threshold
    const auto m = interaction_graph("m", mixed);
    REQUIRE(m.edges.size() == 2);
    const auto text = render_dot(m);
    CHECK(text.find("1 -- 2 [penwidth=2.250, label=\"-1\", style=dashed]") != std::string::npos);
    CHECK(render_svg(m).find("stroke-dasharray") != std::string::npos);

    const auto empty = render_dot(interaction_graph("e", PairMap(3)));
    CHECK(empty.find("--") == std::string::npos);
    CHECK(empty.find("2 [label=\"3\"]") != std::string::npos);
}

TEST_CASE("fitted lambda and log-log slope")
{
    PairMap pattern(3), couplings(3);
    pattern.at(0, 1) = 2.0;
    pattern.at(1, 2) = 1.0;
    couplings.at(0, 1) = 0.6;
    couplings.at(1, 2) = 0.3;
    CHECK(fitted_lambda(couplings, pattern) == doctest::Approx(0.6));
    CHECK(fitted_lambda(couplings, PairMap(3)) == 0.0);
    CHECK(log_log_slope({1, 2, 4, 8}, {1.0, 0.25, 0.0625, 0.015625}) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(log_log_slope({1}, {1.0}), std::invalid_argument);
}

TEST_CASE("runner exit codes")
{
    RunOptions o;
    const auto ok = run_scenario(parse_scenario(kMinimal), "verify", o);
    CHECK(ok.exit_code == kExitOk);
    CHECK(ok.report.find("pattern", "fitted_lambda") == std::optional<std::string>("8.502190143"));

    // Rounded published vectors against an exact tolerance.
    auto rounded = parse_scenario(with(kMinimal, "[0, 0, 0, 0], [1, 1, 1, 1]", "[0.01, 0, 0, 0], [1, 1, 1, 1]"));
    CHECK(run_scenario(rounded, "verify", o).exit_code == kExitVerification);
    RunOptions loose;
    loose.tolerance = 0.05;
    CHECK(run_scenario(rounded, "verify", loose).exit_code == kExitOk);

    // Opposite corners share no bond on a n.n. lattice.
    auto uncoupled = parse_scenario(with(with(kMinimal, "[0, 2, 1]", "[0, 3, 1]"), "\"width\": 4,",
                                         "\"width\": 4, \"cutoff_delta\": 1,"));
    CHECK(run_scenario(uncoupled, "optimize", o).exit_code == kExitInfeasible);

    auto no_vectors = parse_scenario(kMinimal);
    no_vectors.vectors.clear();
    CHECK(run_scenario(no_vectors, "verify", o).exit_code == kExitConfig);
    CHECK(run_scenario(parse_scenario(kMinimal), "solve", o).exit_code == kExitConfig); // ratio pattern
}

TEST_CASE("runner writes the expanded config and artifacts")
{
    const auto dir = scratch("artifacts");
    RunOptions o;
    o.out_dir = dir.string();
    const auto s = parse_scenario(kMinimal);
    const auto r = run_scenario(s, "verify", o);
    REQUIRE(r.exit_code == kExitOk);
    CHECK(slurp(dir / "scenario.json") == serialize(s));
    CHECK(slurp(dir / "report.txt") == r.report.text());
    // verify draws the realized couplings, so the only edge carries the fitted lambda.
    const auto dot = slurp(dir / "graph.dot");
    CHECK(dot.find("0 -- 2 [penwidth=4.000, label=\"8.502190143\"]") != std::string::npos);
    CHECK(std::count(dot.begin(), dot.end(), '-') == 2);
    CHECK(fs::exists(dir / "graph.svg"));
    fs::remove_all(dir);
}

TEST_CASE("run-all isolates fixtures and reports the worst exit code")
{
    const auto in = scratch("batch_in");
    const auto out = scratch("batch_out");
    std::ofstream(in / "good.json") << with(kMinimal, "\"m\"", "\"good\"");
    std::ofstream(in / "bad.json") << with(kMinimal, "\"G1\"", "\"G7\"");
    std::ofstream(in / "loose.json")
        << with(with(kMinimal, "\"m\"", "\"loose\""), "[0, 0, 0, 0], [1, 1, 1, 1]", "[0.01, 0, 0, 0], [1, 1, 1, 1]");
    RunOptions o;
    o.out_dir = out.string();
    const auto b = run_all(in.string(), o, 2);
    REQUIRE(b.runs.size() == 3);
    CHECK(b.runs[0].exit_code == kExitConfig);       // bad
    CHECK(b.runs[1].exit_code == kExitOk);           // good
    CHECK(b.runs[2].exit_code == kExitVerification); // loose
    CHECK(b.exit_code == kExitVerification);
    CHECK(fs::exists(out / "good" / "report.txt"));
    CHECK(fs::exists(out / "loose" / "graph.dot"));
    CHECK(b.summary.find("summary", "failed") == std::optional<std::string>("2"));
    fs::remove_all(in);
    fs::remove_all(out);
}
