#include "lqsim/scenario.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "lqsim/cost_model.hpp"
#include "lqsim/errors.hpp"

namespace lqs {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!obj.is_object())
        fail(fmt::format("{}: expected an object", where));
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
            fail(fmt::format("{}: unknown key '{}'", where, k));
    }
}

template <class T>
T read(const json& obj, const char* key, const std::string& where, T fallback)
{
    if (!obj.contains(key) || obj.at(key).is_null())
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(fmt::format("{}.{}: {}", where, key, e.what()));
    }
}

template <class T>
T require(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key))
        fail(fmt::format("{}: missing '{}'", where, key));
    return read<T>(obj, key, where, T{});
}

std::optional<Interval> read_interval(const json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key))
        return std::nullopt;
    const auto& v = obj.at(key);
    const auto w = where + "." + key;
    allow_keys(v, w, {"value", "tolerance"});
    return Interval{require<double>(v, "value", w), require<double>(v, "tolerance", w)};
}

json write_interval(const Interval& i) { return json{{"value", i.value}, {"tolerance", i.tolerance}}; }

std::vector<PatternEntry> read_pairs(const json& v, const std::string& where)
{
    std::vector<PatternEntry> out;
    if (!v.is_array())
        fail(where + ": expected an array of [i, j, value]");
    for (const auto& e : v) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned() ||
            !e[2].is_number())
            fail(where + ": each pair must be [i, j, value] with non-negative integer indices");
        auto i = e[0].get<std::size_t>(), j = e[1].get<std::size_t>();
        if (i == j)
            fail(fmt::format("{}: pair ({}, {}) is not a pair", where, i, j));
        if (i > j)
            std::swap(i, j);
        out.push_back({i, j, e[2].get<double>()});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    for (std::size_t k = 1; k < out.size(); ++k)
        if (out[k].i == out[k - 1].i && out[k].j == out[k - 1].j)
            fail(fmt::format("{}: pair ({}, {}) listed twice", where, out[k].i, out[k].j));
    return out;
}

json write_pairs(const std::vector<PatternEntry>& pairs)
{
    json a = json::array();
    for (const auto& p : pairs)
        a.push_back(json::array({p.i, p.j, p.value}));
    return a;
}

// ---- grouping presets ----------------------------------------------------

struct ExpandedGrouping {
    std::vector<std::vector<QubitIndex>> sets;
    std::vector<std::size_t> set_class;
    std::vector<std::vector<int>> coordinates;
};

void require_dims(const LayoutSpec& l, const std::string& preset, std::size_t w, std::size_t h)
{
    if (l.width != w || l.height != h)
        fail(fmt::format("grouping preset '{}' needs a {}x{} layout, got {}x{}", preset, w, h, l.width, l.height));
}

ExpandedGrouping blocks(const LayoutSpec& l, std::size_t bw, std::size_t bh, bool checkerboard)
{
    ExpandedGrouping g;
    for (std::size_t by = 0; by < l.height / bh; ++by)
        for (std::size_t bx = 0; bx < l.width / bw; ++bx) {
            std::vector<QubitIndex> s;
            for (std::size_t y = 0; y < bh; ++y)
                for (std::size_t x = 0; x < bw; ++x)
                    s.push_back((by * bh + y) * l.width + bx * bw + x);
            g.sets.push_back(std::move(s));
            g.set_class.push_back(checkerboard ? (bx + by) % 2 : 0);
            g.coordinates.push_back({static_cast<int>(bx), static_cast<int>(by)});
        }
    if (!checkerboard)
        g.set_class.clear();
    return g;
}

ExpandedGrouping expand_grouping(const std::string& preset, const LayoutSpec& l)
{
    if (preset == "G1") {
        require_dims(l, preset, 4, 4);
        return blocks(l, 2, 2, false);
    }
    if (preset == "G2") {
        // One qubit of every set in each 2x2 quadrant, at the same offset.
        require_dims(l, preset, 4, 4);
        ExpandedGrouping g;
        for (std::size_t k = 0; k < 4; ++k) {
            std::vector<QubitIndex> s;
            for (std::size_t qy = 0; qy < 2; ++qy)
                for (std::size_t qx = 0; qx < 2; ++qx)
                    s.push_back((2 * qy + k / 2) * 4 + 2 * qx + k % 2);
            g.sets.push_back(std::move(s));
            g.coordinates.push_back({static_cast<int>(k % 2), static_cast<int>(k / 2)});
        }
        return g;
    }
    if (preset == "fig5-cube") {
        require_dims(l, preset, 8, 8);
        return blocks(l, 4, 2, false);
    }
    if (preset == "fig5-nn9") {
        require_dims(l, preset, 9, 9);
        return blocks(l, 3, 3, false);
    }
    if (preset == "fig6a") {
        if (l.width % 2 || l.height % 2 || l.width == 0 || l.height == 0)
            fail("grouping preset 'fig6a' needs even layout dimensions");
        return blocks(l, 2, 2, true);
    }
    if (preset == "fig6b") {
        // 4x2 bricks, odd brick rows shifted right by two columns.
        if (l.height % 2 || l.height == 0 || l.width < 6 || (l.width - 2) % 4)
            fail("grouping preset 'fig6b' needs width = 4c + 2 and an even height");
        ExpandedGrouping g;
        const auto cols = (l.width - 2) / 4;
        for (std::size_t r = 0; r < l.height / 2; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                std::vector<QubitIndex> s;
                for (std::size_t y = 0; y < 2; ++y)
                    for (std::size_t x = 0; x < 4; ++x)
                        s.push_back((2 * r + y) * l.width + 4 * c + 2 * (r % 2) + x);
                g.sets.push_back(std::move(s));
                g.set_class.push_back(r % 2);
                g.coordinates.push_back({static_cast<int>(2 * c + r % 2), static_cast<int>(r)});
            }
        return g;
    }
    if (preset == "fig8a" || preset == "fig8b") {
        const std::size_t n = preset == "fig8a" ? 4 : 5;
        require_dims(l, preset, n, n);
        ExpandedGrouping g;
        g.sets.resize(n);
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t x = 0; x < n; ++x) {
                const auto c = n == 4 ? static_cast<std::size_t>(block_pattern()[y * 4 + x]) : (x + 2 * y) % 5;
                g.sets[c].push_back(y * n + x);
            }
        return g;
    }
    if (preset == "fig8c") {
        // Plus-shaped pentominoes centred on a*(2,1) + b*(-1,2); only whole pluses are kept.
        ExpandedGrouping g;
        const int w = static_cast<int>(l.width), h = static_cast<int>(l.height);
        std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> centres; // ((cy, cx), (a, b))
        for (int a = -2 * (w + h); a <= 2 * (w + h); ++a)
            for (int b = -2 * (w + h); b <= 2 * (w + h); ++b) {
                const int cx = 2 * a - b, cy = a + 2 * b;
                if (cx >= 1 && cx <= w - 2 && cy >= 1 && cy <= h - 2)
                    centres.push_back({{cy, cx}, {a, b}});
            }
        std::sort(centres.begin(), centres.end());
        for (const auto& [c, ab] : centres) {
            const auto [cy, cx] = c;
            g.sets.push_back({static_cast<QubitIndex>((cy - 1) * w + cx), static_cast<QubitIndex>(cy * w + cx - 1),
                              static_cast<QubitIndex>(cy * w + cx), static_cast<QubitIndex>(cy * w + cx + 1),
                              static_cast<QubitIndex>((cy + 1) * w + cx)});
            g.coordinates.push_back({ab.first, ab.second});
        }
        if (g.sets.empty())
            fail("grouping preset 'fig8c': layout holds no whole plus");
        return g;
    }
    if (preset.rfind("appD-N", 0) == 0) {
        std::size_t n = 0;
        try {
            n = std::stoul(preset.substr(6));
        } catch (const std::exception&) {
            fail(fmt::format("unknown grouping preset '{}'", preset));
        }
        ScalingConstruction c;
        try {
            c = polynomial_scaling_construction(n);
        } catch (const std::invalid_argument& e) {
            fail(fmt::format("grouping preset '{}': {}", preset, e.what()));
        }
        require_dims(l, preset, 5 * c.blocks.size() - 1, 4);
        return {c.grouping().sets(), {}, {}};
    }
    fail(fmt::format("unknown grouping preset '{}'", preset));
}

// ---- pattern presets -----------------------------------------------------

std::vector<PatternEntry> expand_pattern(const PatternSpec& p, const GroupingSpec* g)
{
    const auto n = p.logical_qubits;
    std::vector<PatternEntry> out;
    auto add = [&](std::size_t i, std::size_t j, double v) {
        if (v != 0.0)
            out.push_back({i, j, v});
    };
    if (p.preset == "star") {
        for (std::size_t j = 1; j < n; ++j)
            add(0, j, 1.0);
    } else if (p.preset == "complete") {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                add(i, j, 1.0);
    } else if (p.preset == "cube-full" || p.preset == "cube-nearest") {
        // Set k sits on the cube vertex with coordinates given by its three bits.
        if (n != 8)
            fail("cube patterns need eight logical qubits");
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = i + 1; j < 8; ++j) {
                const auto d2 = static_cast<double>(std::popcount(i ^ j));
                add(i, j, p.preset == "cube-full" ? 1.0 / std::sqrt(d2) : (d2 == 1.0 ? 1.0 : 0.0));
            }
    } else if (p.preset == "lattice") {
        if (!g || g->coordinates.size() != n)
            fail("lattice pattern needs set coordinates from the grouping");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double v = 0.0;
                for (const auto& d : p.directions) {
                    if (d.offset.size() != g->coordinates[i].size())
                        fail("lattice pattern: direction and coordinate dimensions differ");
                    auto matches = [&](std::size_t from, std::size_t to) {
                        for (std::size_t k = 0; k < d.offset.size(); ++k)
                            if (g->coordinates[to][k] - g->coordinates[from][k] != d.offset[k])
                                return false;
                        if (!d.from_class)
                            return true;
                        const auto cls = g->set_class.empty() ? 0 : g->set_class[from];
                        return cls == *d.from_class;
                    };
                    if (matches(i, j))
                        v += d.weight;
                    if (matches(j, i))
                        v += d.weight;
                }
                add(i, j, v);
            }
    } else {
        fail(fmt::format("unknown pattern preset '{}'", p.preset));
    }
    return out;
}

// ---- sections ------------------------------------------------------------

LayoutSpec read_layout(const json& v)
{
    allow_keys(v, "layout", {"width", "height", "spacing_delta", "alpha", "cutoff_delta", "coupling_J"});
    LayoutSpec l;
    l.width = require<std::size_t>(v, "width", "layout");
    l.height = require<std::size_t>(v, "height", "layout");
    l.spacing_delta = read<double>(v, "spacing_delta", "layout", 1.0);
    l.alpha = read<double>(v, "alpha", "layout", 1.0);
    if (v.contains("cutoff_delta") && !v.at("cutoff_delta").is_null())
        l.cutoff_delta = read<double>(v, "cutoff_delta", "layout", 0.0);
    l.coupling_J = read<double>(v, "coupling_J", "layout", 1.0);
    if (l.width == 0 || l.height == 0)
        fail("layout: width and height must be positive");
    try {
        (void)PhysicalLayout::square(1, 1, l.law());
    } catch (const std::invalid_argument& e) {
        fail(fmt::format("layout: {}", e.what()));
    }
    return l;
}

json write_layout(const LayoutSpec& l)
{
    return json{{"width", l.width},
                {"height", l.height},
                {"spacing_delta", l.spacing_delta},
                {"alpha", l.alpha},
                {"cutoff_delta", l.cutoff_delta ? json(*l.cutoff_delta) : json(nullptr)},
                {"coupling_J", l.coupling_J}};
}

GroupingSpec read_grouping(const json& v, const std::optional<LayoutSpec>& layout)
{
    allow_keys(v, "grouping", {"preset", "sets", "set_class", "coordinates"});
    GroupingSpec g;
    g.preset = read<std::string>(v, "preset", "grouping", "");
    if (v.contains("sets")) {
        g.sets = read<std::vector<std::vector<QubitIndex>>>(v, "sets", "grouping", {});
        g.set_class = read<std::vector<std::size_t>>(v, "set_class", "grouping", {});
        g.coordinates = read<std::vector<std::vector<int>>>(v, "coordinates", "grouping", {});
    } else {
        if (g.preset.empty())
            fail("grouping: needs 'sets' or 'preset'");
        if (!layout)
            fail("grouping preset needs a layout");
        auto e = expand_grouping(g.preset, *layout);
        g.sets = std::move(e.sets);
        g.set_class = std::move(e.set_class);
        g.coordinates = std::move(e.coordinates);
    }
    if (!g.set_class.empty() && g.set_class.size() != g.sets.size())
        fail("grouping: set_class needs one entry per set");
    if (!g.coordinates.empty() && g.coordinates.size() != g.sets.size())
        fail("grouping: coordinates need one entry per set");
    return g;
}

json write_grouping(const GroupingSpec& g)
{
    json v;
    v["preset"] = g.preset;
    v["sets"] = g.sets;
    v["set_class"] = g.set_class;
    v["coordinates"] = g.coordinates;
    return v;
}

PatternSpec read_pattern(const json& v, const GroupingSpec* g)
{
    allow_keys(v, "pattern", {"form", "preset", "directions", "logical_qubits", "pairs"});
    PatternSpec p;
    const auto form = read<std::string>(v, "form", "pattern", "ratio");
    if (form != "ratio" && form != "exact")
        fail(fmt::format("pattern.form must be 'ratio' or 'exact', got '{}'", form));
    p.ratio_form = form == "ratio";
    p.preset = read<std::string>(v, "preset", "pattern", "");
    p.logical_qubits = read<std::size_t>(v, "logical_qubits", "pattern", g ? g->sets.size() : 0);
    if (g && p.logical_qubits != g->sets.size())
        fail(fmt::format("pattern has {} logical qubits but the grouping has {} sets", p.logical_qubits,
                         g->sets.size()));
    if (v.contains("directions")) {
        for (const auto& d : v.at("directions")) {
            allow_keys(d, "pattern.directions[]", {"offset", "weight", "from_class"});
            PatternDirection dir;
            dir.offset = require<std::vector<int>>(d, "offset", "pattern.directions[]");
            dir.weight = require<double>(d, "weight", "pattern.directions[]");
            if (d.contains("from_class") && !d.at("from_class").is_null())
                dir.from_class = read<std::size_t>(d, "from_class", "pattern.directions[]", 0);
            p.directions.push_back(std::move(dir));
        }
    }
    if (v.contains("pairs"))
        p.pairs = read_pairs(v.at("pairs"), "pattern.pairs");
    else if (!p.preset.empty())
        p.pairs = expand_pattern(p, g);
    for (const auto& e : p.pairs)
        if (e.j >= p.logical_qubits)
            fail(fmt::format("pattern.pairs: index {} out of range for {} logical qubits", e.j, p.logical_qubits));
    if (p.logical_qubits < 2)
        fail("pattern needs at least two logical qubits");
    return p;
}

json write_pattern(const PatternSpec& p)
{
    json v;
    v["form"] = p.ratio_form ? "ratio" : "exact";
    v["preset"] = p.preset;
    json dirs = json::array();
    for (const auto& d : p.directions) {
        json e;
        e["offset"] = d.offset;
        e["weight"] = d.weight;
        e["from_class"] = d.from_class ? json(*d.from_class) : json(nullptr);
        dirs.push_back(std::move(e));
    }
    v["directions"] = std::move(dirs);
    v["logical_qubits"] = p.logical_qubits;
    v["pairs"] = write_pairs(p.pairs);
    return v;
}

CircuitOpSpec read_op(const json& v)
{
    const std::string w = "circuit[]";
    allow_keys(v, w, {"op", "qubit", "gate", "angle", "time_over_deltaJ", "pairs", "basis", "reg"});
    CircuitOpSpec o;
    o.op = require<std::string>(v, "op", w);
    o.qubit = read<std::size_t>(v, "qubit", w, 0);
    o.gate = read<std::string>(v, "gate", w, "");
    o.angle = read<double>(v, "angle", w, 0.0);
    o.time_over_deltaJ = read<double>(v, "time_over_deltaJ", w, 0.0);
    if (v.contains("pairs"))
        o.pairs = read_pairs(v.at("pairs"), w + ".pairs");
    o.basis = read<std::string>(v, "basis", w, "Z");
    o.reg = read<std::size_t>(v, "reg", w, 0);
    static const std::set<std::string> ops{"prep_plus", "gate", "evolve", "measure"};
    if (!ops.count(o.op))
        fail(fmt::format("circuit: unknown op '{}'", o.op));
    return o;
}

json write_op(const CircuitOpSpec& o)
{
    json v;
    v["op"] = o.op;
    if (o.op == "evolve") {
        v["time_over_deltaJ"] = o.time_over_deltaJ;
        v["pairs"] = write_pairs(o.pairs);
        return v;
    }
    v["qubit"] = o.qubit;
    if (o.op == "gate") {
        v["gate"] = o.gate;
        v["angle"] = o.angle;
    } else if (o.op == "measure") {
        v["basis"] = o.basis;
        v["reg"] = o.reg;
    }
    return v;
}

Mat2 gate_matrix(const std::string& name, double angle)
{
    if (name == "I")
        return gates::identity();
    if (name == "X")
        return gates::pauli_x();
    if (name == "Y")
        return gates::pauli_y();
    if (name == "Z")
        return gates::pauli_z();
    if (name == "H")
        return gates::hadamard();
    if (name == "S")
        return gates::phase_s();
    if (name == "Sdg")
        return gates::phase_s_dagger();
    if (name == "Rx")
        return gates::rx(angle);
    if (name == "Rz")
        return gates::rz(angle);
    fail(fmt::format("circuit: unknown gate '{}'", name));
}

Mat2 basis_matrix(const std::string& name)
{
    if (name == "Z")
        return gates::identity();
    if (name == "X")
        return gates::hadamard();
    if (name == "Y") {
        Mat2 m;
        const double r = 1.0 / std::numbers::sqrt2;
        m << r, r, std::complex<double>(0, r), std::complex<double>(0, -r);
        return m;
    }
    fail(fmt::format("circuit: unknown measurement basis '{}'", name));
}

} // namespace

CouplingLaw LayoutSpec::law() const
{
    return CouplingLaw{coupling_J, alpha, cutoff_delta.value_or(std::numeric_limits<double>::infinity()),
                       spacing_delta};
}

PhysicalLayout LayoutSpec::build() const { return PhysicalLayout::square(width, height, law()); }

PairMap PatternSpec::entries() const
{
    PairMap m(logical_qubits);
    for (const auto& e : pairs)
        m.at(e.i, e.j) = e.value;
    return m;
}

TargetPattern PatternSpec::target() const
{
    try {
        return ratio_form ? TargetPattern::ratios(entries()) : TargetPattern::exact(entries());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("pattern: {}", e.what()));
    }
}

std::size_t Scenario::logical_count() const
{
    if (grouping)
        return grouping->sets.size();
    return pattern ? pattern->logical_qubits : 0;
}

Grouping Scenario::build_grouping() const
{
    if (!layout || !grouping)
        throw ConfigError(fmt::format("scenario '{}' needs a layout and a grouping", name));
    try {
        return Grouping::row_major(layout->build(), grouping->sets);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("grouping: {}", e.what()));
    }
}

LogicalCircuit Scenario::build_circuit() const
{
    LogicalCircuit c;
    c.qubit_count = logical_count();
    for (const auto& o : circuit) {
        if (o.op == "prep_plus")
            c.prep_plus(o.qubit);
        else if (o.op == "gate")
            c.gate(o.qubit, gate_matrix(o.gate, o.angle), o.gate);
        else if (o.op == "evolve") {
            PairMap m(c.qubit_count);
            for (const auto& e : o.pairs) {
                if (e.j >= c.qubit_count)
                    throw ConfigError("circuit evolve: pair index out of range");
                m.at(e.i, e.j) = e.value;
            }
            c.evolve(std::move(m), o.time_over_deltaJ);
        } else
            c.measure(o.qubit, basis_matrix(o.basis), o.reg);
    }
    try {
        validate(c);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("circuit: {}", e.what()));
    }
    return c;
}

Scenario parse_scenario(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(fmt::format("malformed config: {}", e.what()));
    }
    allow_keys(doc, "scenario",
               {"name", "description", "action", "reconstructed", "layout", "grouping", "pattern", "class_vectors",
                "vectors", "pinned", "spins", "circuit", "trotter", "run", "checks"});
    Scenario s;
    s.name = require<std::string>(doc, "name", "scenario");
    s.description = read<std::string>(doc, "description", "scenario", "");
    s.action = read<std::string>(doc, "action", "scenario", "verify");
    static const std::set<std::string> actions{"solve",    "optimize", "verify",  "schedule",
                                               "compile",  "simulate", "compare", "render"};
    if (!actions.count(s.action))
        fail(fmt::format("scenario.action: unknown action '{}'", s.action));
    s.reconstructed = read<bool>(doc, "reconstructed", "scenario", false);
    if (doc.contains("layout") && !doc.at("layout").is_null())
        s.layout = read_layout(doc.at("layout"));
    if (doc.contains("grouping") && !doc.at("grouping").is_null())
        s.grouping = read_grouping(doc.at("grouping"), s.layout);
    if (doc.contains("pattern") && !doc.at("pattern").is_null())
        s.pattern = read_pattern(doc.at("pattern"), s.grouping ? &*s.grouping : nullptr);

    s.class_vectors = read<std::vector<std::vector<double>>>(doc, "class_vectors", "scenario", {});
    s.vectors = read<std::vector<std::vector<double>>>(doc, "vectors", "scenario", {});
    if (s.vectors.empty() && !s.class_vectors.empty()) {
        if (!s.grouping)
            fail("class_vectors need a grouping");
        for (std::size_t i = 0; i < s.grouping->sets.size(); ++i) {
            const auto c = s.grouping->set_class.empty() ? 0 : s.grouping->set_class[i];
            if (c >= s.class_vectors.size())
                fail(fmt::format("class_vectors: no vector for class {}", c));
            s.vectors.push_back(s.class_vectors[c]);
        }
    }
    if (!s.vectors.empty() && s.grouping) {
        if (s.vectors.size() != s.grouping->sets.size())
            fail(fmt::format("vectors: {} given for {} sets", s.vectors.size(), s.grouping->sets.size()));
        for (std::size_t i = 0; i < s.vectors.size(); ++i)
            if (s.vectors[i].size() != s.grouping->sets[i].size())
                fail(fmt::format("vectors[{}]: length {} for a set of {} qubits", i, s.vectors[i].size(),
                                 s.grouping->sets[i].size()));
    }
    s.pinned = read<std::vector<std::vector<double>>>(doc, "pinned", "scenario", {});
    s.spins = read<std::vector<double>>(doc, "spins", "scenario", {});
    if (doc.contains("circuit"))
        for (const auto& o : doc.at("circuit"))
            s.circuit.push_back(read_op(o));
    if (doc.contains("trotter") && !doc.at("trotter").is_null()) {
        const auto& t = doc.at("trotter");
        allow_keys(t, "trotter", {"field", "steps"});
        s.trotter = TrotterSpec{read<double>(t, "field", "trotter", 1.0),
                                require<std::vector<std::size_t>>(t, "steps", "trotter")};
    }
    if (doc.contains("run")) {
        const auto& r = doc.at("run");
        allow_keys(r, "run",
                   {"seed", "starts", "iterations", "time_over_deltaJ", "alternations", "side", "shots",
                    "construction_sets"});
        RunSpec d;
        s.run.seed = read<std::uint64_t>(r, "seed", "run", d.seed);
        s.run.starts = read<std::size_t>(r, "starts", "run", d.starts);
        s.run.iterations = read<std::size_t>(r, "iterations", "run", d.iterations);
        s.run.time_over_deltaJ = read<double>(r, "time_over_deltaJ", "run", d.time_over_deltaJ);
        s.run.alternations = read<std::size_t>(r, "alternations", "run", d.alternations);
        s.run.side = read<std::size_t>(r, "side", "run", d.side);
        s.run.shots = read<std::size_t>(r, "shots", "run", d.shots);
        s.run.construction_sets = read<std::size_t>(r, "construction_sets", "run", d.construction_sets);
    }
    if (doc.contains("checks")) {
        const auto& c = doc.at("checks");
        const std::string w = "checks";
        allow_keys(c, w,
                   {"tolerance", "lambda", "lambda_min", "rescale", "step_row", "step_row_tolerance",
                    "total_time_over_deltaJ", "fidelity_min", "slope_min", "slope_max", "physical_qubits"});
        s.checks.tolerance = read<double>(c, "tolerance", w, 1e-9);
        s.checks.lambda = read_interval(c, "lambda", w);
        if (c.contains("lambda_min") && !c.at("lambda_min").is_null())
            s.checks.lambda_min = read<double>(c, "lambda_min", w, 0.0);
        s.checks.rescale = read_interval(c, "rescale", w);
        s.checks.step_row = read<std::vector<double>>(c, "step_row", w, {});
        s.checks.step_row_tolerance = read<double>(c, "step_row_tolerance", w, 1e-3);
        s.checks.total_time = read_interval(c, "total_time_over_deltaJ", w);
        if (c.contains("fidelity_min") && !c.at("fidelity_min").is_null())
            s.checks.fidelity_min = read<double>(c, "fidelity_min", w, 0.0);
        if (c.contains("slope_min") && !c.at("slope_min").is_null())
            s.checks.slope_min = read<double>(c, "slope_min", w, 0.0);
        if (c.contains("slope_max") && !c.at("slope_max").is_null())
            s.checks.slope_max = read<double>(c, "slope_max", w, 0.0);
        if (c.contains("physical_qubits") && !c.at("physical_qubits").is_null())
            s.checks.physical_qubits = read<std::size_t>(c, "physical_qubits", w, 0);
    }
    if (!(s.checks.tolerance > 0.0))
        fail("checks.tolerance must be positive");
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(fmt::format("cannot read config '{}'", path));
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

std::string serialize(const Scenario& s)
{
    json doc;
    doc["name"] = s.name;
    doc["description"] = s.description;
    doc["action"] = s.action;
    doc["reconstructed"] = s.reconstructed;
    if (s.layout)
        doc["layout"] = write_layout(*s.layout);
    if (s.grouping)
        doc["grouping"] = write_grouping(*s.grouping);
    if (s.pattern)
        doc["pattern"] = write_pattern(*s.pattern);
    if (!s.class_vectors.empty())
        doc["class_vectors"] = s.class_vectors;
    if (!s.vectors.empty())
        doc["vectors"] = s.vectors;
    if (!s.pinned.empty())
        doc["pinned"] = s.pinned;
    if (!s.spins.empty())
        doc["spins"] = s.spins;
    if (!s.circuit.empty()) {
        json ops = json::array();
        for (const auto& o : s.circuit)
            ops.push_back(write_op(o));
        doc["circuit"] = std::move(ops);
    }
    if (s.trotter)
        doc["trotter"] = json{{"field", s.trotter->field}, {"steps", s.trotter->steps}};
    doc["run"] = json{{"seed", s.run.seed},
                      {"starts", s.run.starts},
                      {"iterations", s.run.iterations},
                      {"time_over_deltaJ", s.run.time_over_deltaJ},
                      {"alternations", s.run.alternations},
                      {"side", s.run.side},
                      {"shots", s.run.shots},
                      {"construction_sets", s.run.construction_sets}};
    json c;
    c["tolerance"] = s.checks.tolerance;
    if (s.checks.lambda)
        c["lambda"] = write_interval(*s.checks.lambda);
    if (s.checks.lambda_min)
        c["lambda_min"] = *s.checks.lambda_min;
    if (s.checks.rescale)
        c["rescale"] = write_interval(*s.checks.rescale);
    if (!s.checks.step_row.empty()) {
        c["step_row"] = s.checks.step_row;
        c["step_row_tolerance"] = s.checks.step_row_tolerance;
    }
    if (s.checks.total_time)
        c["total_time_over_deltaJ"] = write_interval(*s.checks.total_time);
    if (s.checks.fidelity_min)
        c["fidelity_min"] = *s.checks.fidelity_min;
    if (s.checks.slope_min)
        c["slope_min"] = *s.checks.slope_min;
    if (s.checks.slope_max)
        c["slope_max"] = *s.checks.slope_max;
    if (s.checks.physical_qubits)
        c["physical_qubits"] = *s.checks.physical_qubits;
    doc["checks"] = std::move(c);
    return doc.dump(2) + "\n";
}

} // namespace lqs
