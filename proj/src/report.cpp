#include "lqsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace lqs {

std::string format_number(double v)
{
    if (v == 0.0)
        return "0"; // folds -0
    return fmt::format("{:.10g}", v);
}

Report::Section& Report::section(const std::string& name)
{
    for (auto& s : sections_)
        if (s.name == name)
            return s;
    sections_.push_back({name, {}});
    return sections_.back();
}

void Report::add(const std::string& sec, const std::string& key, const std::string& value)
{
    auto& s = section(sec);
    for (auto& [k, v] : s.entries)
        if (k == key) {
            v = value;
            return;
        }
    s.entries.emplace_back(key, value);
}

void Report::add(const std::string& sec, const std::string& key, const char* value)
{
    add(sec, key, std::string(value));
}

void Report::add(const std::string& sec, const std::string& key, double value) { add(sec, key, format_number(value)); }

void Report::add(const std::string& sec, const std::string& key, std::size_t value)
{
    add(sec, key, std::to_string(value));
}

void Report::add(const std::string& sec, const std::string& key, bool value)
{
    add(sec, key, std::string(value ? "true" : "false"));
}

void Report::check(const std::string& name, bool ok, const std::string& detail)
{
    if (!ok)
        ++failures_;
    add("checks", name, fmt::format("{} ({})", ok ? "pass" : "FAIL", detail));
}

std::optional<std::string> Report::find(const std::string& sec, const std::string& key) const
{
    for (const auto& s : sections_)
        if (s.name == sec)
            for (const auto& [k, v] : s.entries)
                if (k == key)
                    return v;
    return std::nullopt;
}

std::string Report::text() const
{
    std::string out;
    for (const auto& s : sections_) {
        if (!out.empty())
            out += '\n';
        out += fmt::format("[{}]\n", s.name);
        for (const auto& [k, v] : s.entries)
            out += fmt::format("{} = {}\n", k, v);
    }
    return out;
}

std::string Report::records() const
{
    std::string out;
    for (const auto& s : sections_)
        for (const auto& [k, v] : s.entries)
            out += fmt::format("{}.{} = {}\n", s.name, k, v);
    return out;
}

InteractionGraph interaction_graph(std::string name, const PairMap& couplings, double zero_threshold)
{
    InteractionGraph g;
    g.name = std::move(name);
    g.vertex_count = couplings.n();
    double largest = 0.0;
    for (double v : couplings.values())
        largest = std::max(largest, std::abs(v));
    for (std::size_t k = 0; k < couplings.pair_count(); ++k) {
        const double v = couplings.values()[k];
        if (largest > 0.0 && std::abs(v) > zero_threshold * largest) {
            const auto [i, j] = couplings.pair(k);
            g.edges.push_back({i, j, v});
        }
    }
    return g;
}

std::vector<std::pair<double, double>> set_centroids(const PhysicalLayout& layout, const Grouping& grouping)
{
    std::vector<std::pair<double, double>> out;
    for (const auto& s : grouping.sets()) {
        double x = 0.0, y = 0.0;
        for (auto q : s) {
            x += layout.position(q).x;
            y += layout.position(q).y;
        }
        out.emplace_back(x / static_cast<double>(s.size()), y / static_cast<double>(s.size()));
    }
    return out;
}

namespace {

double max_weight(const InteractionGraph& g)
{
    double m = 0.0;
    for (const auto& e : g.edges)
        m = std::max(m, std::abs(e.weight));
    return m;
}

std::string quoted(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + '"';
}

std::vector<std::pair<double, double>> drawing_positions(const InteractionGraph& g)
{
    if (g.positions.size() == g.vertex_count)
        return g.positions;
    std::vector<std::pair<double, double>> p;
    const double r = std::max(1.0, static_cast<double>(g.vertex_count) / 3.0);
    for (std::size_t v = 0; v < g.vertex_count; ++v) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(v) / static_cast<double>(g.vertex_count);
        p.emplace_back(r * std::sin(a), -r * std::cos(a));
    }
    return p;
}

} // namespace

std::string render_dot(const InteractionGraph& g)
{
    const double top = max_weight(g);
    std::string out = fmt::format("graph {} {{\n  node [shape=circle];\n", quoted(g.name));
    for (std::size_t v = 0; v < g.vertex_count; ++v)
        out += fmt::format("  {} [label=\"{}\"];\n", v, v + 1);
    for (const auto& e : g.edges) {
        const double width = 0.5 + 3.5 * std::abs(e.weight) / top;
        out += fmt::format("  {} -- {} [penwidth={:.3f}, label=\"{}\"{}];\n", e.i, e.j, width,
                           format_number(e.weight), e.weight < 0.0 ? ", style=dashed" : "");
    }
    return out + "}\n";
}

std::string render_svg(const InteractionGraph& g)
{
    const auto pos = drawing_positions(g);
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    for (std::size_t v = 0; v < pos.size(); ++v) {
        const auto [x, y] = pos[v];
        if (v == 0) {
            x0 = x1 = x;
            y0 = y1 = y;
        }
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    const double scale = 60.0, margin = 40.0;
    auto px = [&](double x) { return margin + (x - x0) * scale; };
    auto py = [&](double y) { return margin + (y - y0) * scale; };
    const double w = 2 * margin + (x1 - x0) * scale, h = 2 * margin + (y1 - y0) * scale;
    const double top = max_weight(g);

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.1f}\" height=\"{:.1f}\" viewBox=\"0 0 {:.1f} {:.1f}\">\n",
        w, h, w, h);
    for (const auto& e : g.edges) {
        out += fmt::format("  <line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\" "
                           "stroke-width=\"{:.3f}\"{}/>\n",
                           px(pos[e.i].first), py(pos[e.i].second), px(pos[e.j].first), py(pos[e.j].second),
                           0.5 + 5.5 * std::abs(e.weight) / top,
                           e.weight < 0.0 ? " stroke-dasharray=\"6 4\"" : "");
    }
    for (std::size_t v = 0; v < pos.size(); ++v)
        out += fmt::format("  <circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"12\" fill=\"white\" stroke=\"black\"/>\n"
                           "  <text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                           px(pos[v].first), py(pos[v].second), px(pos[v].first), py(pos[v].second) + 4.0, v + 1);
    return out + "</svg>\n";
}

} // namespace lqs
