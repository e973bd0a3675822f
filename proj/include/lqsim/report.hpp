#pragma once

// Run reports (`key = value` records grouped by section, in insertion order)
// and interaction-graph diagrams (DOT text, optional SVG).

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lqsim/lattice.hpp"
#include "lqsim/pattern_solver.hpp"

namespace lqs {

enum class ReportFormat { Text, Records };

class Report {
public:
    void add(const std::string& section, const std::string& key, const std::string& value);
    void add(const std::string& section, const std::string& key, const char* value);
    void add(const std::string& section, const std::string& key, double value);
    void add(const std::string& section, const std::string& key, std::size_t value);
    void add(const std::string& section, const std::string& key, bool value);
    /// Records a named check; the report fails if any check fails.
    void check(const std::string& name, bool ok, const std::string& detail);

    bool passed() const { return failures_ == 0; }
    std::size_t failure_count() const { return failures_; }
    std::optional<std::string> find(const std::string& section, const std::string& key) const;

    /// `[section]` headers followed by `key = value` lines.
    std::string text() const;
    /// One `section.key = value` line per entry.
    std::string records() const;
    std::string format(ReportFormat f) const { return f == ReportFormat::Text ? text() : records(); }

private:
    struct Section {
        std::string name;
        std::vector<std::pair<std::string, std::string>> entries;
    };
    Section& section(const std::string& name);
    std::vector<Section> sections_;
    std::size_t failures_ = 0;
};

std::string format_number(double v);

struct GraphEdge {
    std::size_t i = 0;
    std::size_t j = 0;
    double weight = 0.0;
};

struct InteractionGraph {
    std::string name;
    std::size_t vertex_count = 0;
    std::vector<GraphEdge> edges; // nonzero couplings, i < j
    /// Drawing positions (set centroids); empty: vertices on a circle.
    std::vector<std::pair<double, double>> positions;
};

/// Edges with |lambda| above `zero_threshold` times the largest |lambda|.
InteractionGraph interaction_graph(std::string name, const PairMap& couplings, double zero_threshold = 1e-9);
/// Set centroids of a grouping on its layout.
std::vector<std::pair<double, double>> set_centroids(const PhysicalLayout& layout, const Grouping& grouping);

/// Undirected DOT graph: pen width proportional to |lambda|, dashed when negative.
std::string render_dot(const InteractionGraph& graph);
std::string render_svg(const InteractionGraph& graph);

} // namespace lqs
