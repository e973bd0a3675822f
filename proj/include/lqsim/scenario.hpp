#pragma once

// Scenario configs: a JSON document describing a layout, a grouping, a target
// pattern and run options. Named presets are expanded into explicit data when
// a scenario is loaded, and serialize() writes the expanded form, so every
// run is reproducible from its written config alone.
//
// Physical quantities carry their unit in the key: lengths in units of the
// lattice spacing delta (`spacing_delta`, `cutoff_delta`), couplings in units
// of J (`coupling_J`), times in units of delta/J (`time_over_deltaJ`).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lqsim/lattice.hpp"
#include "lqsim/logical_circuit.hpp"
#include "lqsim/pattern_solver.hpp"

namespace lqs {

struct LayoutSpec {
    std::size_t width = 0;
    std::size_t height = 0;
    double spacing_delta = 1.0;
    double alpha = 1.0;
    std::optional<double> cutoff_delta; // empty: unlimited range
    double coupling_J = 1.0;

    CouplingLaw law() const;
    PhysicalLayout build() const;
};

struct GroupingSpec {
    std::string preset; // informational once expanded
    std::vector<std::vector<QubitIndex>> sets;
    /// Periodic class of each set (sets of one class share a vector); empty: one class per set.
    std::vector<std::size_t> set_class;
    /// Lattice coordinate of each set, used by direction patterns; may be empty.
    std::vector<std::vector<int>> coordinates;
};

struct PatternEntry {
    std::size_t i = 0;
    std::size_t j = 0;
    double value = 0.0;
};

/// A lattice direction between two sets: pairs whose coordinates differ by
/// `offset` get `weight`, optionally only when the first set is of `from_class`.
struct PatternDirection {
    std::vector<int> offset;
    double weight = 0.0;
    std::optional<std::size_t> from_class;
};

struct PatternSpec {
    bool ratio_form = true;
    std::string preset; // "", "star", "complete", "lattice", "cube-full", "cube-nearest"
    std::vector<PatternDirection> directions;
    std::size_t logical_qubits = 0;
    std::vector<PatternEntry> pairs; // nonzero entries, i < j, lexicographic

    PairMap entries() const;
    TargetPattern target() const;
};

struct CircuitOpSpec {
    std::string op; // prep_plus | gate | evolve | measure
    std::size_t qubit = 0;
    std::string gate;  // I X Y Z H S Sdg Rx Rz
    double angle = 0.0; // Rx / Rz
    double time_over_deltaJ = 0.0;
    std::vector<PatternEntry> pairs;
    std::string basis = "Z"; // Z X Y
    std::size_t reg = 0;
};

struct TrotterSpec {
    double field = 1.0; // transverse X field on every logical qubit, units of J/delta
    std::vector<std::size_t> steps;
};

struct RunSpec {
    std::uint64_t seed = 1;
    std::size_t starts = 64;
    std::size_t iterations = 2000;
    double time_over_deltaJ = 1.0;
    std::size_t alternations = 0;
    std::size_t side = 4;
    std::size_t shots = 1000;
    std::size_t construction_sets = 0; // logical count for the polynomial scaling construction, 0 = none
};

struct Interval {
    double value = 0.0;
    double tolerance = 0.0;
    bool contains(double x) const { return x >= value - tolerance && x <= value + tolerance; }
};

struct CheckSpec {
    double tolerance = 1e-9;
    std::optional<Interval> lambda;
    std::optional<double> lambda_min;
    std::optional<Interval> rescale;
    std::vector<double> step_row;
    double step_row_tolerance = 1e-3;
    std::optional<Interval> total_time;
    std::optional<double> fidelity_min;
    std::optional<double> slope_min;
    std::optional<double> slope_max;
    std::optional<std::size_t> physical_qubits;
};

struct Scenario {
    std::string name;
    std::string description;
    std::string action = "verify";
    bool reconstructed = false;
    std::optional<LayoutSpec> layout;
    std::optional<GroupingSpec> grouping;
    std::optional<PatternSpec> pattern;
    /// Class vectors (one per class) as written; expanded into `vectors`.
    std::vector<std::vector<double>> class_vectors;
    std::vector<std::vector<double>> vectors;
    /// Per-set pinned choices for the sequential solve; empty rows are free.
    std::vector<std::vector<double>> pinned;
    /// Physical spin profile for `schedule`, one per layout qubit.
    std::vector<double> spins;
    std::vector<CircuitOpSpec> circuit;
    std::optional<TrotterSpec> trotter;
    RunSpec run;
    CheckSpec checks;

    std::size_t logical_count() const;
    Grouping build_grouping() const;
    LogicalCircuit build_circuit() const;
};

/// Parse and expand presets; throws ConfigError on malformed input or unknown presets.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
/// Canonical expanded form: fixed key order, two-space indent, trailing newline.
std::string serialize(const Scenario& scenario);

} // namespace lqs
