#pragma once

// Physical layer: qubit geometry, the distance-dependent ZZ coupling law,
// partitions of the qubits into ordered logical sets and the interaction
// matrices between those sets.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lqs {

using QubitIndex = std::size_t;
using SetIndex = std::size_t;

struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

double distance(const Position& a, const Position& b);

/// Coupling law J * f(d) with f(d) = (d*spacing)^-alpha for d <= cutoff, zero beyond.
/// Distances and the cutoff are measured in units of the lattice spacing.
struct CouplingLaw {
    double coupling_j = 1.0;
    double alpha = 1.0;
    double cutoff = std::numeric_limits<double>::infinity();
    double spacing = 1.0;

    double operator()(double d) const;
    bool in_range(double d) const;
};

class PhysicalLayout {
public:
    PhysicalLayout(std::vector<Position> positions, CouplingLaw law);

    /// width x height square lattice, qubit index = y*width + x.
    static PhysicalLayout square(std::size_t width, std::size_t height, CouplingLaw law);

    std::size_t size() const { return positions_.size(); }
    const std::vector<Position>& positions() const { return positions_; }
    const Position& position(QubitIndex q) const { return positions_.at(q); }
    const CouplingLaw& law() const { return law_; }

    /// J*f(|r_a - r_b|); throws std::invalid_argument for a == b.
    double coupling(QubitIndex a, QubitIndex b) const;

    /// Symmetric m x m matrix of couplings, zero diagonal.
    const Eigen::MatrixXd& coupling_matrix() const { return couplings_; }

    /// Pairs (a, b), a < b, with nonzero coupling.
    std::vector<std::pair<QubitIndex, QubitIndex>> edges() const;
    std::vector<std::pair<QubitIndex, QubitIndex>> edges_among(std::span<const QubitIndex> qubits) const;

private:
    std::vector<Position> positions_;
    CouplingLaw law_;
    Eigen::MatrixXd couplings_;
};

struct SlotRef {
    SetIndex set;
    std::size_t slot;
};

/// Partition of (a subset of) the layout qubits into ordered sets. The slot
/// order inside a set fixes the component order of its logical vector.
class Grouping {
public:
    Grouping(std::size_t qubit_count, std::vector<std::vector<QubitIndex>> sets);

    /// Same sets, each sorted row-major by position (y, then x, then z).
    static Grouping row_major(const PhysicalLayout& layout, std::vector<std::vector<QubitIndex>> sets);

    std::size_t set_count() const { return sets_.size(); }
    std::size_t qubit_count() const { return qubit_count_; }
    const std::vector<std::vector<QubitIndex>>& sets() const { return sets_; }
    const std::vector<QubitIndex>& set(SetIndex i) const { return sets_.at(i); }
    std::size_t set_size(SetIndex i) const { return sets_.at(i).size(); }
    std::optional<SlotRef> locate(QubitIndex q) const;
    std::vector<QubitIndex> members() const;

    friend bool operator==(const Grouping& a, const Grouping& b) { return a.sets_ == b.sets_; }

private:
    std::size_t qubit_count_;
    std::vector<std::vector<QubitIndex>> sets_;
    std::vector<std::optional<SlotRef>> back_;
};

struct InteractionMatrix {
    SetIndex i = 0;
    SetIndex j = 0;
    Eigen::MatrixXd values;
};

/// F_ij for i < j; throws std::invalid_argument otherwise.
InteractionMatrix interaction_matrix(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i, SetIndex j);

/// s_i^T F s_j; throws std::invalid_argument on dimension mismatch.
double effective_coupling(const Eigen::VectorXd& s_i, const InteractionMatrix& f, const Eigen::VectorXd& s_j);

/// All inter-set matrices of a grouping, computed once.
class InteractionTable {
public:
    InteractionTable() = default;
    InteractionTable(const PhysicalLayout& layout, const Grouping& grouping);

    std::size_t set_count() const { return sizes_.size(); }
    std::size_t set_size(SetIndex i) const { return sizes_.at(i); }
    const std::vector<std::size_t>& set_sizes() const { return sizes_; }
    const Eigen::MatrixXd& matrix(SetIndex i, SetIndex j) const;

    /// Build from explicit matrices (tests, synthetic instances). Matrices are
    /// given for i < j in lexicographic order.
    static InteractionTable from_matrices(std::vector<std::size_t> sizes, std::vector<Eigen::MatrixXd> upper);

private:
    std::size_t pair_index(SetIndex i, SetIndex j) const;
    std::vector<std::size_t> sizes_;
    std::vector<Eigen::MatrixXd> upper_;
};

enum class Connectivity { FullyConnected, Connected, Disconnected };

std::string to_string(Connectivity c);

struct ConnectivityClass {
    Connectivity kind = Connectivity::Disconnected;
    std::vector<std::pair<std::size_t, std::size_t>> edges; // slot pairs with nonzero coupling
};

ConnectivityClass classify_set(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i);

} // namespace lqs
