#pragma once

// Compilation of logical operations into physical pulse programs. Each set
// encodes one logical qubit in span{|0...0>, |1...1>}. Entangling steps are
// CX layers; every evolution window silences uninvolved qubits through a zero
// spin and separates simultaneous pairs through channels.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lqsim/lattice.hpp"
#include "lqsim/logical_circuit.hpp"
#include "lqsim/pattern_solver.hpp"
#include "lqsim/pulse_program.hpp"

namespace lqs {

/// (control, target) physical qubit pairs.
using CxTree = std::vector<std::pair<QubitIndex, QubitIndex>>;

/// Append CX(control, target) to `program`: H_t, exp(-i pi/4 Z_c Z_t), S^dag on both, H_t.
/// Throws InfeasibleError when the pair is uncoupled.
void append_cx(PulseProgram& program, const PhysicalLayout& layout, QubitIndex control, QubitIndex target);

/// Several equally coupled CX gates in one window. Gates may share a control
/// when their targets are mutually uncoupled; each control gets its own channel.
void append_cx_layer(PulseProgram& program, const PhysicalLayout& layout, const CxTree& pairs);

PulseProgram compile_cx(const PhysicalLayout& layout, QubitIndex control, QubitIndex target);

/// Breadth-first tree over the strongest couplings of the set (all couplings
/// when those leave it disconnected), rooted at a centre, listed in broadcast order.
CxTree default_cx_tree(const PhysicalLayout& layout, std::span<const QubitIndex> qubits);

/// Greedy layering: each layer takes, in list order, gates whose control was
/// reached in an earlier layer, on a fresh target, with the same coupling
/// as the first gate picked. Controls may fan out within a layer.
std::vector<CxTree> cx_layers(const PhysicalLayout& layout, const CxTree& tree);

/// H on the tree root, then the CX tree. Maps |0^L> to |+^L>. An empty tree
/// selects default_cx_tree. Throws InfeasibleError for disconnected sets.
PulseProgram compile_ghz_prep(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i,
                              const CxTree& tree = {});

/// Logical 2x2 unitary on set i. Diagonal and anti-diagonal unitaries are
/// zero-time gates; the rest decode through the tree, act on the root and encode.
PulseProgram compile_logical_unitary(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i,
                                     const Mat2& u, const CxTree& tree = {});

/// Logical R_z(phi) as phases phi * w_k on the qubits of the set, sum w_k = 1.
/// An empty weight vector puts the whole phase on the first qubit.
PulseProgram compile_logical_rz(const Grouping& grouping, SetIndex i, double phi, std::span<const double> weights = {});

/// One free window of length tau where the listed sets sit on their own
/// channels, cancelling every coupling that leaves them.
PulseProgram compile_decouple(const Grouping& grouping, std::span<const SetIndex> sets, double tau);

struct Delocalization {
    PulseProgram program;
    std::vector<std::pair<QubitIndex, QubitIndex>> swaps;
};

/// Route qubit from.set(i)[k] to to.set(i)[k] by SWAPs (three CX each) along a
/// spanning tree of the coupling graph. Sets must match in size.
Delocalization delocalize_grouping(const PhysicalLayout& layout, const Grouping& from, const Grouping& to);

struct MeasurementOptions {
    /// Re-encode the measured column after readout (needs a connected set).
    bool restore = true;
    CxTree tree = {};
};

/// Distinguish the columns of `basis` on set i. Outcome +1 (first column) or
/// -1 is written to `reg`; scratch registers are allocated from the program.
void append_logical_measurement(PulseProgram& program, const PhysicalLayout& layout, const Grouping& grouping,
                                SetIndex i, const Mat2& basis, std::size_t reg, const MeasurementOptions& options = {});

PulseProgram compile_logical_measurement(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i,
                                         const Mat2& basis, const MeasurementOptions& options = {});

/// Spins placing each set's vector on its qubits; qubits outside the grouping get 0.
std::vector<double> embed_spins(const Grouping& grouping, std::span<const Eigen::VectorXd> vectors);

struct CompileOptions {
    /// Trees per set; missing entries fall back to default_cx_tree.
    std::vector<CxTree> trees;
    double solve_tolerance = 1e-9;
};

/// Whole logical circuit. Evolve ops are solved for per-set vectors and the
/// window stretched by target / realized coupling.
PulseProgram compile_circuit(const PhysicalLayout& layout, const Grouping& grouping, const LogicalCircuit& circuit,
                             const CompileOptions& options = {});

} // namespace lqs
