#pragma once

// Circuits over logical qubits. Logical qubit i is bit i of a logical
// statevector; |0^L> is the code word |+1 ... +1> of its set.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "lqsim/pattern_solver.hpp"
#include "lqsim/pulse_program.hpp"

namespace lqs {

/// Prepare |+^L> on a qubit that is still in |0^L>.
struct PrepPlusOp {
    std::size_t qubit = 0;
};

struct LogicalGateOp {
    std::size_t qubit = 0;
    Mat2 matrix = Mat2::Identity();
    std::string label;
};

/// exp(-i sum lambda_ij Z_i Z_j time); couplings may be negative.
struct LogicalEvolveOp {
    PairMap couplings;
    double time = 0.0;
};

/// Distinguish the two columns of `basis` (orthonormal); outcome +1 for the
/// first column, -1 for the second. The state is left in the measured column.
struct LogicalMeasureOp {
    std::size_t qubit = 0;
    Mat2 basis = Mat2::Identity();
    std::size_t reg = 0;
};

using LogicalOp = std::variant<PrepPlusOp, LogicalGateOp, LogicalEvolveOp, LogicalMeasureOp>;

struct LogicalCircuit {
    std::size_t qubit_count = 0;
    std::vector<LogicalOp> ops;

    void prep_plus(std::size_t i) { ops.emplace_back(PrepPlusOp{i}); }
    void gate(std::size_t i, const Mat2& m, std::string label) { ops.emplace_back(LogicalGateOp{i, m, std::move(label)}); }
    void evolve(PairMap couplings, double time) { ops.emplace_back(LogicalEvolveOp{std::move(couplings), time}); }
    void measure(std::size_t i, const Mat2& basis, std::size_t reg) { ops.emplace_back(LogicalMeasureOp{i, basis, reg}); }
    std::size_t register_count() const;
};

/// Throws std::invalid_argument on out-of-range qubits or malformed ops.
void validate(const LogicalCircuit& circuit);

} // namespace lqs
