#pragma once

// Physical pulse programs: free ZZ evolution windows with a per-qubit spin
// profile, zero-time single-qubit gates, Z measurements and classically
// controlled branches.

#include <algorithm>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lqsim/lattice.hpp"

namespace lqs {

using Mat2 = Eigen::Matrix2cd;

struct EvolveStep {
    double duration = 0.0;
    std::vector<double> spins;         // one per physical qubit
    std::vector<std::size_t> channels; // empty: single channel
};

struct GateStep {
    QubitIndex qubit = 0;
    Mat2 matrix = Mat2::Identity();
    std::string label;
};

/// Writes +1 or -1 (the measured z value) into a classical register.
struct MeasureStep {
    QubitIndex qubit = 0;
    std::size_t reg = 0;
};

/// Writes a fixed value into a classical register (outcome decoding).
struct AssignStep {
    std::size_t reg = 0;
    int value = 0;
};

struct PulseStep;

struct ConditionalStep {
    std::size_t reg = 0;
    int value = 0;
    std::vector<PulseStep> steps;
};

struct PulseStep {
    std::variant<EvolveStep, GateStep, MeasureStep, AssignStep, ConditionalStep> op;
};

class PulseProgram {
public:
    PulseProgram() = default;
    explicit PulseProgram(std::size_t qubit_count) : qubits_(qubit_count) {}

    std::size_t qubit_count() const { return qubits_; }
    std::size_t register_count() const { return registers_; }
    std::size_t allocate_register() { return registers_++; }
    void reserve_registers(std::size_t n) { registers_ = std::max(registers_, n); }

    const std::vector<PulseStep>& steps() const { return steps_; }
    std::vector<PulseStep>& steps() { return steps_; }

    void evolve(double duration, std::vector<double> spins, std::vector<std::size_t> channels = {});
    void gate(QubitIndex q, const Mat2& m, std::string label);
    void measure(QubitIndex q, std::size_t reg);
    void append(const PulseProgram& other);

    /// Evolution time along the longest classical branch.
    double total_time() const;
    std::size_t evolve_count() const;
    std::size_t gate_count() const;

    /// Step table, durations in units of spacing/J.
    std::string listing() const;

private:
    std::size_t qubits_ = 0;
    std::size_t registers_ = 0;
    std::vector<PulseStep> steps_;
};

/// Throws std::invalid_argument when a step references a missing qubit or
/// register, or carries a bad duration or spin profile.
void validate(const PulseProgram& program);

namespace gates {

Mat2 identity();
Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();
Mat2 hadamard();
Mat2 phase_s();
Mat2 phase_s_dagger();
/// exp(-i phi Z / 2)
Mat2 rz(double phi);
/// exp(-i theta X / 2)
Mat2 rx(double theta);
bool is_unitary(const Mat2& m, double tol = 1e-10);

} // namespace gates

} // namespace lqs
