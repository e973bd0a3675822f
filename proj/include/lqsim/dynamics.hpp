#pragma once

// Exact simulation backends: statevectors, diagonal ZZ evolution, Pauli
// string Hamiltonians, Trotter products, the ZZ projection by conjugation
// averaging, many-body Z constructions and pulse-program execution.

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lqsim/lattice.hpp"
#include "lqsim/logical_circuit.hpp"
#include "lqsim/pattern_solver.hpp"
#include "lqsim/pulse_program.hpp"

namespace lqs {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxStatevectorQubits = 24;

/// Bit q of a basis index set means z_q = -1 (qubit q in |1>).
class Statevector {
public:
    /// |0...0>, every z = +1.
    explicit Statevector(std::size_t qubits);
    static Statevector basis(std::size_t qubits, std::size_t index);
    static Statevector from_amplitudes(std::vector<cplx> amplitudes);

    std::size_t qubit_count() const { return qubits_; }
    std::size_t dimension() const { return amps_.size(); }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    std::vector<cplx>& amplitudes() { return amps_; }
    cplx amplitude(std::size_t index) const { return amps_.at(index); }

    void apply_gate(QubitIndex q, const Mat2& m);
    void apply_x(QubitIndex q);
    void apply_cx(QubitIndex control, QubitIndex target);
    void apply_diagonal(const std::vector<cplx>& phases);
    /// amp[z] *= exp(-i t E[z])
    void apply_energies(const std::vector<double>& energy, double t);

    /// Probability that qubit q reads z = -1.
    double probability_minus(QubitIndex q) const;
    /// Born-rule sample of Z on q; collapses and renormalizes. Returns +1 or -1.
    int measure_z(QubitIndex q, std::mt19937_64& rng);
    /// Project onto z_q = value and renormalize; returns the prior probability.
    double project_z(QubitIndex q, int value);

    double norm() const;
    cplx inner(const Statevector& other) const; // <this|other>
    /// |<this|other>|^2
    double fidelity(const Statevector& other) const;

private:
    void check_qubit(QubitIndex q) const;
    std::size_t qubits_;
    std::vector<cplx> amps_;
};

/// E(z) = sum_{a<b} f_ab s_a s_b z_a z_b, restricted to pairs on the same channel.
std::vector<double> zz_energies(const PhysicalLayout& layout, std::span<const double> spins = {},
                                std::span<const std::size_t> channels = {});

/// Logical ZZ Hamiltonian sum lambda_ij Z_i Z_j.
struct LogicalHamiltonian {
    PairMap couplings;
    std::size_t qubit_count() const { return couplings.n(); }
};

std::vector<double> zz_energies(const LogicalHamiltonian& h);

/// exp(-i E t) with the physical couplings scaled by the spin profile.
void evolve_diagonal(Statevector& state, const PhysicalLayout& layout, double t, std::span<const double> spins = {});
void evolve_diagonal(Statevector& state, const LogicalHamiltonian& h, double t);

/// Pauli string over n qubits, ops[q] in {I, X, Y, Z}.
struct PauliTerm {
    double coeff = 0.0;
    std::string ops;
};

class PauliStringHamiltonian {
public:
    explicit PauliStringHamiltonian(std::size_t qubits = 0) : qubits_(qubits) {}

    std::size_t qubit_count() const { return qubits_; }
    const std::vector<PauliTerm>& terms() const { return terms_; }

    void add(double coeff, std::string ops);
    /// Sparse form: letters placed on the listed qubits, identity elsewhere.
    void add(double coeff, std::initializer_list<std::pair<std::size_t, char>> letters);

    bool diagonal() const;
    bool pairwise_commuting() const;
    /// Merge duplicate strings and drop |coeff| <= tol.
    PauliStringHamiltonian simplified(double tol = 1e-14) const;
    Eigen::MatrixXcd dense() const;

    static PauliStringHamiltonian from_logical(const LogicalHamiltonian& h);

private:
    std::size_t qubits_;
    std::vector<PauliTerm> terms_;
};

std::string pauli_string(std::size_t qubits, std::initializer_list<std::pair<std::size_t, char>> letters);
bool paulis_commute(const std::string& a, const std::string& b);
Eigen::MatrixXcd pauli_matrix(const std::string& ops);
void apply_pauli(Statevector& state, const std::string& ops);
/// exp(-i theta P) = cos(theta) - i sin(theta) P.
void pauli_rotation(Statevector& state, const std::string& ops, double theta);

/// Exact exp(-i H t): diagonal fast path, product of rotations for commuting
/// terms, dense Hermitian diagonalization otherwise (at most 12 qubits).
void apply_exponential(Statevector& state, const PauliStringHamiltonian& h, double t);

/// First-order product (prod_j exp(-i H_j T/k))^k, pieces applied in order.
void trotter_evolve(Statevector& state, std::span<const PauliStringHamiltonian> pieces, double total_time,
                    std::size_t steps);

/// Column-by-column matrix of a state map on n qubits.
Eigen::MatrixXcd unitary_of(std::size_t qubits, const std::function<void(Statevector&)>& op);
/// Spectral norm of a - b.
double operator_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);
/// Spectral norm of a - e^{i phi} b with phi aligned to the trace overlap.
double phase_insensitive_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Averaging group generated by Z-string conjugations. Terms whose X/Y support
/// has odd overlap with some generator cancel in the average.
struct ZZProjection {
    PauliStringHamiltonian projected;
    std::vector<std::vector<std::size_t>> generators; // qubits carrying Z in each W_k
    std::vector<std::string> elements;                // all products V of the generators
    double weight() const { return 1.0 / static_cast<double>(elements.size()); }
};

/// Recursive halving of 0..n-1 (ceil/floor split); with complements each W is
/// paired with the Z string on the other half so local X/Y terms also cancel.
std::vector<std::vector<std::size_t>> halving_generators(std::size_t qubits, bool with_complements);
/// One generator per colour class except the last (colour classes of a proper colouring).
std::vector<std::vector<std::size_t>> coloring_generators(std::span<const int> colors, bool with_complements);

ZZProjection zz_projection_transform(const PauliStringHamiltonian& h,
                                     const std::vector<std::vector<std::size_t>>& generators);

/// (prod_V V exp(-i H T/(k|V|)) V)^k, the physical realization of the projection.
void averaged_conjugation_evolve(Statevector& state, const PauliStringHamiltonian& h, const ZZProjection& proj,
                                 double total_time, std::size_t steps);

struct ManyBodyCircuit {
    LogicalCircuit circuit;
    char pivot_operator = 'X'; // A in U exp(-i w X_1) U^dag = exp(-i w A_1 Z_2 ... Z_N)
    int pivot_sign = 1;
    double star_coupling = 1.0;
};

/// exp(-i omega Z_t1 ... Z_tk) on the listed logical qubits (first is the pivot)
/// from a star evolution, a pivot X rotation and the star evolution undone
/// through pivot flips; with to_z the pivot operator is rotated back to Z.
ManyBodyCircuit many_body_z_exact(std::size_t qubit_count, std::span<const std::size_t> targets, double omega,
                                  double star_coupling = 1.0, bool to_z = true);

/// exp(i H_A t) exp(i H_B t) exp(-i H_A t) exp(-i H_B t) for H_A = a X_p Z_q, H_B = b Y_p Z_r.
/// Negative times are realized with negated coupling patterns.
LogicalCircuit many_body_z_commutator(std::size_t qubit_count, std::size_t pivot, std::size_t q, std::size_t r,
                                      double coupling_a, double coupling_b, double t);

struct LogicalRun {
    std::vector<int> registers;
};

/// Execute a logical circuit on a logical statevector.
LogicalRun simulate_logical(Statevector& state, const LogicalCircuit& circuit, std::mt19937_64& rng);

enum class EvolveMode {
    FlipSchedule,   // expand each window into free evolutions and X flips
    EffectiveSpins, // apply the target multipliers directly
};

struct ApplyOptions {
    EvolveMode mode = EvolveMode::FlipSchedule;
};

struct ProgramRun {
    std::vector<int> registers;
    std::size_t flips_applied = 0;
};

ProgramRun apply_program(Statevector& state, const PhysicalLayout& layout, const PulseProgram& program,
                         std::mt19937_64& rng, const ApplyOptions& options = {});

} // namespace lqs
