#pragma once

// Wall-time accounting for the grouping method against SWAP-based
// Hamiltonian simulation, plus the qubit-count constructions. Times are in
// units of spacing/J.

#include <array>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lqsim/lattice.hpp"
#include "lqsim/logical_compiler.hpp"

namespace lqs {

/// Closed forms for the 8-qubit brick sets on a n.n. lattice.
inline constexpr double kBrickPrepTime = 3.0 * std::numbers::pi / 4.0;
inline constexpr double kBrickHadamardTime = 3.0 * std::numbers::pi / 2.0;
/// Constant in the rearrangement lower bound l / 1.912.
inline constexpr double kReversalBoundConstant = 1.912;

/// t_g = T/2 + 2 k eta_H + eta_0.
double grouping_time(double evolution_time, std::size_t alternations, double prep_time, double hadamard_time);

/// t_s = 2 T + 2 k zeta.
double standard_time(double evolution_time, std::size_t alternations, double rearrange_time);

struct SwapCount {
    std::size_t gates = 0;
    std::size_t shots = 0;
};

/// (l^3 - l)/6 SWAPs in l - 1 parallel shots for the column-shift rearrangement.
SwapCount swap_rearrange_count(std::size_t side);

/// zeta = (l - 1) * swap_time; a SWAP is three CX of pi/4 each by default.
double swap_rearrange_time(std::size_t side, double swap_time = 3.0 * std::numbers::pi / 4.0);
double rearrange_lower_bound(std::size_t side);

/// Prep and Hadamard times measured from compiled programs: sets run in
/// parallel, so each is the slowest set.
struct CompiledTimes {
    double prep_time = 0.0;
    double hadamard_time = 0.0;
};
CompiledTimes measure_compiled_times(const PhysicalLayout& layout, const Grouping& grouping,
                                     const std::vector<CxTree>& trees = {});

struct CostReport {
    std::string scenario;
    double evolution_time = 0.0;
    std::size_t alternations = 0;
    std::size_t side = 0;
    double prep_time = 0.0;
    double hadamard_time = 0.0;
    double rearrange_time = 0.0;
    double rearrange_bound = 0.0;
    double grouping_total = 0.0;
    double standard_total = 0.0;
    /// Real k where t_g = t_s; empty when the two lines are parallel.
    std::optional<double> crossover;
    /// Smallest k >= 0 with t_g < t_s, if any.
    std::optional<std::size_t> first_advantage;
    std::size_t standard_qubits = 0;
    std::size_t grouping_qubits = 0;
};

struct CostInputs {
    std::string scenario = "comparison";
    double evolution_time = 0.0;
    std::size_t alternations = 0;
    std::size_t side = 4;
    double prep_time = kBrickPrepTime;
    double hadamard_time = kBrickHadamardTime;
    std::size_t set_size = 8;
};

CostReport compare_costs(const CostInputs& in);

/// One 4x4 n.n. block with four bonds between every pair of its four sets:
/// entry = index of the block's set (0..3) at y*4 + x.
const std::array<int, 16>& block_pattern();

struct ScalingConstruction {
    std::size_t logical_count = 0;
    std::vector<std::array<std::size_t, 4>> blocks; // logical sets of each 4x4 block
    std::size_t physical_qubits = 0;                // 16 a + 4 (a - 1)

    /// 4 rows, blocks left to right with one separator column between them.
    PhysicalLayout layout() const;
    /// Separator qubits join the set of their left neighbour.
    Grouping grouping() const;
};

/// Recursive six-way construction for N = 2^kappa, kappa >= 2.
ScalingConstruction polynomial_scaling_construction(std::size_t logical_count);
/// (5/9) N^{log2 6} - 4 evaluated in floating point.
double polynomial_scaling_closed_form(std::size_t logical_count);

struct QuditEmbedding {
    std::size_t physical_qubits = 0;
    bool degenerate = false; // formula gives zero
};

/// log2(d) N' (log2(d) N' - 1) for d a power of two.
QuditEmbedding qudit_embedding_count(std::size_t qudits, std::size_t dimension);

} // namespace lqs
