#pragma once

// Solving the bilinear system s_i^T F_ij s_j = lambda_ij for the logical
// vectors of a grouping, by sequential linear solves or by maximizing a
// shared coupling scale under box constraints.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lqsim/lattice.hpp"

namespace lqs {

/// Dense upper-triangular map (i, j), i < j, in lexicographic order.
class PairMap {
public:
    PairMap() = default;
    explicit PairMap(std::size_t n, double fill = 0.0) : n_(n), values_(n * (n > 0 ? n - 1 : 0) / 2, fill) {}

    std::size_t n() const { return n_; }
    std::size_t pair_count() const { return values_.size(); }
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    std::pair<std::size_t, std::size_t> pair(std::size_t index) const;
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    friend bool operator==(const PairMap&, const PairMap&) = default;

private:
    std::size_t index(std::size_t i, std::size_t j) const;
    std::size_t n_ = 0;
    std::vector<double> values_;
};

/// Either explicit couplings lambda_ij, or the ratio form lambda_ij = c_ij * lambda
/// with a free shared scale.
struct TargetPattern {
    PairMap entries;
    bool ratio_form = false;

    std::size_t set_count() const { return entries.n(); }
    static TargetPattern exact(PairMap lambdas);
    static TargetPattern ratios(PairMap ratios);
};

struct LogicalSolution {
    std::vector<Eigen::VectorXd> vectors;
    PairMap couplings;      // realized s_i^T F_ij s_j
    double residual = 0.0;  // Euclidean norm against the (scaled) target
    double target_scale = 1.0;
    std::optional<double> lambda_max;
};

/// Recompute s_i^T F_ij s_j for every pair.
PairMap realized_couplings(const InteractionTable& table, std::span<const Eigen::VectorXd> vectors);

struct LiCheck {
    bool independent = false;
    std::size_t rank = 0;
};

/// Rank test of the rows s_m^T F_mk, m < k (0-based k here is the new set).
LiCheck li_condition_check(std::span<const Eigen::VectorXd> fixed, std::span<const Eigen::MatrixXd> matrices);

/// Divide all vectors by max|s| when it exceeds one; couplings scale by max^-2.
LogicalSolution rescale_solution(std::vector<Eigen::VectorXd> raw, PairMap realized);

struct SequentialSolveOptions {
    std::uint64_t seed = 1;
    std::size_t max_reseeds = 32;
    /// Optional per-set choice. A pinned vector is projected onto the affine
    /// solution set of its step, so rounded published values are accepted.
    std::vector<std::optional<Eigen::VectorXd>> pinned;
};

struct SequentialTrace {
    /// Row coefficients s_m^T F_mk for each step k >= 1, one row per earlier set.
    std::vector<Eigen::MatrixXd> step_rows;
    std::vector<Eigen::VectorXd> raw_vectors;
    double max_abs_component = 0.0;
    std::size_t attempts = 0;
};

LogicalSolution algorithm1_solve(const InteractionTable& table, const TargetPattern& target,
                                 const SequentialSolveOptions& options = {}, SequentialTrace* trace = nullptr);

/// One bilinear constraint x_a^T F x_b = ratio * lambda over shared variable vectors.
/// a == b is allowed (periodic patterns reuse the same vector for many sets).
struct BilinearTerm {
    std::size_t a = 0;
    std::size_t b = 0;
    Eigen::MatrixXd f;
    double ratio = 0.0;
    std::string label;
};

struct BilinearProblem {
    std::vector<std::size_t> dims;
    std::vector<BilinearTerm> terms;
};

/// One variable per set.
BilinearProblem make_problem(const InteractionTable& table, const TargetPattern& pattern);
/// Sets share the variable vector of their class; duplicate terms are merged.
BilinearProblem make_problem(const InteractionTable& table, const TargetPattern& pattern,
                             std::span<const std::size_t> set_class);

struct MaximizeOptions {
    std::size_t starts = 64;
    std::size_t iterations = 2000;
    std::size_t penalty_period = 200;
    double penalty_growth = 10.0;
    double tolerance = 1e-6;
    std::uint64_t seed = 1;
    std::size_t threads = 0; // 0 = hardware concurrency
};

struct CouplingOptimum {
    std::vector<Eigen::VectorXd> variables;
    double lambda = 0.0;
    double residual = 0.0;      // max |g_t - c_t lambda|
    std::size_t feasible_starts = 0;
    std::vector<double> best_so_far; // per start, in start order
};

CouplingOptimum maximize_coupling(const BilinearProblem& problem, const MaximizeOptions& options = {});
LogicalSolution maximize_coupling(const InteractionTable& table, const TargetPattern& pattern,
                                  const MaximizeOptions& options = {});

struct PairCheck {
    std::size_t i = 0;
    std::size_t j = 0;
    double expected = 0.0;
    double realized = 0.0;
    bool ok = false;
};

struct PatternReport {
    std::vector<PairCheck> pairs;
    double scale = 0.0;         // fitted lambda (ratio form) or target scale (exact form)
    double max_deviation = 0.0; // max |realized - expected| / reference
    double tolerance = 0.0;
    bool passed = false;
    bool box_ok = true;
};

/// Recompute all couplings and compare with the pattern. Deviations are
/// measured relative to the pattern's largest |expected| coupling.
PatternReport verify_pattern(const LogicalSolution& solution, const InteractionTable& table,
                             const TargetPattern& pattern, double tolerance);

} // namespace lqs
