#pragma once

// Flip schedules: timed instantaneous X flips that turn a free ZZ evolution
// of length tau into one whose pair couplings are multiplied by s_i * s_j.
// Flips are idealized as zero-duration; flips commanded at the same instant
// are merged into one event.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lqsim/lattice.hpp"

namespace lqs {

struct FlipEvent {
    double fraction = 0.0; // time / tau
    std::vector<QubitIndex> qubits;
};

class FlipSchedule {
public:
    FlipSchedule() = default;
    FlipSchedule(double tau, std::vector<FlipEvent> events, std::vector<double> target_spins,
                 std::vector<std::size_t> channels = {});

    double tau() const { return tau_; }
    const std::vector<FlipEvent>& events() const { return events_; }
    const std::vector<double>& target_spins() const { return spins_; }
    /// Per-qubit channel; couplings between different channels are cancelled. Empty means one channel.
    const std::vector<std::size_t>& channels() const { return channels_; }
    std::size_t qubit_count() const { return spins_.size(); }
    std::size_t flip_count() const;
    double time(const FlipEvent& e) const { return e.fraction * tau_; }

    /// Same flips mirrored in time (t -> tau - t).
    FlipSchedule reversed() const;

    /// Target multiplier on coupling (i, j): s_i s_j, zero across channels.
    double target_multiplier(QubitIndex i, QubitIndex j) const;

    /// Columns: time/tau, flipped qubits.
    std::string event_table() const;

private:
    double tau_ = 0.0;
    std::vector<FlipEvent> events_;
    std::vector<double> spins_;
    std::vector<std::size_t> channels_;
};

using EdgeList = std::vector<std::pair<QubitIndex, QubitIndex>>;

/// Colour per qubit over an interaction graph; qubits with colour -1 are not scheduled.
struct Coloring {
    std::vector<int> color;
    EdgeList edges;

    /// Largest-degree-first greedy colouring of the given qubits.
    static Coloring greedy(std::size_t qubit_count, const EdgeList& edges, std::span<const QubitIndex> qubits);
    static Coloring greedy(std::size_t qubit_count, const EdgeList& edges);

    std::size_t color_count() const;
    /// Colour classes ordered by ascending size (ties by colour id).
    std::vector<std::vector<QubitIndex>> classes() const;
    bool proper() const;
};

FlipSchedule sequential_schedule(std::span<const double> spins, double tau);
FlipSchedule parallel_schedule(const Coloring& coloring, std::span<const double> spins, double tau);
/// Sets act as colour classes; only inter-set multipliers are guaranteed.
FlipSchedule grouped_parallel_schedule(const Grouping& grouping, std::span<const double> spins, double tau);

/// Schedule for a spin profile plus channel assignment. Qubits with spin 1 on
/// channel 0 never flip, zero-spin qubits are moved to extra channels, and the
/// remaining qubits are coloured greedily over `edges`.
FlipSchedule realize_profile(const EdgeList& edges, std::span<const double> spins,
                             std::span<const std::size_t> channels, double tau);

/// The bound y_kappa on flips for colour classes of the given sizes (ascending).
std::size_t parallel_flip_bound(std::span<const std::size_t> class_sizes);

enum class PhaseScope { AllPairs, InterSetOnly };

struct ScheduleCheck {
    double max_error = 0.0;
    std::size_t basis_states = 0;
    bool passed(double tol) const { return max_error < tol; }
};

/// Brute-force phase oracle over all 2^m basis states (m <= 20).
ScheduleCheck verify_schedule(const PhysicalLayout& layout, const FlipSchedule& schedule,
                              PhaseScope scope = PhaseScope::AllPairs, const Grouping* grouping = nullptr);

} // namespace lqs
