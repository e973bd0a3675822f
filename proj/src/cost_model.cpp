#include "lqsim/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "lqsim/pulse_program.hpp"

namespace lqs {

namespace {

bool power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::size_t log2_exact(std::size_t v)
{
    std::size_t k = 0;
    while ((std::size_t{1} << k) < v)
        ++k;
    return k;
}

void check_time(double t)
{
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("times must be finite and non-negative");
}

// Six pairings of four quarters, in the order L1..L6 of the eight-set case.
constexpr std::array<std::array<int, 2>, 6> kQuarterPairs{{{0, 1}, {2, 3}, {0, 2}, {1, 3}, {0, 3}, {1, 2}}};

void split(const std::vector<std::size_t>& sets, std::vector<std::array<std::size_t, 4>>& out)
{
    if (sets.size() == 4) {
        out.push_back({sets[0], sets[1], sets[2], sets[3]});
        return;
    }
    const auto q = sets.size() / 4;
    for (const auto& [a, b] : kQuarterPairs) {
        std::vector<std::size_t> group;
        group.insert(group.end(), sets.begin() + a * q, sets.begin() + (a + 1) * q);
        group.insert(group.end(), sets.begin() + b * q, sets.begin() + (b + 1) * q);
        split(group, out);
    }
}

} // namespace

double grouping_time(double evolution_time, std::size_t alternations, double prep_time, double hadamard_time)
{
    check_time(evolution_time);
    check_time(prep_time);
    check_time(hadamard_time);
    return evolution_time / 2.0 + 2.0 * static_cast<double>(alternations) * hadamard_time + prep_time;
}

double standard_time(double evolution_time, std::size_t alternations, double rearrange_time)
{
    check_time(evolution_time);
    check_time(rearrange_time);
    return 2.0 * evolution_time + 2.0 * static_cast<double>(alternations) * rearrange_time;
}

SwapCount swap_rearrange_count(std::size_t side)
{
    if (side == 0)
        throw std::invalid_argument("lattice side must be at least 1");
    return {(side * side * side - side) / 6, side - 1};
}

double swap_rearrange_time(std::size_t side, double swap_time)
{
    check_time(swap_time);
    return static_cast<double>(swap_rearrange_count(side).shots) * swap_time;
}

double rearrange_lower_bound(std::size_t side) { return static_cast<double>(side) / kReversalBoundConstant; }

CompiledTimes measure_compiled_times(const PhysicalLayout& layout, const Grouping& grouping,
                                     const std::vector<CxTree>& trees)
{
    static const CxTree none;
    CompiledTimes t;
    for (SetIndex i = 0; i < grouping.set_count(); ++i) {
        const auto& tree = i < trees.size() ? trees[i] : none;
        t.prep_time = std::max(t.prep_time, compile_ghz_prep(layout, grouping, i, tree).total_time());
        t.hadamard_time = std::max(
            t.hadamard_time, compile_logical_unitary(layout, grouping, i, gates::hadamard(), tree).total_time());
    }
    return t;
}

CostReport compare_costs(const CostInputs& in)
{
    CostReport r;
    r.scenario = in.scenario;
    r.evolution_time = in.evolution_time;
    r.alternations = in.alternations;
    r.side = in.side;
    r.prep_time = in.prep_time;
    r.hadamard_time = in.hadamard_time;
    r.rearrange_time = swap_rearrange_time(in.side);
    r.rearrange_bound = rearrange_lower_bound(in.side);
    r.grouping_total = grouping_time(in.evolution_time, in.alternations, in.prep_time, in.hadamard_time);
    r.standard_total = standard_time(in.evolution_time, in.alternations, r.rearrange_time);
    r.standard_qubits = in.side * in.side;
    r.grouping_qubits = in.set_size * in.side * in.side;

    // t_s - t_g = (3T/2 - eta_0) + 2k (zeta - eta_H)
    const double offset = 1.5 * in.evolution_time - in.prep_time;
    const double slope = 2.0 * (r.rearrange_time - in.hadamard_time);
    if (slope != 0.0)
        r.crossover = -offset / slope;
    if (offset > 0.0) {
        r.first_advantage = 0;
    } else if (slope > 0.0) {
        const double k = std::floor(-offset / slope) + 1.0;
        r.first_advantage = static_cast<std::size_t>(std::max(k, 0.0));
    }
    return r;
}

const std::array<int, 16>& block_pattern()
{
    static const std::array<int, 16> pattern{0, 1, 0, 1, 2, 0, 3, 2, 1, 2, 1, 3, 3, 0, 3, 2};
    return pattern;
}

ScalingConstruction polynomial_scaling_construction(std::size_t logical_count)
{
    if (!power_of_two(logical_count) || logical_count < 4)
        throw std::invalid_argument(fmt::format("logical count must be a power of two >= 4, got {}", logical_count));
    ScalingConstruction c;
    c.logical_count = logical_count;
    std::vector<std::size_t> all(logical_count);
    for (std::size_t i = 0; i < logical_count; ++i)
        all[i] = i;
    split(all, c.blocks);
    const auto a = c.blocks.size();
    c.physical_qubits = 16 * a + 4 * (a - 1);
    return c;
}

PhysicalLayout ScalingConstruction::layout() const
{
    const auto width = 5 * blocks.size() - 1;
    return PhysicalLayout::square(width, 4, CouplingLaw{1.0, 1.0, 1.0, 1.0});
}

Grouping ScalingConstruction::grouping() const
{
    const auto width = 5 * blocks.size() - 1;
    std::vector<std::vector<QubitIndex>> sets(logical_count);
    const auto& pattern = block_pattern();
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (std::size_t y = 0; y < 4; ++y) {
            for (std::size_t x = 0; x < 4; ++x) {
                const auto set = blocks[b][static_cast<std::size_t>(pattern[y * 4 + x])];
                sets[set].push_back(y * width + 5 * b + x);
            }
            if (b + 1 < blocks.size()) {
                const auto left = blocks[b][static_cast<std::size_t>(pattern[y * 4 + 3])];
                sets[left].push_back(y * width + 5 * b + 4);
            }
        }
    for (auto& s : sets)
        std::sort(s.begin(), s.end());
    return Grouping(4 * width, std::move(sets));
}

double polynomial_scaling_closed_form(std::size_t logical_count)
{
    return 5.0 / 9.0 * std::pow(static_cast<double>(logical_count), std::log2(6.0)) - 4.0;
}

QuditEmbedding qudit_embedding_count(std::size_t qudits, std::size_t dimension)
{
    if (!power_of_two(dimension) || dimension < 2)
        throw std::invalid_argument(fmt::format("qudit dimension must be a power of two >= 2, got {}", dimension));
    const auto bits = log2_exact(dimension) * qudits;
    QuditEmbedding e;
    e.physical_qubits = bits == 0 ? 0 : bits * (bits - 1);
    e.degenerate = e.physical_qubits == 0;
    return e;
}

} // namespace lqs
