#include "lqsim/flip_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "lqsim/errors.hpp"

namespace lqs {

namespace {

constexpr std::size_t kOracleQubitCap = 20;

// Either a free-evolution interval (flips empty) or a simultaneous flip.
struct Piece {
    double length = 0.0;
    std::vector<QubitIndex> flips;
    bool is_flip() const { return !flips.empty(); }
};

using Sequence = std::vector<Piece>;

Piece evolve(double length) { return Piece{length, {}}; }
Piece flip(std::vector<QubitIndex> q)
{
    std::sort(q.begin(), q.end());
    return Piece{0.0, std::move(q)};
}

void append(Sequence& dst, const Sequence& src) { dst.insert(dst.end(), src.begin(), src.end()); }

Sequence reversed(Sequence s)
{
    std::reverse(s.begin(), s.end());
    return s;
}

std::vector<QubitIndex> symmetric_difference(const std::vector<QubitIndex>& a, const std::vector<QubitIndex>& b)
{
    std::vector<QubitIndex> out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Drop empty intervals, merge adjacent flips (X X = 1) and adjacent intervals.
std::vector<FlipEvent> normalize(const Sequence& seq, double total)
{
    Sequence merged;
    for (const auto& p : seq) {
        if (!p.is_flip() && p.length <= 0.0)
            continue;
        if (merged.empty() || merged.back().is_flip() != p.is_flip()) {
            merged.push_back(p);
        } else if (p.is_flip()) {
            merged.back().flips = symmetric_difference(merged.back().flips, p.flips);
            if (merged.back().flips.empty())
                merged.pop_back();
        } else {
            merged.back().length += p.length;
        }
    }
    std::vector<FlipEvent> events;
    double t = 0.0;
    for (const auto& p : merged) {
        if (p.is_flip()) {
            events.push_back({std::clamp(t / total, 0.0, 1.0), p.flips});
        } else {
            t += p.length;
        }
    }
    return events;
}

void check_spins(std::span<const double> spins)
{
    for (std::size_t q = 0; q < spins.size(); ++q)
        if (!(std::abs(spins[q]) <= 1.0))
            throw std::invalid_argument(fmt::format("spin {} of qubit {} outside [-1, 1]", spins[q], q));
}

Sequence sequential_block(std::span<const double> spins, std::size_t j, double length)
{
    if (j == 0)
        return {evolve(length)};
    const double split = length * (1.0 + spins[j - 1]) / 2.0;
    Sequence out = sequential_block(spins, j - 1, split);
    out.push_back(flip({j - 1}));
    append(out, reversed(sequential_block(spins, j - 1, length - split)));
    out.push_back(flip({j - 1}));
    return out;
}

// Colour level `level` (classes ascending by size) over an interval of given length.
Sequence parallel_block(const std::vector<std::vector<QubitIndex>>& classes, std::span<const double> spins,
                        std::size_t level, double length)
{
    if (level == 0)
        return {evolve(length)};
    const auto& members = classes[level - 1];
    std::vector<std::pair<double, QubitIndex>> times;
    for (auto q : members)
        times.emplace_back(length * (1.0 + spins[q]) / 2.0, q);
    std::stable_sort(times.begin(), times.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    Sequence out;
    double start = 0.0;
    for (std::size_t k = 0; k <= times.size(); ++k) {
        const double stop = k < times.size() ? times[k].first : length;
        auto inner = parallel_block(classes, spins, level - 1, stop - start);
        append(out, k % 2 == 0 ? inner : reversed(std::move(inner)));
        if (k < times.size())
            out.push_back(flip({times[k].second}));
        start = stop;
    }
    out.push_back(flip(members));
    return out;
}

void check_coloring(const Coloring& coloring, std::size_t m)
{
    if (coloring.color.size() != m)
        throw std::invalid_argument(fmt::format("colouring covers {} qubits, spins cover {}", coloring.color.size(), m));
    for (const auto& [a, b] : coloring.edges) {
        if (a >= m || b >= m)
            throw std::invalid_argument("colouring edge references unknown qubit");
        if (coloring.color[a] >= 0 && coloring.color[a] == coloring.color[b])
            throw InfeasibleError(fmt::format("improper colouring: qubits {} and {} share colour {}", a, b, coloring.color[a]));
    }
}

} // namespace

FlipSchedule::FlipSchedule(double tau, std::vector<FlipEvent> events, std::vector<double> target_spins,
                           std::vector<std::size_t> channels)
    : tau_(tau), events_(std::move(events)), spins_(std::move(target_spins)), channels_(std::move(channels))
{
    if (!(tau_ > 0.0))
        throw std::invalid_argument("flip schedule window must be positive");
    if (!channels_.empty() && channels_.size() != spins_.size())
        throw std::invalid_argument("channel map must cover every qubit");
    for (std::size_t e = 1; e < events_.size(); ++e)
        if (events_[e].fraction < events_[e - 1].fraction)
            throw std::invalid_argument("flip events must be time ordered");
}

std::size_t FlipSchedule::flip_count() const
{
    std::size_t n = 0;
    for (const auto& e : events_)
        n += e.qubits.size();
    return n;
}

FlipSchedule FlipSchedule::reversed() const
{
    std::vector<FlipEvent> ev(events_.rbegin(), events_.rend());
    for (auto& e : ev)
        e.fraction = 1.0 - e.fraction;
    return FlipSchedule(tau_, std::move(ev), spins_, channels_);
}

double FlipSchedule::target_multiplier(QubitIndex i, QubitIndex j) const
{
    if (!channels_.empty() && channels_[i] != channels_[j])
        return 0.0;
    return spins_[i] * spins_[j];
}

std::string FlipSchedule::event_table() const
{
    std::string out = "# time/tau  qubits\n";
    for (const auto& e : events_) {
        out += fmt::format("{:.12f}", e.fraction);
        for (auto q : e.qubits)
            out += fmt::format(" {}", q);
        out += '\n';
    }
    return out;
}

Coloring Coloring::greedy(std::size_t qubit_count, const EdgeList& edges)
{
    std::vector<QubitIndex> all(qubit_count);
    std::iota(all.begin(), all.end(), QubitIndex{0});
    return greedy(qubit_count, edges, all);
}

Coloring Coloring::greedy(std::size_t qubit_count, const EdgeList& edges, std::span<const QubitIndex> qubits)
{
    Coloring c;
    c.color.assign(qubit_count, -1);
    c.edges = edges;
    std::vector<char> active(qubit_count, 0);
    for (auto q : qubits)
        active.at(q) = 1;
    std::vector<std::vector<QubitIndex>> adj(qubit_count);
    for (const auto& [a, b] : edges)
        if (active.at(a) && active.at(b)) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
    std::vector<QubitIndex> order(qubits.begin(), qubits.end());
    std::stable_sort(order.begin(), order.end(),
                     [&](QubitIndex a, QubitIndex b) { return adj[a].size() > adj[b].size(); });
    for (auto q : order) {
        std::vector<char> used(adj[q].size() + 1, 0);
        for (auto nb : adj[q])
            if (c.color[nb] >= 0 && static_cast<std::size_t>(c.color[nb]) < used.size())
                used[static_cast<std::size_t>(c.color[nb])] = 1;
        int k = 0;
        while (used[static_cast<std::size_t>(k)])
            ++k;
        c.color[q] = k;
    }
    return c;
}

std::size_t Coloring::color_count() const
{
    int top = -1;
    for (int k : color)
        top = std::max(top, k);
    return static_cast<std::size_t>(top + 1);
}

std::vector<std::vector<QubitIndex>> Coloring::classes() const
{
    std::vector<std::vector<QubitIndex>> out(color_count());
    for (QubitIndex q = 0; q < color.size(); ++q)
        if (color[q] >= 0)
            out[static_cast<std::size_t>(color[q])].push_back(q);
    std::erase_if(out, [](const auto& c) { return c.empty(); });
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    return out;
}

bool Coloring::proper() const
{
    return std::none_of(edges.begin(), edges.end(), [&](const auto& e) {
        return color[e.first] >= 0 && color[e.first] == color[e.second];
    });
}

FlipSchedule sequential_schedule(std::span<const double> spins, double tau)
{
    check_spins(spins);
    if (!(tau > 0.0))
        throw std::invalid_argument("window must be positive");
    if (spins.size() > 24)
        throw std::invalid_argument("sequential schedules grow as 2^m; use a coloured schedule beyond 24 qubits");
    const auto seq = sequential_block(spins, spins.size(), 1.0);
    return FlipSchedule(tau, normalize(seq, 1.0), {spins.begin(), spins.end()});
}

FlipSchedule parallel_schedule(const Coloring& coloring, std::span<const double> spins, double tau)
{
    check_spins(spins);
    if (!(tau > 0.0))
        throw std::invalid_argument("window must be positive");
    check_coloring(coloring, spins.size());
    for (QubitIndex q = 0; q < spins.size(); ++q)
        if (coloring.color[q] < 0 && spins[q] != 1.0)
            throw std::invalid_argument(fmt::format("qubit {} has spin {} but no colour", q, spins[q]));
    const auto classes = coloring.classes();
    const auto seq = parallel_block(classes, spins, classes.size(), 1.0);
    return FlipSchedule(tau, normalize(seq, 1.0), {spins.begin(), spins.end()});
}

FlipSchedule grouped_parallel_schedule(const Grouping& grouping, std::span<const double> spins, double tau)
{
    check_spins(spins);
    if (spins.size() != grouping.qubit_count())
        throw std::invalid_argument("spin vector must cover every layout qubit");
    if (!(tau > 0.0))
        throw std::invalid_argument("window must be positive");
    if (grouping.set_count() <= 1)
        return FlipSchedule(tau, {}, {spins.begin(), spins.end()});
    Coloring c;
    c.color.assign(spins.size(), -1);
    for (SetIndex i = 0; i < grouping.set_count(); ++i)
        for (auto q : grouping.set(i))
            c.color[q] = static_cast<int>(i);
    for (QubitIndex q = 0; q < spins.size(); ++q)
        if (c.color[q] < 0 && spins[q] != 1.0)
            throw std::invalid_argument(fmt::format("qubit {} is outside every set but has spin {}", q, spins[q]));
    const auto classes = c.classes();
    const auto seq = parallel_block(classes, spins, classes.size(), 1.0);
    return FlipSchedule(tau, normalize(seq, 1.0), {spins.begin(), spins.end()});
}

FlipSchedule realize_profile(const EdgeList& edges, std::span<const double> spins,
                             std::span<const std::size_t> channels, double tau)
{
    check_spins(spins);
    if (!(tau > 0.0))
        throw std::invalid_argument("window must be positive");
    const auto m = spins.size();
    if (!channels.empty() && channels.size() != m)
        throw std::invalid_argument("channel map must cover every qubit");

    std::size_t channel_count = 1;
    for (auto c : channels)
        channel_count = std::max(channel_count, c + 1);

    // Silenced qubits go on fresh channels (one per colour of their mutual
    // coupling graph) instead of through the colour recursion.
    std::vector<QubitIndex> silent, moving;
    for (QubitIndex q = 0; q < m; ++q) {
        if (spins[q] == 0.0)
            silent.push_back(q);
        else if (spins[q] != 1.0)
            moving.push_back(q);
    }
    std::vector<std::size_t> ch(channels.begin(), channels.end());
    std::vector<double> inner_spins(spins.begin(), spins.end());
    if (!silent.empty()) {
        if (ch.empty())
            ch.assign(m, 0);
        const auto silent_colors = Coloring::greedy(m, edges, silent);
        for (auto q : silent) {
            ch[q] = channel_count + static_cast<std::size_t>(silent_colors.color[q]);
            inner_spins[q] = 1.0;
        }
        channel_count += silent_colors.color_count();
    }
    const auto coloring = Coloring::greedy(m, edges, moving);
    const auto classes = coloring.classes();
    std::size_t levels = 0;
    while ((std::size_t{1} << levels) < channel_count)
        ++levels;
    const std::size_t slots = std::size_t{1} << levels;
    const double slot = 1.0 / static_cast<double>(slots);
    auto walsh_odd = [](std::size_t channel, std::size_t k) { return std::popcount(channel & k) % 2 == 1; };

    Sequence seq;
    for (std::size_t k = 0; k < slots; ++k) {
        if (k > 0) {
            std::vector<QubitIndex> toggles;
            for (QubitIndex q = 0; q < m; ++q)
                if (!ch.empty() && walsh_odd(ch[q], k) != walsh_odd(ch[q], k - 1))
                    toggles.push_back(q);
            if (!toggles.empty())
                seq.push_back(flip(std::move(toggles)));
        }
        auto inner = parallel_block(classes, inner_spins, classes.size(), slot);
        append(seq, k % 2 == 0 ? inner : reversed(std::move(inner)));
    }
    std::vector<QubitIndex> restore;
    for (QubitIndex q = 0; q < m; ++q)
        if (!ch.empty() && walsh_odd(ch[q], slots - 1))
            restore.push_back(q);
    if (!restore.empty())
        seq.push_back(flip(std::move(restore)));
    return FlipSchedule(tau, normalize(seq, 1.0), {spins.begin(), spins.end()}, std::move(ch));
}

std::size_t parallel_flip_bound(std::span<const std::size_t> class_sizes)
{
    if (class_sizes.empty())
        return 0;
    std::size_t y = 2 * class_sizes[0];
    for (std::size_t j = 1; j < class_sizes.size(); ++j) {
        const auto mj = class_sizes[j];
        y = 2 * mj + y * (mj + 1) - 2 * class_sizes[j - 1] * ((mj + 1) / 2);
    }
    return y;
}

ScheduleCheck verify_schedule(const PhysicalLayout& layout, const FlipSchedule& schedule, PhaseScope scope,
                              const Grouping* grouping)
{
    const auto m = schedule.qubit_count();
    if (m != layout.size())
        throw std::invalid_argument("schedule and layout disagree on qubit count");
    if (m > kOracleQubitCap)
        throw std::invalid_argument(fmt::format("phase oracle limited to {} qubits", kOracleQubitCap));
    if (scope == PhaseScope::InterSetOnly && grouping == nullptr)
        throw std::invalid_argument("inter-set scope needs a grouping");

    struct Term {
        std::size_t a, b;
        double f;
        double target;
    };
    std::vector<Term> terms;
    for (QubitIndex a = 0; a < m; ++a)
        for (QubitIndex b = a + 1; b < m; ++b) {
            const double f = layout.coupling(a, b);
            if (f == 0.0)
                continue;
            if (scope == PhaseScope::InterSetOnly) {
                const auto la = grouping->locate(a);
                const auto lb = grouping->locate(b);
                if (!la || !lb || la->set == lb->set)
                    continue;
            }
            terms.push_back({a, b, f, schedule.target_multiplier(a, b)});
        }

    const std::size_t states = std::size_t{1} << m;
    // Energy of each basis state with raw couplings; bit q set means z_q = -1.
    std::vector<double> energy(states, 0.0);
    std::vector<double> target(states, 0.0);
    for (std::size_t z = 0; z < states; ++z)
        for (const auto& t : terms) {
            const double zz = (((z >> t.a) ^ (z >> t.b)) & 1U) ? -1.0 : 1.0;
            energy[z] += t.f * zz;
            target[z] += t.f * t.target * zz * schedule.tau();
        }

    std::vector<double> phase(states, 0.0);
    std::size_t mask = 0;
    double last = 0.0;
    auto accumulate = [&](double until) {
        const double dt = (until - last) * schedule.tau();
        if (dt > 0.0)
            for (std::size_t z = 0; z < states; ++z)
                phase[z] += dt * energy[z ^ mask];
        last = until;
    };
    for (const auto& e : schedule.events()) {
        accumulate(e.fraction);
        for (auto q : e.qubits)
            mask ^= std::size_t{1} << q;
    }
    accumulate(1.0);

    ScheduleCheck out;
    out.basis_states = states;
    if (mask != 0) {
        out.max_error = std::numeric_limits<double>::infinity();
        return out;
    }
    for (std::size_t z = 0; z < states; ++z)
        out.max_error = std::max(out.max_error, std::abs(phase[z] - target[z]));
    return out;
}

} // namespace lqs
