#include "lqsim/logical_compiler.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "lqsim/errors.hpp"

namespace lqs {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGateTol = 1e-12;

bool same_coupling(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

void require_layout_program(const PulseProgram& program, const PhysicalLayout& layout)
{
    if (program.qubit_count() != layout.size())
        throw std::invalid_argument("program and layout disagree on qubit count");
}

void require_set(const Grouping& grouping, SetIndex i)
{
    if (i >= grouping.set_count())
        throw std::invalid_argument(fmt::format("set {} out of range ({} sets)", i, grouping.set_count()));
}

void require_connected(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i)
{
    if (classify_set(layout, grouping, i).kind == Connectivity::Disconnected)
        throw InfeasibleError(fmt::format("set {} is disconnected; redistribute it with delocalize_grouping first", i));
}

const CxTree& tree_or_default(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i, const CxTree& given,
                              CxTree& storage)
{
    if (!given.empty())
        return given;
    storage = default_cx_tree(layout, grouping.set(i));
    return storage;
}

/// Root of a tree; a single-qubit set has none and uses its only qubit.
QubitIndex tree_root(const CxTree& tree, std::span<const QubitIndex> qubits)
{
    return tree.empty() ? qubits.front() : tree.front().first;
}

void check_tree_spans(const CxTree& tree, std::span<const QubitIndex> qubits)
{
    std::vector<QubitIndex> reached;
    if (!tree.empty())
        reached.push_back(tree.front().first);
    for (const auto& [c, t] : tree)
        reached.push_back(t);
    std::vector<QubitIndex> want(qubits.begin(), qubits.end());
    std::sort(reached.begin(), reached.end());
    std::sort(want.begin(), want.end());
    if (qubits.size() > 1 && reached != want)
        throw std::invalid_argument("CX tree does not span the set");
}

bool is_diagonal(const Mat2& u) { return std::abs(u(0, 1)) < kGateTol && std::abs(u(1, 0)) < kGateTol; }
bool is_antidiagonal(const Mat2& u) { return std::abs(u(0, 0)) < kGateTol && std::abs(u(1, 1)) < kGateTol; }

Mat2 diag(std::complex<double> a, std::complex<double> b)
{
    Mat2 m = Mat2::Zero();
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

void append_layers(PulseProgram& program, const PhysicalLayout& layout, const std::vector<CxTree>& layers, bool reverse)
{
    if (reverse) {
        for (auto it = layers.rbegin(); it != layers.rend(); ++it)
            append_cx_layer(program, layout, *it);
    } else {
        for (const auto& l : layers)
            append_cx_layer(program, layout, l);
    }
}

} // namespace

void append_cx(PulseProgram& program, const PhysicalLayout& layout, QubitIndex control, QubitIndex target)
{
    append_cx_layer(program, layout, {{control, target}});
}

void append_cx_layer(PulseProgram& program, const PhysicalLayout& layout, const CxTree& pairs)
{
    require_layout_program(program, layout);
    if (pairs.empty())
        return;
    const auto m = layout.size();
    const double f = layout.coupling(pairs.front().first, pairs.front().second);
    std::vector<bool> is_target(m, false);
    std::vector<std::size_t> degree(m, 0);
    for (const auto& [c, t] : pairs) {
        if (c >= m || t >= m || c == t)
            throw std::invalid_argument(fmt::format("bad CX pair ({}, {})", c, t));
        if (is_target[t])
            throw std::invalid_argument("CX pairs in one layer must have distinct targets");
        is_target[t] = true;
        ++degree[c];
        const double fp = layout.coupling(c, t);
        if (fp == 0.0)
            throw InfeasibleError(fmt::format("qubits {} and {} are uncoupled; route through SWAPs", c, t));
        if (!same_coupling(fp, f))
            throw std::invalid_argument("CX pairs in one layer must share the same coupling");
    }
    for (const auto& [c, t] : pairs)
        if (is_target[c])
            throw std::invalid_argument("a CX target cannot control in the same layer");
    // Gates sharing a control form one star on one channel; its targets must not couple.
    for (std::size_t a = 0; a < pairs.size(); ++a)
        for (std::size_t b = a + 1; b < pairs.size(); ++b)
            if (pairs[a].first == pairs[b].first && layout.coupling(pairs[a].second, pairs[b].second) != 0.0)
                throw std::invalid_argument("targets sharing a control in one layer must be uncoupled");

    std::vector<double> spins(m, 0.0);
    std::vector<std::size_t> channel_of(m, 0);
    std::vector<QubitIndex> controls;
    for (const auto& [c, t] : pairs)
        if (std::find(controls.begin(), controls.end(), c) == controls.end())
            controls.push_back(c);
    std::vector<std::size_t> channels;
    if (controls.size() > 1)
        channels.assign(m, 0);
    for (const auto& [c, t] : pairs) {
        spins[c] = spins[t] = 1.0;
        if (!channels.empty()) {
            const auto k = static_cast<std::size_t>(std::find(controls.begin(), controls.end(), c) - controls.begin());
            channels[c] = channels[t] = k;
        }
    }

    // CZ = e^{i pi/4} (S^dag x S^dag) exp(-i pi/4 Z Z); a control of d gates takes S^dag^d.
    for (const auto& p : pairs)
        program.gate(p.second, gates::hadamard(), "H");
    program.evolve(kPi / (4.0 * f), std::move(spins), std::move(channels));
    for (auto c : controls) {
        const auto d = static_cast<int>(degree[c]);
        program.gate(c, diag(1.0, std::pow(std::complex<double>(0, -1), d)), d == 1 ? "Sdg" : "phase");
    }
    for (const auto& p : pairs) {
        program.gate(p.second, gates::phase_s_dagger(), "Sdg");
        program.gate(p.second, gates::hadamard(), "H");
    }
}

PulseProgram compile_cx(const PhysicalLayout& layout, QubitIndex control, QubitIndex target)
{
    PulseProgram p(layout.size());
    append_cx(p, layout, control, target);
    return p;
}

CxTree default_cx_tree(const PhysicalLayout& layout, std::span<const QubitIndex> qubits)
{
    const auto k = qubits.size();
    if (k <= 1)
        return {};

    // Prefer the strongest couplings when they alone connect the set.
    double strongest = 0.0;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
            strongest = std::max(strongest, std::abs(layout.coupling(qubits[a], qubits[b])));
    if (strongest == 0.0)
        throw InfeasibleError("set has no internal couplings");

    auto adjacency = [&](bool strong_only) {
        std::vector<std::vector<std::size_t>> adj(k);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) {
                if (a == b)
                    continue;
                const double f = std::abs(layout.coupling(qubits[a], qubits[b]));
                if (f > 0.0 && (!strong_only || same_coupling(f, strongest)))
                    adj[a].push_back(b);
            }
        return adj;
    };
    auto distances = [&](const std::vector<std::vector<std::size_t>>& adj, std::size_t src) {
        std::vector<std::size_t> d(k, std::numeric_limits<std::size_t>::max());
        std::deque<std::size_t> queue{src};
        d[src] = 0;
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            for (auto v : adj[u])
                if (d[v] == std::numeric_limits<std::size_t>::max()) {
                    d[v] = d[u] + 1;
                    queue.push_back(v);
                }
        }
        return d;
    };

    auto adj = adjacency(true);
    {
        const auto d = distances(adj, 0);
        if (std::count(d.begin(), d.end(), std::numeric_limits<std::size_t>::max()) > 0)
            adj = adjacency(false);
    }

    // Root at a centre (least eccentricity, first slot on ties).
    std::size_t root = 0;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t s = 0; s < k; ++s) {
        const auto d = distances(adj, s);
        const auto ecc = *std::max_element(d.begin(), d.end());
        if (ecc < best) {
            best = ecc;
            root = s;
        }
    }
    if (best == std::numeric_limits<std::size_t>::max())
        throw InfeasibleError("set is disconnected");

    // BFS tree, then emit edges in broadcast rounds: every informed node
    // passes to its child with the tallest remaining subtree.
    std::vector<std::size_t> parent(k, k), order;
    std::vector<std::vector<std::size_t>> children(k);
    std::deque<std::size_t> queue{root};
    parent[root] = root;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        order.push_back(u);
        for (auto v : adj[u])
            if (parent[v] == k) {
                parent[v] = u;
                children[u].push_back(v);
                queue.push_back(v);
            }
    }
    std::vector<std::size_t> height(k, 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        for (auto c : children[*it])
            height[*it] = std::max(height[*it], height[c] + 1);
    for (auto& c : children)
        std::stable_sort(c.begin(), c.end(), [&](auto a, auto b) { return height[a] > height[b]; });

    CxTree tree;
    std::vector<std::size_t> informed{root}, next_child(k, 0);
    while (tree.size() + 1 < k) {
        std::vector<std::size_t> fresh;
        for (auto u : informed)
            if (next_child[u] < children[u].size()) {
                const auto v = children[u][next_child[u]++];
                tree.emplace_back(qubits[u], qubits[v]);
                fresh.push_back(v);
            }
        informed.insert(informed.end(), fresh.begin(), fresh.end());
    }
    return tree;
}

std::vector<CxTree> cx_layers(const PhysicalLayout& layout, const CxTree& tree)
{
    if (tree.empty())
        return {};
    std::vector<bool> reached(layout.size(), false);
    std::vector<std::size_t> ready_at(layout.size(), std::numeric_limits<std::size_t>::max());
    const auto root = tree.front().first;
    if (root >= layout.size())
        throw std::invalid_argument("CX tree references a missing qubit");
    reached[root] = true;
    for (const auto& [c, t] : tree) {
        if (c >= layout.size() || t >= layout.size())
            throw std::invalid_argument("CX tree references a missing qubit");
        if (!reached[c])
            throw std::invalid_argument(fmt::format("CX tree uses control {} before it is reached", c));
        if (reached[t])
            throw std::invalid_argument(fmt::format("CX tree reaches qubit {} twice", t));
        if (layout.coupling(c, t) == 0.0)
            throw InfeasibleError(fmt::format("CX tree edge ({}, {}) is uncoupled", c, t));
        reached[t] = true;
    }

    std::vector<CxTree> layers;
    std::vector<bool> done(tree.size(), false);
    ready_at[root] = 0;
    std::size_t remaining = tree.size();
    while (remaining > 0) {
        const auto layer = layers.size();
        CxTree current;
        std::vector<bool> target(layout.size(), false), control(layout.size(), false);
        double f = 0.0;
        for (std::size_t e = 0; e < tree.size(); ++e) {
            if (done[e])
                continue;
            const auto [c, t] = tree[e];
            if (ready_at[c] > layer || target[c] || target[t] || control[t])
                continue;
            const double fe = layout.coupling(c, t);
            if (!current.empty() && !same_coupling(fe, f))
                continue;
            bool star_ok = true;
            for (const auto& [c2, t2] : current)
                if (c2 == c && layout.coupling(t2, t) != 0.0)
                    star_ok = false;
            if (!star_ok)
                continue;
            if (current.empty())
                f = fe;
            current.emplace_back(c, t);
            control[c] = true;
            target[t] = true;
            done[e] = true;
            ready_at[t] = layer + 1;
            --remaining;
        }
        layers.push_back(std::move(current));
    }
    return layers;
}

PulseProgram compile_ghz_prep(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i, const CxTree& tree)
{
    require_set(grouping, i);
    PulseProgram p(layout.size());
    const auto& qubits = grouping.set(i);
    if (qubits.size() == 1) {
        p.gate(qubits.front(), gates::hadamard(), "H");
        return p;
    }
    require_connected(layout, grouping, i);
    CxTree storage;
    const auto& t = tree_or_default(layout, grouping, i, tree, storage);
    check_tree_spans(t, qubits);
    p.gate(tree_root(t, qubits), gates::hadamard(), "H");
    append_layers(p, layout, cx_layers(layout, t), false);
    return p;
}

PulseProgram compile_logical_unitary(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i, const Mat2& u,
                                     const CxTree& tree)
{
    require_set(grouping, i);
    if (!gates::is_unitary(u))
        throw std::invalid_argument("logical gate is not unitary");
    PulseProgram p(layout.size());
    const auto& qubits = grouping.set(i);

    if (is_diagonal(u)) {
        p.gate(qubits.front(), diag(u(0, 0), u(1, 1)), "phase");
        return p;
    }
    if (is_antidiagonal(u)) {
        // [[0, b], [c, 0]] = diag(b, c) X, with X^L the transversal flip
        for (auto q : qubits)
            p.gate(q, gates::pauli_x(), "X");
        p.gate(qubits.front(), diag(u(0, 1), u(1, 0)), "phase");
        return p;
    }
    if (qubits.size() == 1) {
        p.gate(qubits.front(), u, "U");
        return p;
    }
    require_connected(layout, grouping, i);
    CxTree storage;
    const auto& t = tree_or_default(layout, grouping, i, tree, storage);
    check_tree_spans(t, qubits);
    const auto layers = cx_layers(layout, t);
    append_layers(p, layout, layers, true);
    p.gate(tree_root(t, qubits), u, "U");
    append_layers(p, layout, layers, false);
    return p;
}

PulseProgram compile_logical_rz(const Grouping& grouping, SetIndex i, double phi, std::span<const double> weights)
{
    require_set(grouping, i);
    const auto& qubits = grouping.set(i);
    PulseProgram p(grouping.qubit_count());
    if (weights.empty()) {
        p.gate(qubits.front(), gates::rz(phi), "Rz");
        return p;
    }
    if (weights.size() != qubits.size())
        throw std::invalid_argument("one weight per qubit of the set is required");
    double total = 0.0;
    for (double w : weights)
        total += w;
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("rotation weights must sum to one");
    for (std::size_t k = 0; k < qubits.size(); ++k)
        if (weights[k] != 0.0)
            p.gate(qubits[k], gates::rz(phi * weights[k]), "Rz");
    return p;
}

PulseProgram compile_decouple(const Grouping& grouping, std::span<const SetIndex> sets, double tau)
{
    if (!(tau > 0.0))
        throw std::invalid_argument("decoupling window must be positive");
    PulseProgram p(grouping.qubit_count());
    std::vector<double> spins(grouping.qubit_count(), 1.0);
    std::vector<std::size_t> channels;
    if (!sets.empty()) {
        channels.assign(grouping.qubit_count(), 0);
        std::vector<bool> seen(grouping.set_count(), false);
        for (std::size_t k = 0; k < sets.size(); ++k) {
            require_set(grouping, sets[k]);
            if (seen[sets[k]])
                throw std::invalid_argument("set listed twice for decoupling");
            seen[sets[k]] = true;
            for (auto q : grouping.set(sets[k]))
                channels[q] = k + 1;
        }
    }
    p.evolve(tau, std::move(spins), std::move(channels));
    return p;
}

Delocalization delocalize_grouping(const PhysicalLayout& layout, const Grouping& from, const Grouping& to)
{
    const auto m = layout.size();
    if (from.qubit_count() != m || to.qubit_count() != m)
        throw std::invalid_argument("groupings must cover the layout");
    if (from.set_count() != to.set_count())
        throw std::invalid_argument("groupings differ in set count");
    for (SetIndex i = 0; i < from.set_count(); ++i)
        if (from.set_size(i) != to.set_size(i))
            throw std::invalid_argument(fmt::format("set {} changes size", i));

    // dest[p]: final position of a grouped qubit now at p. Ungrouped qubits
    // are interchangeable and fill whatever positions remain.
    constexpr auto none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> dest(m, none), wanted(m, none);
    std::vector<bool> member(m, false);
    for (SetIndex i = 0; i < from.set_count(); ++i)
        for (std::size_t k = 0; k < from.set_size(i); ++k) {
            dest[from.set(i)[k]] = to.set(i)[k];
            wanted[to.set(i)[k]] = from.set(i)[k];
            member[from.set(i)[k]] = true;
        }

    // BFS spanning forest of the coupling graph.
    std::vector<std::vector<std::size_t>> adj(m);
    for (const auto& [a, b] : layout.edges()) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<std::size_t> parent(m, none), depth(m, 0), component(m, none), order;
    for (std::size_t s = 0; s < m; ++s) {
        if (component[s] != none)
            continue;
        std::deque<std::size_t> queue{s};
        component[s] = s;
        parent[s] = s;
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            order.push_back(u);
            for (auto v : adj[u])
                if (component[v] == none) {
                    component[v] = s;
                    parent[v] = u;
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
        }
    }
    for (std::size_t p = 0; p < m; ++p)
        if (member[p] && component[p] != component[dest[p]])
            throw InfeasibleError(fmt::format("no coupling path from qubit {} to {}", p, dest[p]));

    // token[p]: original position of the qubit currently at p.
    std::vector<std::size_t> token(m);
    for (std::size_t p = 0; p < m; ++p)
        token[p] = p;
    std::vector<std::size_t> at(m);
    for (std::size_t p = 0; p < m; ++p)
        at[p] = p;

    Delocalization out{PulseProgram(m), {}};
    auto swap_positions = [&](std::size_t a, std::size_t b) {
        std::swap(token[a], token[b]);
        at[token[a]] = a;
        at[token[b]] = b;
        if (!member[token[a]] && !member[token[b]])
            return;
        out.swaps.emplace_back(a, b);
        append_cx(out.program, layout, a, b);
        append_cx(out.program, layout, b, a);
        append_cx(out.program, layout, a, b);
    };
    auto tree_path = [&](std::size_t u, std::size_t v) {
        std::vector<std::size_t> up, down;
        while (depth[u] > depth[v]) {
            up.push_back(u);
            u = parent[u];
        }
        while (depth[v] > depth[u]) {
            down.push_back(v);
            v = parent[v];
        }
        while (u != v) {
            up.push_back(u);
            down.push_back(v);
            u = parent[u];
            v = parent[v];
        }
        up.push_back(u);
        up.insert(up.end(), down.rbegin(), down.rend());
        return up;
    };

    // Leaf-first routing: the deepest remaining vertex is a leaf of the remaining tree.
    std::vector<bool> removed(m, false);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto v = *it;
        std::size_t from_pos = none;
        if (wanted[v] != none) {
            from_pos = at[wanted[v]];
        } else if (member[token[v]]) {
            std::size_t best = none;
            for (std::size_t u = 0; u < m; ++u) {
                if (removed[u] || member[token[u]] || component[u] != component[v])
                    continue;
                const auto len = tree_path(u, v).size();
                if (len < best) {
                    best = len;
                    from_pos = u;
                }
            }
        }
        if (from_pos != none) {
            const auto path = tree_path(from_pos, v);
            for (std::size_t k = 0; k + 1 < path.size(); ++k)
                swap_positions(path[k], path[k + 1]);
        }
        removed[v] = true;
    }
    return out;
}

void append_logical_measurement(PulseProgram& program, const PhysicalLayout& layout, const Grouping& grouping, SetIndex i,
                                const Mat2& basis, std::size_t reg, const MeasurementOptions& options)
{
    require_layout_program(program, layout);
    require_set(grouping, i);
    if (!gates::is_unitary(basis))
        throw std::invalid_argument("measurement basis states must be orthonormal");
    program.reserve_registers(reg + 1);
    const auto& qubits = grouping.set(i);

    if (is_diagonal(basis) || is_antidiagonal(basis) || qubits.size() == 1) {
        // One physical Z readout decides; the code word is left intact.
        const auto q = qubits.front();
        program.gate(q, basis.adjoint(), "basis^dag");
        program.measure(q, reg);
        program.gate(q, basis, "basis");
        return;
    }

    CxTree storage;
    const CxTree* tree = nullptr;
    if (options.restore) {
        require_connected(layout, grouping, i);
        tree = &tree_or_default(layout, grouping, i, options.tree, storage);
        check_tree_spans(*tree, qubits);
    }
    const auto root = tree ? tree_root(*tree, qubits) : qubits.front();

    // X readout of every other qubit; a -1 flips the relative sign of the
    // remaining code words, undone by Z on the root.
    for (auto q : qubits) {
        if (q == root)
            continue;
        const auto scratch = program.allocate_register();
        program.gate(q, gates::hadamard(), "H");
        program.measure(q, scratch);
        ConditionalStep fix{scratch, -1, {}};
        fix.steps.push_back({GateStep{root, gates::pauli_z(), "Z"}});
        if (options.restore)
            fix.steps.push_back({GateStep{q, gates::pauli_x(), "X"}});
        program.steps().push_back({std::move(fix)});
    }
    program.gate(root, basis.adjoint(), "basis^dag");
    program.measure(root, reg);
    if (options.restore) {
        // Root holds |0> or |1>, the rest |0>: basis on the root then encode.
        program.gate(root, basis, "basis");
        append_layers(program, layout, cx_layers(layout, *tree), false);
    }
}

PulseProgram compile_logical_measurement(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i,
                                         const Mat2& basis, const MeasurementOptions& options)
{
    PulseProgram p(layout.size());
    const auto reg = p.allocate_register();
    append_logical_measurement(p, layout, grouping, i, basis, reg, options);
    return p;
}

std::vector<double> embed_spins(const Grouping& grouping, std::span<const Eigen::VectorXd> vectors)
{
    if (vectors.size() != grouping.set_count())
        throw std::invalid_argument("one vector per set is required");
    std::vector<double> spins(grouping.qubit_count(), 0.0);
    for (SetIndex i = 0; i < grouping.set_count(); ++i) {
        if (static_cast<std::size_t>(vectors[i].size()) != grouping.set_size(i))
            throw std::invalid_argument(fmt::format("vector {} has the wrong length", i));
        for (std::size_t k = 0; k < grouping.set_size(i); ++k)
            spins[grouping.set(i)[k]] = vectors[i](static_cast<Eigen::Index>(k));
    }
    return spins;
}

PulseProgram compile_circuit(const PhysicalLayout& layout, const Grouping& grouping, const LogicalCircuit& circuit,
                             const CompileOptions& options)
{
    validate(circuit);
    if (circuit.qubit_count != grouping.set_count())
        throw std::invalid_argument("circuit and grouping disagree on logical qubit count");
    PulseProgram program(layout.size());
    program.reserve_registers(circuit.register_count());
    auto tree_of = [&](SetIndex i) -> const CxTree& {
        static const CxTree empty;
        return i < options.trees.size() ? options.trees[i] : empty;
    };
    std::optional<InteractionTable> table;

    for (const auto& op : circuit.ops) {
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, PrepPlusOp>) {
                    program.append(compile_ghz_prep(layout, grouping, o.qubit, tree_of(o.qubit)));
                } else if constexpr (std::is_same_v<T, LogicalGateOp>) {
                    program.append(compile_logical_unitary(layout, grouping, o.qubit, o.matrix, tree_of(o.qubit)));
                } else if constexpr (std::is_same_v<T, LogicalEvolveOp>) {
                    double peak = 0.0;
                    std::size_t peak_at = 0;
                    for (std::size_t k = 0; k < o.couplings.pair_count(); ++k)
                        if (std::abs(o.couplings.values()[k]) > peak) {
                            peak = std::abs(o.couplings.values()[k]);
                            peak_at = k;
                        }
                    if (o.time == 0.0 || peak == 0.0)
                        return;
                    if (!table)
                        table.emplace(layout, grouping);
                    const auto sol = algorithm1_solve(*table, TargetPattern::exact(o.couplings));
                    const double ratio = sol.couplings.values()[peak_at] / o.couplings.values()[peak_at];
                    if (!(ratio > 0.0))
                        throw VerificationError("solved couplings do not follow the target pattern");
                    for (std::size_t k = 0; k < o.couplings.pair_count(); ++k)
                        if (std::abs(sol.couplings.values()[k] - ratio * o.couplings.values()[k]) >
                            options.solve_tolerance * ratio * peak)
                            throw VerificationError(
                                fmt::format("solved coupling {} misses the target pattern", k));
                    program.evolve(o.time / ratio, embed_spins(grouping, sol.vectors));
                } else {
                    append_logical_measurement(program, layout, grouping, o.qubit, o.basis, o.reg,
                                               MeasurementOptions{true, tree_of(o.qubit)});
                }
            },
            op);
    }
    return program;
}

} // namespace lqs
