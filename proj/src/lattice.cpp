#include "lqsim/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace lqs {

namespace {
constexpr double kCutoffSlack = 1e-9;
}

double distance(const Position& a, const Position& b)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool CouplingLaw::in_range(double d) const
{
    return std::isinf(cutoff) || d <= cutoff + kCutoffSlack;
}

double CouplingLaw::operator()(double d) const
{
    if (!in_range(d))
        return 0.0;
    return coupling_j * std::pow(d * spacing, -alpha);
}

PhysicalLayout::PhysicalLayout(std::vector<Position> positions, CouplingLaw law)
    : positions_(std::move(positions)), law_(law)
{
    if (!(law_.coupling_j > 0.0) || !(law_.alpha >= 0.0) || !(law_.cutoff > 0.0) || !(law_.spacing > 0.0))
        throw std::invalid_argument("coupling law requires J > 0, alpha >= 0, cutoff > 0, spacing > 0");
    const auto m = positions_.size();
    couplings_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double d = distance(positions_[a], positions_[b]);
            if (d < kCutoffSlack)
                throw std::invalid_argument(fmt::format("qubits {} and {} share a position", a, b));
            const double c = law_(d);
            couplings_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = c;
            couplings_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = c;
        }
    }
}

PhysicalLayout PhysicalLayout::square(std::size_t width, std::size_t height, CouplingLaw law)
{
    std::vector<Position> pos;
    pos.reserve(width * height);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
            pos.push_back({static_cast<double>(x), static_cast<double>(y), 0.0});
    return PhysicalLayout(std::move(pos), law);
}

double PhysicalLayout::coupling(QubitIndex a, QubitIndex b) const
{
    if (a == b)
        throw std::invalid_argument("self-coupling is undefined");
    if (a >= size() || b >= size())
        throw std::out_of_range("qubit index outside layout");
    return couplings_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
}

std::vector<std::pair<QubitIndex, QubitIndex>> PhysicalLayout::edges() const
{
    std::vector<QubitIndex> all(size());
    std::iota(all.begin(), all.end(), QubitIndex{0});
    return edges_among(all);
}

std::vector<std::pair<QubitIndex, QubitIndex>> PhysicalLayout::edges_among(std::span<const QubitIndex> qubits) const
{
    std::vector<std::pair<QubitIndex, QubitIndex>> out;
    for (std::size_t u = 0; u < qubits.size(); ++u)
        for (std::size_t v = u + 1; v < qubits.size(); ++v)
            if (coupling(qubits[u], qubits[v]) > 0.0)
                out.emplace_back(std::min(qubits[u], qubits[v]), std::max(qubits[u], qubits[v]));
    return out;
}

Grouping::Grouping(std::size_t qubit_count, std::vector<std::vector<QubitIndex>> sets)
    : qubit_count_(qubit_count), sets_(std::move(sets)), back_(qubit_count)
{
    for (SetIndex i = 0; i < sets_.size(); ++i) {
        if (sets_[i].empty())
            throw std::invalid_argument(fmt::format("set {} is empty", i));
        for (std::size_t k = 0; k < sets_[i].size(); ++k) {
            const auto q = sets_[i][k];
            if (q >= qubit_count_)
                throw std::invalid_argument(fmt::format("set {} references qubit {} outside the layout", i, q));
            if (back_[q])
                throw std::invalid_argument(fmt::format("qubit {} belongs to sets {} and {}", q, back_[q]->set, i));
            back_[q] = SlotRef{i, k};
        }
    }
}

Grouping Grouping::row_major(const PhysicalLayout& layout, std::vector<std::vector<QubitIndex>> sets)
{
    for (auto& s : sets) {
        std::sort(s.begin(), s.end(), [&](QubitIndex a, QubitIndex b) {
            const auto& pa = layout.position(a);
            const auto& pb = layout.position(b);
            if (pa.y != pb.y)
                return pa.y < pb.y;
            if (pa.x != pb.x)
                return pa.x < pb.x;
            return pa.z < pb.z;
        });
    }
    return Grouping(layout.size(), std::move(sets));
}

std::optional<SlotRef> Grouping::locate(QubitIndex q) const
{
    if (q >= back_.size())
        return std::nullopt;
    return back_[q];
}

std::vector<QubitIndex> Grouping::members() const
{
    std::vector<QubitIndex> out;
    for (const auto& s : sets_)
        out.insert(out.end(), s.begin(), s.end());
    return out;
}

InteractionMatrix interaction_matrix(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i, SetIndex j)
{
    if (i >= j)
        throw std::invalid_argument(fmt::format("interaction matrix requires i < j, got ({}, {})", i, j));
    if (j >= grouping.set_count())
        throw std::out_of_range("set index outside grouping");
    const auto& a = grouping.set(i);
    const auto& b = grouping.set(j);
    InteractionMatrix f{i, j, Eigen::MatrixXd(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()))};
    for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t l = 0; l < b.size(); ++l)
            f.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = layout.coupling(a[k], b[l]);
    return f;
}

double effective_coupling(const Eigen::VectorXd& s_i, const InteractionMatrix& f, const Eigen::VectorXd& s_j)
{
    if (s_i.size() != f.values.rows() || s_j.size() != f.values.cols())
        throw std::invalid_argument(fmt::format("dimension mismatch: {} x ({}x{}) x {}", s_i.size(), f.values.rows(),
                                                f.values.cols(), s_j.size()));
    return s_i.dot(f.values * s_j);
}

InteractionTable::InteractionTable(const PhysicalLayout& layout, const Grouping& grouping)
{
    const auto n = grouping.set_count();
    sizes_.reserve(n);
    for (SetIndex i = 0; i < n; ++i)
        sizes_.push_back(grouping.set_size(i));
    upper_.reserve(n * (n - 1) / 2);
    for (SetIndex i = 0; i < n; ++i)
        for (SetIndex j = i + 1; j < n; ++j)
            upper_.push_back(interaction_matrix(layout, grouping, i, j).values);
}

InteractionTable InteractionTable::from_matrices(std::vector<std::size_t> sizes, std::vector<Eigen::MatrixXd> upper)
{
    InteractionTable t;
    const auto n = sizes.size();
    if (upper.size() != n * (n - 1) / 2)
        throw std::invalid_argument("expected one matrix per unordered pair of sets");
    t.sizes_ = std::move(sizes);
    t.upper_ = std::move(upper);
    for (SetIndex i = 0; i < n; ++i)
        for (SetIndex j = i + 1; j < n; ++j) {
            const auto& m = t.upper_[t.pair_index(i, j)];
            if (m.rows() != static_cast<Eigen::Index>(t.sizes_[i]) || m.cols() != static_cast<Eigen::Index>(t.sizes_[j]))
                throw std::invalid_argument(fmt::format("matrix ({}, {}) has wrong shape", i, j));
        }
    return t;
}

std::size_t InteractionTable::pair_index(SetIndex i, SetIndex j) const
{
    const auto n = sizes_.size();
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

const Eigen::MatrixXd& InteractionTable::matrix(SetIndex i, SetIndex j) const
{
    if (i >= j || j >= sizes_.size())
        throw std::invalid_argument(fmt::format("no interaction matrix for ({}, {})", i, j));
    return upper_[pair_index(i, j)];
}

std::string to_string(Connectivity c)
{
    switch (c) {
    case Connectivity::FullyConnected:
        return "fully-connected";
    case Connectivity::Connected:
        return "connected";
    case Connectivity::Disconnected:
        return "disconnected";
    }
    return "unknown";
}

ConnectivityClass classify_set(const PhysicalLayout& layout, const Grouping& grouping, SetIndex i)
{
    const auto& members = grouping.set(i);
    const auto n = members.size();
    ConnectivityClass out;
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t v) {
        while (parent[v] != v)
            v = parent[v] = parent[parent[v]];
        return v;
    };
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l)
            if (layout.coupling(members[k], members[l]) > 0.0) {
                out.edges.emplace_back(k, l);
                parent[find(k)] = find(l);
            }
    std::size_t components = 0;
    for (std::size_t v = 0; v < n; ++v)
        components += find(v) == v ? 1 : 0;
    if (out.edges.size() == n * (n - 1) / 2)
        out.kind = Connectivity::FullyConnected;
    else if (components == 1)
        out.kind = Connectivity::Connected;
    else
        out.kind = Connectivity::Disconnected;
    return out;
}

} // namespace lqs
