#include "lqsim/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "lqsim/flip_scheduler.hpp"
#include "lqsim/kernels.hpp"

namespace lqs {

namespace {

constexpr std::size_t kDenseExponentialCap = 12;

struct PauliMasks {
    std::size_t x = 0; // X or Y
    std::size_t z = 0; // Z or Y
    unsigned y = 0;
};

PauliMasks masks_of(const std::string& ops)
{
    PauliMasks m;
    for (std::size_t q = 0; q < ops.size(); ++q) {
        switch (ops[q]) {
        case 'I':
            break;
        case 'X':
            m.x |= std::size_t{1} << q;
            break;
        case 'Y':
            m.x |= std::size_t{1} << q;
            m.z |= std::size_t{1} << q;
            ++m.y;
            break;
        case 'Z':
            m.z |= std::size_t{1} << q;
            break;
        default:
            throw std::invalid_argument(fmt::format("bad Pauli letter '{}' in {}", ops[q], ops));
        }
    }
    return m;
}

cplx i_power(unsigned k)
{
    switch (k % 4) {
    case 0:
        return {1, 0};
    case 1:
        return {0, 1};
    case 2:
        return {-1, 0};
    default:
        return {0, -1};
    }
}

// P|z> = i^{ny} (-1)^{|z & zmask|} |z ^ xmask>
std::vector<cplx> pauli_applied(const std::vector<cplx>& amps, const PauliMasks& m)
{
    std::vector<cplx> out(amps.size());
    const cplx base = i_power(m.y);
    for (std::size_t z = 0; z < amps.size(); ++z) {
        const double sign = (std::popcount(z & m.z) & 1) ? -1.0 : 1.0;
        out[z ^ m.x] = base * sign * amps[z];
    }
    return out;
}

// Product of two single-qubit Pauli letters: a*b = phase * c, phase as a power of i.
std::pair<unsigned, char> letter_product(char a, char b)
{
    if (a == 'I')
        return {0, b};
    if (b == 'I')
        return {0, a};
    if (a == b)
        return {0, 'I'};
    static const std::string cyc = "XYZ";
    const auto ia = cyc.find(a);
    const auto ib = cyc.find(b);
    const char c = cyc[3 - ia - ib];
    return {(ib == (ia + 1) % 3) ? 1U : 3U, c};
}

struct SignedPauli {
    unsigned phase = 0; // power of i
    std::string ops;
};

SignedPauli multiply(const SignedPauli& a, const SignedPauli& b)
{
    SignedPauli out{(a.phase + b.phase) % 4, a.ops};
    for (std::size_t q = 0; q < a.ops.size(); ++q) {
        const auto [p, c] = letter_product(a.ops[q], b.ops[q]);
        out.phase = (out.phase + p) % 4;
        out.ops[q] = c;
    }
    return out;
}

void check_qubit_count(std::size_t m)
{
    if (m > kMaxStatevectorQubits)
        throw std::invalid_argument(fmt::format("statevector limited to {} qubits, got {}", kMaxStatevectorQubits, m));
}

} // namespace

// ---------------------------------------------------------------- Statevector

Statevector::Statevector(std::size_t qubits) : qubits_(qubits)
{
    check_qubit_count(qubits);
    amps_.assign(std::size_t{1} << qubits, cplx{0.0, 0.0});
    amps_[0] = 1.0;
}

Statevector Statevector::basis(std::size_t qubits, std::size_t index)
{
    Statevector s(qubits);
    if (index >= s.dimension())
        throw std::invalid_argument("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
}

Statevector Statevector::from_amplitudes(std::vector<cplx> amplitudes)
{
    const auto n = amplitudes.size();
    if (n == 0 || !std::has_single_bit(n))
        throw std::invalid_argument("amplitude count must be a power of two");
    Statevector s(static_cast<std::size_t>(std::countr_zero(n)));
    s.amps_ = std::move(amplitudes);
    return s;
}

void Statevector::check_qubit(QubitIndex q) const
{
    if (q >= qubits_)
        throw std::invalid_argument(fmt::format("qubit {} out of range for {} qubits", q, qubits_));
}

void Statevector::apply_gate(QubitIndex q, const Mat2& m)
{
    check_qubit(q);
    const cplx mm[4] = {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
    kernels::active().apply_single(amps_.data(), amps_.size(), static_cast<unsigned>(q), mm);
}

void Statevector::apply_x(QubitIndex q)
{
    check_qubit(q);
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t z = 0; z < amps_.size(); ++z)
        if (!(z & bit))
            std::swap(amps_[z], amps_[z | bit]);
}

void Statevector::apply_cx(QubitIndex control, QubitIndex target)
{
    check_qubit(control);
    check_qubit(target);
    if (control == target)
        throw std::invalid_argument("CX needs distinct qubits");
    const std::size_t c = std::size_t{1} << control;
    const std::size_t t = std::size_t{1} << target;
    for (std::size_t z = 0; z < amps_.size(); ++z)
        if ((z & c) && !(z & t))
            std::swap(amps_[z], amps_[z | t]);
}

void Statevector::apply_diagonal(const std::vector<cplx>& phases)
{
    if (phases.size() != amps_.size())
        throw std::invalid_argument("diagonal size mismatch");
    kernels::active().multiply_diagonal(amps_.data(), phases.data(), amps_.size());
}

void Statevector::apply_energies(const std::vector<double>& energy, double t)
{
    if (energy.size() != amps_.size())
        throw std::invalid_argument("energy table size mismatch");
    if (t == 0.0)
        return;
    std::vector<cplx> phases(energy.size());
    for (std::size_t z = 0; z < energy.size(); ++z)
        phases[z] = std::polar(1.0, -energy[z] * t);
    kernels::active().multiply_diagonal(amps_.data(), phases.data(), amps_.size());
}

double Statevector::probability_minus(QubitIndex q) const
{
    check_qubit(q);
    const std::size_t bit = std::size_t{1} << q;
    double p = 0.0;
    for (std::size_t z = 0; z < amps_.size(); ++z)
        if (z & bit)
            p += std::norm(amps_[z]);
    return p;
}

double Statevector::project_z(QubitIndex q, int value)
{
    check_qubit(q);
    if (value != 1 && value != -1)
        throw std::invalid_argument("z value must be +1 or -1");
    const std::size_t bit = std::size_t{1} << q;
    const bool keep_set = value == -1;
    double p = 0.0;
    for (std::size_t z = 0; z < amps_.size(); ++z) {
        if (((z & bit) != 0) == keep_set)
            p += std::norm(amps_[z]);
        else
            amps_[z] = 0.0;
    }
    if (p <= 0.0)
        throw std::invalid_argument("projection onto a zero-probability outcome");
    const double scale = 1.0 / std::sqrt(p);
    for (auto& a : amps_)
        a *= scale;
    return p;
}

int Statevector::measure_z(QubitIndex q, std::mt19937_64& rng)
{
    const double p_minus = probability_minus(q);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int value = u(rng) < p_minus ? -1 : 1;
    project_z(q, value);
    return value;
}

double Statevector::norm() const { return std::sqrt(kernels::active().norm_squared(amps_.data(), amps_.size())); }

cplx Statevector::inner(const Statevector& other) const
{
    if (other.dimension() != dimension())
        throw std::invalid_argument("inner product of states with different sizes");
    return kernels::active().inner(amps_.data(), other.amps_.data(), amps_.size());
}

double Statevector::fidelity(const Statevector& other) const { return std::norm(inner(other)); }

// ------------------------------------------------------------------- energies

std::vector<double> zz_energies(const PhysicalLayout& layout, std::span<const double> spins,
                                std::span<const std::size_t> channels)
{
    const auto m = layout.size();
    check_qubit_count(m);
    if (!spins.empty() && spins.size() != m)
        throw std::invalid_argument("spin profile must cover every qubit");
    if (!channels.empty() && channels.size() != m)
        throw std::invalid_argument("channel map must cover every qubit");
    std::vector<double> energy(std::size_t{1} << m, 0.0);
    const auto& k = kernels::active();
    for (const auto& [a, b] : layout.edges()) {
        if (!channels.empty() && channels[a] != channels[b])
            continue;
        double f = layout.coupling(a, b);
        if (!spins.empty())
            f *= spins[a] * spins[b];
        if (f != 0.0)
            k.accumulate_zz(energy.data(), energy.size(), static_cast<unsigned>(a), static_cast<unsigned>(b), f);
    }
    return energy;
}

std::vector<double> zz_energies(const LogicalHamiltonian& h)
{
    const auto n = h.qubit_count();
    check_qubit_count(n);
    std::vector<double> energy(std::size_t{1} << n, 0.0);
    const auto& k = kernels::active();
    for (std::size_t p = 0; p < h.couplings.pair_count(); ++p) {
        const double f = h.couplings.values()[p];
        if (f == 0.0)
            continue;
        const auto [i, j] = h.couplings.pair(p);
        k.accumulate_zz(energy.data(), energy.size(), static_cast<unsigned>(i), static_cast<unsigned>(j), f);
    }
    return energy;
}

void evolve_diagonal(Statevector& state, const PhysicalLayout& layout, double t, std::span<const double> spins)
{
    if (state.qubit_count() != layout.size())
        throw std::invalid_argument("state and layout disagree on qubit count");
    if (t == 0.0)
        return;
    state.apply_energies(zz_energies(layout, spins), t);
}

void evolve_diagonal(Statevector& state, const LogicalHamiltonian& h, double t)
{
    if (state.qubit_count() != h.qubit_count())
        throw std::invalid_argument("state and Hamiltonian disagree on qubit count");
    if (t == 0.0)
        return;
    state.apply_energies(zz_energies(h), t);
}

// ------------------------------------------------------------- Pauli strings

std::string pauli_string(std::size_t qubits, std::initializer_list<std::pair<std::size_t, char>> letters)
{
    std::string ops(qubits, 'I');
    for (const auto& [q, c] : letters) {
        if (q >= qubits)
            throw std::invalid_argument("Pauli letter on missing qubit");
        ops[q] = c;
    }
    masks_of(ops);
    return ops;
}

bool paulis_commute(const std::string& a, const std::string& b)
{
    if (a.size() != b.size())
        throw std::invalid_argument("Pauli strings of different length");
    unsigned anti = 0;
    for (std::size_t q = 0; q < a.size(); ++q)
        if (a[q] != 'I' && b[q] != 'I' && a[q] != b[q])
            ++anti;
    return anti % 2 == 0;
}

Eigen::MatrixXcd pauli_matrix(const std::string& ops)
{
    const auto m = masks_of(ops);
    const std::size_t dim = std::size_t{1} << ops.size();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const cplx base = i_power(m.y);
    for (std::size_t z = 0; z < dim; ++z) {
        const double sign = (std::popcount(z & m.z) & 1) ? -1.0 : 1.0;
        out(static_cast<Eigen::Index>(z ^ m.x), static_cast<Eigen::Index>(z)) = base * sign;
    }
    return out;
}

void apply_pauli(Statevector& state, const std::string& ops)
{
    if (ops.size() != state.qubit_count())
        throw std::invalid_argument("Pauli string length differs from qubit count");
    state.amplitudes() = pauli_applied(state.amplitudes(), masks_of(ops));
}

void pauli_rotation(Statevector& state, const std::string& ops, double theta)
{
    if (ops.size() != state.qubit_count())
        throw std::invalid_argument("Pauli string length differs from qubit count");
    auto& amps = state.amplitudes();
    const auto p = pauli_applied(amps, masks_of(ops));
    const double c = std::cos(theta);
    const cplx s(0.0, -std::sin(theta));
    for (std::size_t z = 0; z < amps.size(); ++z)
        amps[z] = c * amps[z] + s * p[z];
}

void PauliStringHamiltonian::add(double coeff, std::string ops)
{
    if (ops.size() != qubits_)
        throw std::invalid_argument(fmt::format("Pauli string {} does not span {} qubits", ops, qubits_));
    masks_of(ops);
    terms_.push_back({coeff, std::move(ops)});
}

void PauliStringHamiltonian::add(double coeff, std::initializer_list<std::pair<std::size_t, char>> letters)
{
    add(coeff, pauli_string(qubits_, letters));
}

bool PauliStringHamiltonian::diagonal() const
{
    return std::all_of(terms_.begin(), terms_.end(), [](const PauliTerm& t) {
        return t.ops.find_first_of("XY") == std::string::npos;
    });
}

bool PauliStringHamiltonian::pairwise_commuting() const
{
    for (std::size_t a = 0; a < terms_.size(); ++a)
        for (std::size_t b = a + 1; b < terms_.size(); ++b)
            if (!paulis_commute(terms_[a].ops, terms_[b].ops))
                return false;
    return true;
}

PauliStringHamiltonian PauliStringHamiltonian::simplified(double tol) const
{
    std::map<std::string, double> merged;
    for (const auto& t : terms_)
        merged[t.ops] += t.coeff;
    PauliStringHamiltonian out(qubits_);
    for (const auto& [ops, c] : merged)
        if (std::abs(c) > tol)
            out.terms_.push_back({c, ops});
    return out;
}

Eigen::MatrixXcd PauliStringHamiltonian::dense() const
{
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << qubits_);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& t : terms_)
        h += t.coeff * pauli_matrix(t.ops);
    return h;
}

PauliStringHamiltonian PauliStringHamiltonian::from_logical(const LogicalHamiltonian& h)
{
    PauliStringHamiltonian out(h.qubit_count());
    for (std::size_t p = 0; p < h.couplings.pair_count(); ++p) {
        const double c = h.couplings.values()[p];
        if (c == 0.0)
            continue;
        const auto [i, j] = h.couplings.pair(p);
        out.add(c, {{i, 'Z'}, {j, 'Z'}});
    }
    return out;
}

void apply_exponential(Statevector& state, const PauliStringHamiltonian& h, double t)
{
    const auto n = h.qubit_count();
    if (state.qubit_count() != n)
        throw std::invalid_argument("state and Hamiltonian disagree on qubit count");
    if (t == 0.0 || h.terms().empty())
        return;
    if (h.diagonal()) {
        std::vector<double> energy(state.dimension(), 0.0);
        for (const auto& term : h.terms()) {
            const auto zm = masks_of(term.ops).z;
            for (std::size_t z = 0; z < energy.size(); ++z)
                energy[z] += (std::popcount(z & zm) & 1) ? -term.coeff : term.coeff;
        }
        state.apply_energies(energy, t);
        return;
    }
    if (h.pairwise_commuting()) {
        for (const auto& term : h.terms())
            pauli_rotation(state, term.ops, term.coeff * t);
        return;
    }
    if (n > kDenseExponentialCap)
        throw std::invalid_argument(
            fmt::format("non-commuting exponential limited to {} qubits, got {}", kDenseExponentialCap, n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.dense());
    const Eigen::VectorXcd phases =
        eig.eigenvalues().unaryExpr([t](double e) { return std::polar(1.0, -e * t); });
    Eigen::Map<Eigen::VectorXcd> psi(state.amplitudes().data(), static_cast<Eigen::Index>(state.dimension()));
    const Eigen::VectorXcd coeffs = eig.eigenvectors().adjoint() * psi;
    psi = eig.eigenvectors() * phases.cwiseProduct(coeffs);
}

void trotter_evolve(Statevector& state, std::span<const PauliStringHamiltonian> pieces, double total_time,
                    std::size_t steps)
{
    if (steps == 0)
        throw std::invalid_argument("Trotter step count must be at least 1");
    const double dt = total_time / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k)
        for (const auto& piece : pieces)
            apply_exponential(state, piece, dt);
}

Eigen::MatrixXcd unitary_of(std::size_t qubits, const std::function<void(Statevector&)>& op)
{
    const auto dim = std::size_t{1} << qubits;
    Eigen::MatrixXcd u(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) {
        auto s = Statevector::basis(qubits, c);
        op(s);
        for (std::size_t r = 0; r < dim; ++r)
            u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s.amplitude(r);
    }
    return u;
}

double operator_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("operator shapes differ");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a - b);
    return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

double phase_insensitive_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b)
{
    const cplx overlap = (b.adjoint() * a).trace();
    const cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : cplx{1.0, 0.0};
    return operator_distance(a, phase * b);
}

// -------------------------------------------------------------- ZZ projection

std::vector<std::vector<std::size_t>> halving_generators(std::size_t qubits, bool with_complements)
{
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::pair<std::size_t, std::size_t>> blocks; // [begin, end)
    if (qubits > 1)
        blocks.emplace_back(0, qubits);
    while (!blocks.empty()) {
        std::vector<std::size_t> first;
        std::vector<std::size_t> second;
        std::vector<std::pair<std::size_t, std::size_t>> next;
        for (const auto& [b, e] : blocks) {
            const std::size_t mid = b + (e - b + 1) / 2;
            for (std::size_t q = b; q < mid; ++q)
                first.push_back(q);
            for (std::size_t q = mid; q < e; ++q)
                second.push_back(q);
            if (mid - b > 1)
                next.emplace_back(b, mid);
            if (e - mid > 1)
                next.emplace_back(mid, e);
        }
        out.push_back(std::move(first));
        if (with_complements)
            out.push_back(std::move(second));
        blocks = std::move(next);
    }
    return out;
}

std::vector<std::vector<std::size_t>> coloring_generators(std::span<const int> colors, bool with_complements)
{
    int top = -1;
    for (int c : colors) {
        if (c < 0)
            throw std::invalid_argument("every qubit needs a colour");
        top = std::max(top, c);
    }
    std::vector<std::vector<std::size_t>> classes(static_cast<std::size_t>(top + 1));
    for (std::size_t q = 0; q < colors.size(); ++q)
        classes[static_cast<std::size_t>(colors[q])].push_back(q);
    std::erase_if(classes, [](const auto& c) { return c.empty(); });
    if (!with_complements && !classes.empty())
        classes.pop_back();
    return classes;
}

ZZProjection zz_projection_transform(const PauliStringHamiltonian& h,
                                     const std::vector<std::vector<std::size_t>>& generators)
{
    const auto n = h.qubit_count();
    std::vector<std::size_t> gmask;
    for (const auto& g : generators) {
        std::size_t m = 0;
        for (auto q : g) {
            if (q >= n)
                throw std::invalid_argument("generator references a missing qubit");
            m |= std::size_t{1} << q;
        }
        gmask.push_back(m);
    }
    ZZProjection out;
    out.generators = generators;
    out.projected = PauliStringHamiltonian(n);
    for (const auto& t : h.terms()) {
        const auto xm = masks_of(t.ops).x;
        const bool keep = std::all_of(gmask.begin(), gmask.end(), [&](std::size_t g) {
            return std::popcount(xm & g) % 2 == 0;
        });
        if (keep)
            out.projected.add(t.coeff, t.ops);
    }
    out.projected = out.projected.simplified();

    std::set<std::size_t> group{0};
    for (auto g : gmask) {
        std::set<std::size_t> grown = group;
        for (auto e : group)
            grown.insert(e ^ g);
        group = std::move(grown);
    }
    for (auto e : group) {
        std::string ops(n, 'I');
        for (std::size_t q = 0; q < n; ++q)
            if (e >> q & 1U)
                ops[q] = 'Z';
        out.elements.push_back(std::move(ops));
    }
    return out;
}

void averaged_conjugation_evolve(Statevector& state, const PauliStringHamiltonian& h, const ZZProjection& proj,
                                 double total_time, std::size_t steps)
{
    if (steps == 0)
        throw std::invalid_argument("step count must be at least 1");
    const double dt = total_time / static_cast<double>(steps) * proj.weight();
    for (std::size_t k = 0; k < steps; ++k)
        for (const auto& v : proj.elements) {
            apply_pauli(state, v);
            apply_exponential(state, h, dt);
            apply_pauli(state, v);
        }
}

// ------------------------------------------------------- many-body constructs

ManyBodyCircuit many_body_z_exact(std::size_t qubit_count, std::span<const std::size_t> targets, double omega,
                                  double star_coupling, bool to_z)
{
    if (targets.empty())
        throw std::invalid_argument("many-body term needs at least one target");
    if (!(star_coupling > 0.0))
        throw std::invalid_argument("star coupling must be positive");
    std::set<std::size_t> seen;
    for (auto t : targets)
        if (t >= qubit_count || !seen.insert(t).second)
            throw std::invalid_argument("targets must be distinct logical qubits");
    const auto pivot = targets[0];

    // A = U X_p U^dag = prod_j (-i Z_p Z_j) X_p, multiplied out letter by letter.
    SignedPauli a{0, std::string(qubit_count, 'I')};
    for (std::size_t k = 1; k < targets.size(); ++k) {
        SignedPauli zz{3, std::string(qubit_count, 'I')};
        zz.ops[pivot] = 'Z';
        zz.ops[targets[k]] = 'Z';
        a = multiply(a, zz);
    }
    SignedPauli x{0, std::string(qubit_count, 'I')};
    x.ops[pivot] = 'X';
    a = multiply(a, x);
    if (a.phase % 2 != 0)
        throw std::logic_error("conjugated pivot operator is not Hermitian");

    ManyBodyCircuit out;
    out.pivot_operator = a.ops[pivot];
    out.pivot_sign = a.phase == 0 ? 1 : -1;
    out.star_coupling = star_coupling;

    PairMap star(qubit_count);
    for (std::size_t k = 1; k < targets.size(); ++k) {
        const auto j = targets[k];
        star.at(std::min(pivot, j), std::max(pivot, j)) = star_coupling;
    }
    const double quarter = std::numbers::pi / (4.0 * star_coupling);

    Mat2 r = gates::identity();
    if (to_z)
        r = out.pivot_operator == 'X' ? gates::hadamard() : Mat2(gates::hadamard() * gates::phase_s_dagger());
    const double angle = to_z ? out.pivot_sign * omega : omega;

    auto& c = out.circuit;
    c.qubit_count = qubit_count;
    if (to_z)
        c.gate(pivot, r.adjoint(), "R^dag");
    if (targets.size() > 1) {
        c.gate(pivot, gates::pauli_x(), "X");
        c.evolve(star, quarter);
        c.gate(pivot, gates::pauli_x(), "X");
    }
    c.gate(pivot, gates::rx(2.0 * angle), fmt::format("Rx({:.6g})", 2.0 * angle));
    if (targets.size() > 1)
        c.evolve(star, quarter);
    if (to_z)
        c.gate(pivot, r, "R");
    return out;
}

LogicalCircuit many_body_z_commutator(std::size_t qubit_count, std::size_t pivot, std::size_t q, std::size_t r,
                                      double coupling_a, double coupling_b, double t)
{
    if (pivot >= qubit_count || q >= qubit_count || r >= qubit_count || pivot == q || pivot == r || q == r)
        throw std::invalid_argument("commutator construction needs three distinct logical qubits");
    LogicalCircuit c;
    c.qubit_count = qubit_count;
    auto zz = [&](std::size_t other, double coupling, double time) {
        PairMap m(qubit_count);
        m.at(std::min(pivot, other), std::max(pivot, other)) = time >= 0.0 ? coupling : -coupling;
        c.evolve(m, std::abs(time));
    };
    // exp(-i a X_p Z_q s) = H_p exp(-i a Z_p Z_q s) H_p
    auto xz = [&](double s) {
        c.gate(pivot, gates::hadamard(), "H");
        zz(q, coupling_a, s);
        c.gate(pivot, gates::hadamard(), "H");
    };
    // Y = (S H) Z (S H)^dag
    auto yz = [&](double s) {
        c.gate(pivot, gates::phase_s_dagger(), "Sdg");
        c.gate(pivot, gates::hadamard(), "H");
        zz(r, coupling_b, s);
        c.gate(pivot, gates::hadamard(), "H");
        c.gate(pivot, gates::phase_s(), "S");
    };
    // Rightmost factor acts first.
    yz(t);
    xz(t);
    yz(-t);
    xz(-t);
    return c;
}

LogicalRun simulate_logical(Statevector& state, const LogicalCircuit& circuit, std::mt19937_64& rng)
{
    validate(circuit);
    if (state.qubit_count() != circuit.qubit_count)
        throw std::invalid_argument("state and circuit disagree on logical qubit count");
    LogicalRun run;
    run.registers.assign(circuit.register_count(), 0);
    for (const auto& op : circuit.ops) {
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, PrepPlusOp>) {
                    state.apply_gate(o.qubit, gates::hadamard());
                } else if constexpr (std::is_same_v<T, LogicalGateOp>) {
                    state.apply_gate(o.qubit, o.matrix);
                } else if constexpr (std::is_same_v<T, LogicalEvolveOp>) {
                    evolve_diagonal(state, LogicalHamiltonian{o.couplings}, o.time);
                } else {
                    state.apply_gate(o.qubit, o.basis.adjoint());
                    run.registers[o.reg] = state.measure_z(o.qubit, rng);
                    state.apply_gate(o.qubit, o.basis);
                }
            },
            op);
    }
    return run;
}

// --------------------------------------------------------- program execution

namespace {

struct ProgramRunner {
    Statevector& state;
    const PhysicalLayout& layout;
    std::mt19937_64& rng;
    const ApplyOptions& options;
    ProgramRun& run;
    std::optional<std::vector<double>> raw_energy;

    const std::vector<double>& raw()
    {
        if (!raw_energy)
            raw_energy = zz_energies(layout);
        return *raw_energy;
    }

    void evolve(const EvolveStep& e)
    {
        if (options.mode == EvolveMode::EffectiveSpins) {
            state.apply_energies(zz_energies(layout, e.spins, e.channels), e.duration);
            return;
        }
        const auto sched = realize_profile(layout.edges(), e.spins, e.channels, e.duration);
        double last = 0.0;
        for (const auto& ev : sched.events()) {
            state.apply_energies(raw(), (ev.fraction - last) * e.duration);
            for (auto q : ev.qubits)
                state.apply_x(q);
            run.flips_applied += ev.qubits.size();
            last = ev.fraction;
        }
        state.apply_energies(raw(), (1.0 - last) * e.duration);
    }

    void steps(const std::vector<PulseStep>& list)
    {
        for (const auto& s : list) {
            std::visit(
                [&](const auto& op) {
                    using T = std::decay_t<decltype(op)>;
                    if constexpr (std::is_same_v<T, EvolveStep>) {
                        evolve(op);
                    } else if constexpr (std::is_same_v<T, GateStep>) {
                        state.apply_gate(op.qubit, op.matrix);
                    } else if constexpr (std::is_same_v<T, MeasureStep>) {
                        run.registers[op.reg] = state.measure_z(op.qubit, rng);
                    } else if constexpr (std::is_same_v<T, AssignStep>) {
                        run.registers[op.reg] = op.value;
                    } else {
                        if (run.registers[op.reg] == op.value)
                            steps(op.steps);
                    }
                },
                s.op);
        }
    }
};

} // namespace

ProgramRun apply_program(Statevector& state, const PhysicalLayout& layout, const PulseProgram& program,
                         std::mt19937_64& rng, const ApplyOptions& options)
{
    validate(program);
    if (program.qubit_count() != layout.size())
        throw std::invalid_argument("program and layout disagree on qubit count");
    if (state.qubit_count() != layout.size())
        throw std::invalid_argument("state and layout disagree on qubit count");
    ProgramRun run;
    run.registers.assign(program.register_count(), 0);
    ProgramRunner runner{state, layout, rng, options, run, std::nullopt};
    runner.steps(program.steps());
    return run;
}

} // namespace lqs
