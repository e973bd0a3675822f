#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "code_space.hpp"
#include "fixtures.hpp"
#include "lqsim/dynamics.hpp"
#include "lqsim/errors.hpp"
#include "lqsim/flip_scheduler.hpp"
#include "lqsim/logical_compiler.hpp"

using namespace lqs;
using namespace lqs::testing;

namespace {

constexpr double kPi = std::numbers::pi;
const CouplingLaw kNearest{1.0, 1.0, 1.0, 1.0};

// 2x4 block rooted at qubit 1; three layers.
const CxTree kBlockTree{{1, 2}, {1, 0}, {2, 3}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

Eigen::MatrixXcd cx_matrix(std::size_t n, std::size_t control, std::size_t target)
{
    const auto dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index z = 0; z < dim; ++z) {
        const auto out = (z >> control & 1) ? z ^ (Eigen::Index{1} << target) : z;
        m(out, z) = 1.0;
    }
    return m;
}

Eigen::MatrixXcd program_unitary(const PhysicalLayout& layout, const PulseProgram& p)
{
    std::mt19937_64 rng(0);
    return unitary_of(layout.size(), [&](Statevector& s) { apply_program(s, layout, p, rng); });
}

Statevector run(const PhysicalLayout& layout, const PulseProgram& p, Statevector s, std::mt19937_64& rng,
                ProgramRun* out = nullptr)
{
    auto r = apply_program(s, layout, p, rng);
    if (out)
        *out = r;
    return s;
}

Statevector ghz(std::size_t qubits_total, std::span<const QubitIndex> set)
{
    std::vector<cplx> a(std::size_t{1} << qubits_total, 0.0);
    std::size_t all = 0;
    for (auto q : set)
        all |= std::size_t{1} << q;
    a[0] = a[all] = 1.0 / std::sqrt(2.0);
    return Statevector::from_amplitudes(a);
}

// Random connected bipartition of the 4x4 lattice into two 8-qubit sets.
Grouping random_halves(std::mt19937_64& rng)
{
    const auto layout = PhysicalLayout::square(4, 4, kNearest);
    for (;;) {
        std::vector<QubitIndex> a{static_cast<QubitIndex>(rng() % 16)};
        while (a.size() < 8) {
            std::vector<QubitIndex> frontier;
            for (auto [u, v] : layout.edges()) {
                const bool ua = std::count(a.begin(), a.end(), u) > 0;
                const bool va = std::count(a.begin(), a.end(), v) > 0;
                if (ua != va)
                    frontier.push_back(ua ? v : u);
            }
            a.push_back(frontier[rng() % frontier.size()]);
        }
        std::vector<QubitIndex> b;
        for (QubitIndex q = 0; q < 16; ++q)
            if (std::count(a.begin(), a.end(), q) == 0)
                b.push_back(q);
        Grouping g(16, {a, b});
        if (classify_set(layout, g, 1).kind != Connectivity::Disconnected)
            return g;
    }
}

} // namespace

TEST_CASE("CX on a nearest-neighbour pair takes a quarter period")
{
    const auto layout = PhysicalLayout::square(2, 1, CouplingLaw{});
    const auto p = compile_cx(layout, 0, 1);
    CHECK(p.total_time() == doctest::Approx(kPi / 4).epsilon(1e-15));
    CHECK(phase_insensitive_distance(program_unitary(layout, p), cx_matrix(2, 0, 1)) < 1e-10);
    CHECK(phase_insensitive_distance(program_unitary(layout, compile_cx(layout, 1, 0)), cx_matrix(2, 1, 0)) < 1e-10);
}

TEST_CASE("CX at distance two doubles the time")
{
    const auto layout = PhysicalLayout::square(3, 1, CouplingLaw{});
    const auto p = compile_cx(layout, 0, 2);
    CHECK(p.total_time() == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(phase_insensitive_distance(program_unitary(layout, p), cx_matrix(3, 0, 2)) < 1e-10);
}

TEST_CASE("CX leaves spectators on a line untouched")
{
    const auto layout = PhysicalLayout::square(5, 1, CouplingLaw{});
    const auto p = compile_cx(layout, 1, 2);
    CHECK(phase_insensitive_distance(program_unitary(layout, p), cx_matrix(5, 1, 2)) < 1e-10);
}

TEST_CASE("uncoupled CX is rejected")
{
    const auto layout = PhysicalLayout::square(3, 1, kNearest);
    CHECK_THROWS_AS(compile_cx(layout, 0, 2), InfeasibleError);
}

TEST_CASE("layer of simultaneous CX gates")
{
    const auto layout = PhysicalLayout::square(4, 1, CouplingLaw{});
    PulseProgram p(4);
    append_cx_layer(p, layout, {{0, 1}, {3, 2}});
    CHECK(p.evolve_count() == 1);
    CHECK(p.total_time() == doctest::Approx(kPi / 4));
    const Eigen::MatrixXcd want = cx_matrix(4, 3, 2) * cx_matrix(4, 0, 1);
    CHECK(phase_insensitive_distance(program_unitary(layout, p), want) < 1e-10);

    PulseProgram bad(4);
    CHECK_THROWS_AS(append_cx_layer(bad, layout, {{0, 1}, {1, 2}}), std::invalid_argument);
    // f(0,1) = 1 but f(2,4) = 1/2
    auto wide = PhysicalLayout::square(5, 1, CouplingLaw{});
    PulseProgram uneq(5);
    CHECK_THROWS_AS(append_cx_layer(uneq, wide, {{0, 1}, {2, 4}}), std::invalid_argument);
}

TEST_CASE("GHZ preparation on the 2x4 block")
{
    const auto layout = PhysicalLayout::square(4, 2, kNearest);
    Grouping g(8, {{0, 1, 2, 3, 4, 5, 6, 7}});
    const auto layers = cx_layers(layout, kBlockTree);
    CHECK(layers.size() == 3);
    const auto p = compile_ghz_prep(layout, g, 0, kBlockTree);
    CHECK(p.total_time() == doctest::Approx(3 * kPi / 4).epsilon(1e-15));
    std::mt19937_64 rng(1);
    const auto out = run(layout, p, Statevector(8), rng);
    CHECK(out.fidelity(ghz(8, g.set(0))) >= 1 - 1e-9);

    const auto def = compile_ghz_prep(layout, g, 0);
    CHECK(def.total_time() == doctest::Approx(3 * kPi / 4).epsilon(1e-15));
    CHECK(run(layout, def, Statevector(8), rng).fidelity(ghz(8, g.set(0))) >= 1 - 1e-9);
}

TEST_CASE("GHZ preparation under full-range couplings")
{
    const auto layout = PhysicalLayout::square(4, 2, CouplingLaw{});
    Grouping g(8, {{0, 1, 2, 3, 4, 5, 6, 7}});
    const auto p = compile_ghz_prep(layout, g, 0, kBlockTree);
    CHECK(p.total_time() >= 3 * kPi / 4 - 1e-12);
    std::mt19937_64 rng(2);
    CHECK(run(layout, p, Statevector(8), rng).fidelity(ghz(8, g.set(0))) >= 1 - 1e-9);
}

TEST_CASE("star set prepares in one window")
{
    std::vector<Position> pos{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    PhysicalLayout layout(pos, kNearest);
    Grouping g(5, {{0, 1, 2, 3, 4}});
    const auto p = compile_ghz_prep(layout, g, 0);
    CHECK(p.evolve_count() == 1);
    CHECK(p.total_time() == doctest::Approx(kPi / 4));
    std::mt19937_64 rng(3);
    CHECK(run(layout, p, Statevector(5), rng).fidelity(ghz(5, g.set(0))) >= 1 - 1e-9);
}

TEST_CASE("single-qubit set needs only a Hadamard")
{
    const auto layout = PhysicalLayout::square(2, 1, CouplingLaw{});
    Grouping g(2, {{1}, {0}});
    const auto p = compile_ghz_prep(layout, g, 0);
    CHECK(p.total_time() == 0.0);
    CHECK(p.gate_count() == 1);
}

TEST_CASE("disconnected sets are sent to delocalization")
{
    const auto layout = PhysicalLayout::square(4, 1, kNearest);
    Grouping g(4, {{0, 2}, {1, 3}});
    CHECK_THROWS_AS(compile_ghz_prep(layout, g, 0), InfeasibleError);
    CHECK_THROWS_AS(compile_logical_unitary(layout, g, 0, gates::hadamard()), InfeasibleError);
    // zero-time gates need no connectivity
    CHECK_NOTHROW(compile_logical_unitary(layout, g, 0, gates::pauli_x()));
}

TEST_CASE("malformed trees are rejected")
{
    const auto layout = PhysicalLayout::square(4, 2, kNearest);
    CHECK_THROWS_AS(cx_layers(layout, {{1, 2}, {3, 7}}), std::invalid_argument);
    CHECK_THROWS_AS(cx_layers(layout, {{1, 2}, {2, 1}}), std::invalid_argument);
    Grouping g(8, {{0, 1, 2, 3, 4, 5, 6, 7}});
    CHECK_THROWS_AS(compile_ghz_prep(layout, g, 0, {{1, 2}, {2, 3}}), std::invalid_argument);
}

TEST_CASE("logical Hadamard on the 2x4 block")
{
    const auto layout = PhysicalLayout::square(4, 2, kNearest);
    Grouping g(8, {{0, 1, 2, 3, 4, 5, 6, 7}});
    const auto p = compile_logical_unitary(layout, g, 0, gates::hadamard(), kBlockTree);
    CHECK(p.total_time() == doctest::Approx(3 * kPi / 2).epsilon(1e-15));

    std::mt19937_64 rng(4);
    const auto logical = random_state(rng, 1);
    auto expect = logical;
    expect.apply_gate(0, gates::hadamard());
    const auto d = decode(g, run(layout, p, encode(g, logical), rng));
    CHECK(d.weight == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.state().fidelity(expect) >= 1 - 1e-9);
}

TEST_CASE("zero-time logical gates")
{
    const auto layout = PhysicalLayout::square(3, 1, kNearest);
    Grouping g(3, {{0, 1, 2}});
    std::mt19937_64 rng(5);
    for (const Mat2& u : {gates::pauli_x(), gates::pauli_z(), gates::rz(0.7), Mat2(gates::pauli_y())}) {
        const auto p = compile_logical_unitary(layout, g, 0, u);
        CHECK(p.total_time() == 0.0);
        const auto logical = random_state(rng, 1);
        auto expect = logical;
        expect.apply_gate(0, u);
        const auto d = decode(g, run(layout, p, encode(g, logical), rng));
        CHECK(d.state().fidelity(expect) >= 1 - 1e-12);
    }
}

TEST_CASE("logical Z rotation split by weights")
{
    const auto layout = PhysicalLayout::square(3, 1, kNearest);
    Grouping g(3, {{0, 1, 2}});
    const std::vector<double> w{0.5, 0.25, 0.25};
    const auto p = compile_logical_rz(g, 0, 1.1, w);
    CHECK(p.gate_count() == 3);
    std::mt19937_64 rng(6);
    const auto logical = random_state(rng, 1);
    auto expect = logical;
    expect.apply_gate(0, gates::rz(1.1));
    CHECK(decode(g, run(layout, p, encode(g, logical), rng)).state().fidelity(expect) >= 1 - 1e-12);
    const std::vector<double> bad{0.5, 0.25};
    CHECK_THROWS_AS(compile_logical_rz(g, 0, 1.0, bad), std::invalid_argument);
}

TEST_CASE("unitary followed by its inverse on random connected halves of 16 qubits")
{
    std::mt19937_64 rng(7);
    const auto layout = testing::square4();
    for (int trial = 0; trial < 2; ++trial) {
        const auto g = random_halves(rng);
        const auto u = random_unitary(rng);
        const auto logical = random_state(rng, 2);
        auto phys = encode(g, logical);

        phys = run(layout, compile_logical_unitary(layout, g, 0, u), phys, rng);
        auto after_u = logical;
        after_u.apply_gate(0, u);
        CHECK(decode(g, phys).state().fidelity(after_u) >= 1 - 1e-9);

        phys = run(layout, compile_logical_unitary(layout, g, 0, u.adjoint()), phys, rng);
        const auto d = decode(g, phys);
        CHECK(d.weight == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(d.state().fidelity(logical) >= 1 - 1e-9);
    }
}

TEST_CASE("decoupling a set cancels the logical coupling")
{
    const auto layout = PhysicalLayout::square(4, 1, CouplingLaw{});
    Grouping g(4, {{0, 1}, {2, 3}});
    std::mt19937_64 rng(8);
    const auto logical = random_state(rng, 2);
    const double tau = 1.3;

    const std::vector<SetIndex> one{0};
    auto d = decode(g, run(layout, compile_decouple(g, one, tau), encode(g, logical), rng));
    CHECK(d.state().fidelity(logical) >= 1 - 1e-9);

    const std::vector<SetIndex> both{0, 1};
    d = decode(g, run(layout, compile_decouple(g, both, tau), encode(g, logical), rng));
    CHECK(d.state().fidelity(logical) >= 1 - 1e-9);

    // Plain window: lambda_12 = sum of the cross couplings.
    PairMap lambda(2);
    for (auto a : g.set(0))
        for (auto b : g.set(1))
            lambda.at(0, 1) += layout.coupling(a, b);
    auto expect = logical;
    evolve_diagonal(expect, LogicalHamiltonian{lambda}, tau);
    d = decode(g, run(layout, compile_decouple(g, {}, tau), encode(g, logical), rng));
    CHECK(d.state().fidelity(expect) >= 1 - 1e-9);
    CHECK(std::abs(expect.inner(logical)) < 1 - 1e-3); // the plain window does act

    CHECK_THROWS_AS(compile_decouple(g, one, 0.0), std::invalid_argument);
}

TEST_CASE("delocalization by SWAP routing")
{
    SUBCASE("identity is empty")
    {
        const auto layout = testing::square4();
        const auto g = testing::corner_blocks();
        const auto r = delocalize_grouping(layout, g, g);
        CHECK(r.program.steps().empty());
        CHECK(r.swaps.empty());
    }
    SUBCASE("adjacent transposition is one SWAP of three CX")
    {
        const auto layout = PhysicalLayout::square(2, 1, CouplingLaw{});
        const auto r = delocalize_grouping(layout, Grouping(2, {{0}, {1}}), Grouping(2, {{1}, {0}}));
        CHECK(r.swaps.size() == 1);
        CHECK(r.program.evolve_count() == 3);
        CHECK(r.program.total_time() == doctest::Approx(3 * kPi / 4));
        std::mt19937_64 rng(9);
        const auto out = run(layout, r.program, Statevector::basis(2, 0b01), rng);
        CHECK(out.fidelity(Statevector::basis(2, 0b10)) == doctest::Approx(1.0));
    }
    SUBCASE("chain permutations stay within the bubble-sort bound")
    {
        std::mt19937_64 rng(10);
        const std::size_t k = 6;
        const auto layout = PhysicalLayout::square(k, 1, kNearest);
        std::vector<std::vector<QubitIndex>> from_sets;
        for (QubitIndex q = 0; q < k; ++q)
            from_sets.push_back({q});
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<QubitIndex> perm(k);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            std::vector<std::vector<QubitIndex>> to_sets;
            for (auto q : perm)
                to_sets.push_back({q});
            const auto r = delocalize_grouping(layout, Grouping(k, from_sets), Grouping(k, to_sets));
            std::size_t inversions = 0;
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t b = a + 1; b < k; ++b)
                    inversions += perm[a] > perm[b] ? 1 : 0;
            CHECK(r.swaps.size() == inversions);
            CHECK(r.swaps.size() <= (k * k - k) / 2);
        }
    }
    SUBCASE("rows to corner blocks on 16 qubits")
    {
        const auto layout = testing::square4();
        Grouping rows(16, {{0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9, 10, 11}, {12, 13, 14, 15}});
        const auto blocks = testing::corner_blocks();
        const auto r = delocalize_grouping(layout, rows, blocks);
        CHECK(!r.swaps.empty());
        std::mt19937_64 rng(11);
        const auto logical = random_state(rng, 4);
        const auto d = decode(blocks, run(layout, r.program, encode(rows, logical), rng));
        CHECK(d.weight == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(d.state().fidelity(logical) >= 1 - 1e-9);
    }
    SUBCASE("unreachable targets")
    {
        std::vector<Position> pos{{0, 0}, {1, 0}, {5, 0}};
        PhysicalLayout layout(pos, kNearest);
        CHECK_THROWS_AS(delocalize_grouping(layout, Grouping(3, {{0}}), Grouping(3, {{2}})), InfeasibleError);
    }
}

TEST_CASE("logical Z measurement reads one physical qubit")
{
    const auto layout = PhysicalLayout::square(3, 1, kNearest);
    Grouping g(3, {{0, 1, 2}});
    const auto p = compile_logical_measurement(layout, g, 0, gates::identity());
    std::size_t measures = 0;
    for (const auto& s : p.steps())
        measures += std::holds_alternative<MeasureStep>(s.op) ? 1 : 0;
    CHECK(measures == 1);
    CHECK(p.total_time() == 0.0);

    std::mt19937_64 rng(12);
    ProgramRun r;
    const auto out = run(layout, p, encode(g, Statevector::basis(1, 1)), rng, &r);
    CHECK(r.registers[0] == -1);
    CHECK(decode(g, out).weight == doctest::Approx(1.0));
}

TEST_CASE("logical X measurement on a two-qubit set")
{
    const auto layout = PhysicalLayout::square(2, 1, kNearest);
    Grouping g(2, {{0, 1}});
    const auto p = compile_logical_measurement(layout, g, 0, gates::hadamard());
    std::mt19937_64 rng(13);
    const int shots = 4000;
    int plus = 0;
    Statevector plus_l(1), minus_l = Statevector::basis(1, 1);
    plus_l.apply_gate(0, gates::hadamard());
    minus_l.apply_gate(0, gates::hadamard());
    for (int k = 0; k < shots; ++k) {
        ProgramRun r;
        const auto out = run(layout, p, Statevector(2), rng, &r);
        plus += r.registers[0] == 1 ? 1 : 0;
        const auto d = decode(g, out);
        CHECK(d.weight == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.state().fidelity(r.registers[0] == 1 ? plus_l : minus_l) >= 1 - 1e-9);
    }
    CHECK(std::abs(plus - shots / 2.0) <= 5 * std::sqrt(shots * 0.25));
}

TEST_CASE("measuring a basis state is deterministic")
{
    const auto layout = PhysicalLayout::square(4, 1, kNearest);
    Grouping g(4, {{0, 1, 2, 3}});
    std::mt19937_64 rng(14);
    const auto b = random_unitary(rng);
    const auto p = compile_logical_measurement(layout, g, 0, b);
    std::vector<cplx> col{b(0, 1), b(1, 1)};
    const auto input = encode(g, Statevector::from_amplitudes(col));
    for (int k = 0; k < 100; ++k) {
        ProgramRun r;
        const auto out = run(layout, p, input, rng, &r);
        REQUIRE(r.registers[0] == -1);
        CHECK(decode(g, out).state().fidelity(Statevector::from_amplitudes(col)) >= 1 - 1e-9);
    }
}

TEST_CASE("measurement statistics follow the Born rule on entangled inputs")
{
    const auto layout = PhysicalLayout::square(5, 1, CouplingLaw{});
    Grouping g(5, {{0, 1, 2}, {3, 4}});
    std::mt19937_64 rng(15);
    const auto b = random_unitary(rng);
    const auto logical = random_state(rng, 2);
    const auto p = compile_logical_measurement(layout, g, 0, b);

    // Born probability of the first column and the collapsed states.
    auto projected = logical;
    projected.apply_gate(0, b.adjoint());
    auto plus_state = projected, minus_state = projected;
    const double p_plus = 1.0 - projected.probability_minus(0);
    plus_state.project_z(0, 1);
    plus_state.apply_gate(0, b);
    minus_state.project_z(0, -1);
    minus_state.apply_gate(0, b);

    const auto input = encode(g, logical);
    const int shots = 10000;
    int plus = 0;
    for (int k = 0; k < shots; ++k) {
        ProgramRun r;
        const auto out = run(layout, p, input, rng, &r);
        plus += r.registers[0] == 1 ? 1 : 0;
        if (k < 50) {
            const auto d = decode(g, out);
            CHECK(d.state().fidelity(r.registers[0] == 1 ? plus_state : minus_state) >= 1 - 1e-9);
        }
    }
    const double sigma = std::sqrt(shots * p_plus * (1 - p_plus));
    CHECK(std::abs(plus - shots * p_plus) <= 5 * sigma);

    CHECK_THROWS_AS(compile_logical_measurement(layout, g, 0, Mat2::Ones()), std::invalid_argument);
}

TEST_CASE("whole logical circuit matches the logical simulation")
{
    const auto layout = PhysicalLayout::square(4, 1, CouplingLaw{});
    Grouping g(4, {{0, 1}, {2, 3}});
    std::mt19937_64 rng(16);
    LogicalCircuit c;
    c.qubit_count = 2;
    c.prep_plus(0);
    c.prep_plus(1);
    PairMap lambda(2);
    lambda.at(0, 1) = 0.4;
    c.evolve(lambda, 0.9);
    c.gate(1, random_unitary(rng), "U");

    const auto p = compile_circuit(layout, g, c);
    Statevector want(2);
    simulate_logical(want, c, rng);
    const auto d = decode(g, run(layout, p, Statevector(4), rng));
    CHECK(d.weight == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.state().fidelity(want) >= 1 - 1e-9);
}

TEST_CASE("silenced qubits cost few flips under full-range couplings")
{
    const auto layout = testing::square4();
    std::vector<double> spins(16, 0.0);
    spins[5] = spins[6] = 1.0;
    const auto sched = realize_profile(layout.edges(), spins, {}, 1.0);
    CHECK(sched.events().size() <= 16);
    CHECK(verify_schedule(layout, sched).passed(1e-9));
}
