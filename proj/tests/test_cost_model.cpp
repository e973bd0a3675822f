#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "lqsim/cost_model.hpp"
#include "swap_oracle.hpp"

using namespace lqs;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("grouping time formula")
{
    CHECK(grouping_time(10.0, 0, 3 * kPi / 4, 3 * kPi / 2) == doctest::Approx(5.0 + 3 * kPi / 4));
    CHECK(grouping_time(0.0, 0, 3 * kPi / 4, 3 * kPi / 2) == doctest::Approx(3 * kPi / 4));
    const double t = grouping_time(10.0, 4, kBrickPrepTime, kBrickHadamardTime);
    CHECK(t == doctest::Approx(5.0 + 8 * 3 * kPi / 2 + 3 * kPi / 4));
    CHECK(std::abs(t - 45.06) <= 0.005); // published value is rounded to two decimals
    CHECK_THROWS_AS(grouping_time(-1.0, 0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("standard time formula")
{
    CHECK(swap_rearrange_time(4) == doctest::Approx(3 * 3 * kPi / 4));
    CHECK(standard_time(0.0, 0, swap_rearrange_time(4)) == 0.0);
    CHECK(standard_time(10.0, 3, 2.0) == doctest::Approx(32.0));
    CHECK(rearrange_lower_bound(16) == doctest::Approx(16 / 1.912));
    for (std::size_t l = 2; l <= 64; ++l)
        CHECK(swap_rearrange_time(l) >= rearrange_lower_bound(l));
}

TEST_CASE("SWAP rearrangement count matches routing brute force")
{
    CHECK(swap_rearrange_count(1).gates == 0);
    CHECK(swap_rearrange_count(1).shots == 0);
    CHECK(swap_rearrange_count(4).gates == 10);
    CHECK(swap_rearrange_count(6).gates == 35);
    for (std::size_t l = 1; l <= 6; ++l) {
        const auto brute = testing::column_shift_brute_force(l);
        CHECK(brute.swaps == swap_rearrange_count(l).gates);
        CHECK(brute.shots == swap_rearrange_count(l).shots);
    }
}

TEST_CASE("grouping cost is flat and standard cost linear in the side")
{
    CostInputs in;
    in.evolution_time = 10.0;
    in.alternations = 4;
    std::vector<double> ts;
    double tg = -1.0;
    for (std::size_t l = 4; l <= 64; ++l) {
        in.side = l;
        const auto r = compare_costs(in);
        if (tg < 0)
            tg = r.grouping_total;
        CHECK(r.grouping_total == tg);
        ts.push_back(r.standard_total);
    }
    const double step = ts[1] - ts[0];
    for (std::size_t i = 1; i < ts.size(); ++i)
        CHECK(ts[i] - ts[i - 1] == doctest::Approx(step).epsilon(1e-12));
    CHECK(step == doctest::Approx(2 * 4 * 3 * kPi / 4));
}

TEST_CASE("crossover agrees with a numerical scan")
{
    auto scan = [](CostInputs in) -> std::optional<std::size_t> {
        for (std::size_t k = 0; k < 100000; ++k) {
            in.alternations = k;
            const auto r = compare_costs(in);
            if (r.grouping_total < r.standard_total)
                return k;
        }
        return std::nullopt;
    };
    CostInputs in;
    in.side = 16;
    in.evolution_time = 10.0;
    auto r = compare_costs(in);
    CHECK(r.first_advantage == scan(in));
    REQUIRE(r.crossover);
    CHECK(*r.crossover < 0.0); // grouping already wins at k = 0

    // Short evolution with a long prep: grouping only wins after enough alternations.
    in.evolution_time = 0.1;
    in.prep_time = 50.0;
    r = compare_costs(in);
    CHECK(r.first_advantage == scan(in));
    REQUIRE(r.crossover);
    in.alternations = 0;
    const double at = grouping_time(in.evolution_time, 0, in.prep_time, in.hadamard_time) +
                      2 * *r.crossover * in.hadamard_time;
    const double st = 2 * in.evolution_time + 2 * *r.crossover * swap_rearrange_time(16);
    CHECK(at == doctest::Approx(st));

    // Rearrangement cheaper than a logical Hadamard: no advantage ever.
    in.side = 2;
    in.hadamard_time = 10.0;
    CHECK_FALSE(compare_costs(in).first_advantage.has_value());
}

TEST_CASE("compiled prep and Hadamard times match the closed forms")
{
    // Four 4x2 bricks tiling an 8x4 n.n. lattice.
    const auto layout = PhysicalLayout::square(8, 4, CouplingLaw{1.0, 1.0, 1.0, 1.0});
    std::vector<std::vector<QubitIndex>> sets(4);
    for (QubitIndex q = 0; q < 32; ++q)
        sets[(q / 8 / 2) * 2 + (q % 8) / 4].push_back(q);
    const Grouping g(32, sets);
    const auto t = measure_compiled_times(layout, g);
    CHECK(t.prep_time == doctest::Approx(kBrickPrepTime).epsilon(1e-14));
    CHECK(t.hadamard_time == doctest::Approx(kBrickHadamardTime).epsilon(1e-14));
}

TEST_CASE("polynomial scaling construction")
{
    const auto c8 = polynomial_scaling_construction(8);
    CHECK(c8.blocks.size() == 6);
    CHECK(c8.physical_qubits == 116);
    using B = std::array<std::size_t, 4>;
    CHECK(c8.blocks[0] == B{0, 1, 2, 3});
    CHECK(c8.blocks[1] == B{4, 5, 6, 7});
    CHECK(c8.blocks[2] == B{0, 1, 4, 5});
    CHECK(c8.blocks[3] == B{2, 3, 6, 7});
    CHECK(c8.blocks[4] == B{0, 1, 6, 7});
    CHECK(c8.blocks[5] == B{2, 3, 4, 5});
    CHECK(polynomial_scaling_construction(4).physical_qubits == 16);
    CHECK(polynomial_scaling_construction(16).physical_qubits == 716);

    for (std::size_t n : {4, 8, 16, 32}) {
        const auto c = polynomial_scaling_construction(n);
        CHECK(static_cast<double>(c.physical_qubits) ==
              doctest::Approx(polynomial_scaling_closed_form(n)).epsilon(1e-12));
        std::set<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& b : c.blocks)
            for (std::size_t x = 0; x < 4; ++x)
                for (std::size_t y = x + 1; y < 4; ++y)
                    pairs.insert(std::minmax(b[x], b[y]));
        CHECK(pairs.size() == n * (n - 1) / 2);
    }
    CHECK_THROWS_AS(polynomial_scaling_construction(6), std::invalid_argument);
    CHECK_THROWS_AS(polynomial_scaling_construction(2), std::invalid_argument);
}

TEST_CASE("scaling lattice has four bonds between every pair of sets")
{
    const auto pattern = block_pattern();
    {
        const auto layout = PhysicalLayout::square(4, 4, CouplingLaw{1.0, 1.0, 1.0, 1.0});
        std::vector<std::vector<std::size_t>> bonds(4, std::vector<std::size_t>(4, 0));
        for (auto [a, b] : layout.edges()) {
            const auto sa = static_cast<std::size_t>(pattern[a]);
            const auto sb = static_cast<std::size_t>(pattern[b]);
            REQUIRE(sa != sb);
            ++bonds[std::min(sa, sb)][std::max(sa, sb)];
        }
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j)
                CHECK(bonds[i][j] == 4);
    }
    const auto c = polynomial_scaling_construction(8);
    const auto layout = c.layout();
    const auto g = c.grouping();
    CHECK(layout.size() == 116);
    CHECK(g.members().size() == 116);
    std::vector<std::vector<std::size_t>> bonds(8, std::vector<std::size_t>(8, 0));
    for (auto [a, b] : layout.edges()) {
        const auto sa = g.locate(a)->set, sb = g.locate(b)->set;
        if (sa != sb)
            ++bonds[std::min(sa, sb)][std::max(sa, sb)];
    }
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = i + 1; j < 8; ++j)
            CHECK(bonds[i][j] >= 4);
}

TEST_CASE("qudit embedding count")
{
    CHECK(qudit_embedding_count(3, 4).physical_qubits == 30);
    CHECK(qudit_embedding_count(2, 8).physical_qubits == 30);
    const auto d = qudit_embedding_count(1, 2);
    CHECK(d.physical_qubits == 0);
    CHECK(d.degenerate);
    CHECK_THROWS_AS(qudit_embedding_count(3, 6), std::invalid_argument);
}
