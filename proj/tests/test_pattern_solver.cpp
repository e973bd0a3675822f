#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "lqsim/errors.hpp"
#include "lqsim/pattern_solver.hpp"

using namespace lqs;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v)
        out(k++) = x;
    return out;
}

TargetPattern star_from_first(std::size_t n, double lambda)
{
    PairMap m(n);
    for (std::size_t j = 1; j < n; ++j)
        m.at(0, j) = lambda;
    return TargetPattern::exact(m);
}

// Largest shared scale over vectors with components in {-1, 0, 1}.
double brute_force_ternary(const InteractionTable& table, const TargetPattern& ratios)
{
    const auto n = table.set_count();
    std::size_t total = 0;
    for (auto s : table.set_sizes())
        total += s;
    REQUIRE(total <= 12);
    std::size_t combos = 1;
    for (std::size_t k = 0; k < total; ++k)
        combos *= 3;
    double best = 0.0;
    for (std::size_t code = 0; code < combos; ++code) {
        std::vector<Eigen::VectorXd> v;
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::VectorXd s(static_cast<Eigen::Index>(table.set_size(i)));
            for (Eigen::Index k = 0; k < s.size(); ++k) {
                s(k) = static_cast<double>(c % 3) - 1.0;
                c /= 3;
            }
            v.push_back(s);
        }
        auto r = realized_couplings(table, v);
        double lambda = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (std::size_t p = 0; p < r.pair_count() && ok; ++p) {
            const double target = ratios.entries.values()[p];
            if (target == 0.0)
                ok = std::abs(r.values()[p]) < 1e-12;
            else
                lambda = std::min(lambda, r.values()[p] / target);
        }
        // exact equality of all nonzero entries
        for (std::size_t p = 0; p < r.pair_count() && ok; ++p) {
            const double target = ratios.entries.values()[p];
            if (target != 0.0)
                ok = std::abs(r.values()[p] - lambda * target) < 1e-12;
        }
        if (ok && lambda > best)
            best = lambda;
    }
    return best;
}

} // namespace

TEST_CASE("pair map indexing round-trips")
{
    PairMap m(5);
    for (std::size_t p = 0; p < m.pair_count(); ++p) {
        auto [i, j] = m.pair(p);
        m.at(i, j) = static_cast<double>(p);
    }
    for (std::size_t p = 0; p < m.pair_count(); ++p)
        CHECK(m.values()[p] == static_cast<double>(p));
    CHECK_THROWS(m.at(2, 2));
    CHECK_THROWS(m.at(3, 1));
}

TEST_CASE("ratio pattern needs a nonzero entry")
{
    CHECK_THROWS_AS(TargetPattern::ratios(PairMap(3)), std::invalid_argument);
}

TEST_CASE("worked example with pinned choices")
{
    InteractionTable table(testing::square4(), testing::corner_blocks());
    SequentialSolveOptions opt;
    opt.pinned = {vec({1, 1, 1, 1}), vec({0.5, -9.3, 3.2, 5.65}), vec({-2.4, -0.5, 12.595, -5.269}),
                  vec({-2.4, -0.638, 3.617, 3.967})};
    SequentialTrace trace;
    auto sol = algorithm1_solve(table, star_from_first(4, 4.0), opt, &trace);

    REQUIRE(trace.step_rows.size() == 3);
    const Eigen::MatrixXd& first = trace.step_rows[0];
    CHECK(first(0, 0) == doctest::Approx(2.654).epsilon(1e-3));
    CHECK(first(0, 1) == doctest::Approx(1.597).epsilon(1e-3));
    CHECK(first(0, 2) == doctest::Approx(2.654).epsilon(1e-3));
    CHECK(first(0, 3) == doctest::Approx(1.597).epsilon(1e-3));
    CHECK(trace.step_rows[1](1, 1) == doctest::Approx(1.727).epsilon(2e-3));
    CHECK(trace.step_rows[2](2, 2) == doctest::Approx(-0.399).epsilon(5e-3));

    CHECK(trace.max_abs_component == doctest::Approx(12.595).epsilon(1e-3));
    CHECK(std::abs(sol.target_scale - 0.0063) < 2e-4);
    for (std::size_t j = 1; j < 4; ++j)
        CHECK(std::abs(sol.couplings.at(0, j) - 0.025) < 1e-3);
    CHECK(std::abs(sol.couplings.at(1, 2)) < 1e-6);
    CHECK(std::abs(sol.couplings.at(1, 3)) < 1e-6);
    CHECK(std::abs(sol.couplings.at(2, 3)) < 1e-6);
    CHECK(verify_pattern(sol, table, star_from_first(4, 4.0), 1e-9).passed);
}

TEST_CASE("random solves satisfy every equation after rescale")
{
    InteractionTable table(testing::square4(), testing::corner_blocks());
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        PairMap lambdas(4);
        for (auto& v : lambdas.values())
            v = u(rng);
        SequentialSolveOptions opt;
        opt.seed = static_cast<std::uint64_t>(rep + 1);
        auto sol = algorithm1_solve(table, TargetPattern::exact(lambdas), opt);
        auto realized = realized_couplings(table, sol.vectors);
        for (std::size_t p = 0; p < realized.pair_count(); ++p)
            CHECK(realized.values()[p] == doctest::Approx(sol.target_scale * lambdas.values()[p]).epsilon(1e-9));
        for (const auto& s : sol.vectors)
            CHECK(s.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("dependent rows raise the LI error with the failing step")
{
    // Set 3 sees sets 1 and 2 through identical rows whatever s_1, s_2 are.
    Eigen::MatrixXd one = Eigen::MatrixXd::Ones(2, 2);
    auto table = InteractionTable::from_matrices({2, 2, 2}, {Eigen::MatrixXd::Identity(2, 2), one, one});
    PairMap lambdas(3);
    lambdas.at(0, 1) = 1;
    lambdas.at(0, 2) = 1;
    lambdas.at(1, 2) = 2;
    try {
        algorithm1_solve(table, TargetPattern::exact(lambdas));
        FAIL("expected LiConditionError");
    } catch (const LiConditionError& e) {
        CHECK(e.step() == 3);
        CHECK(e.rank() == 1);
    }
}

TEST_CASE("too-small sets are rejected up front")
{
    auto table = InteractionTable::from_matrices({1, 1, 1}, {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                                                             Eigen::MatrixXd::Ones(1, 1)});
    CHECK_THROWS_AS(algorithm1_solve(table, star_from_first(3, 1.0)), std::invalid_argument);
}

TEST_CASE("li check reports rank")
{
    std::vector<Eigen::VectorXd> fixed{vec({1, 0}), vec({2, 0})};
    std::vector<Eigen::MatrixXd> mats{Eigen::MatrixXd::Identity(2, 3), Eigen::MatrixXd::Identity(2, 3)};
    auto c = li_condition_check(fixed, mats);
    CHECK_FALSE(c.independent);
    CHECK(c.rank == 1);
    fixed[1] = vec({0, 1});
    CHECK(li_condition_check(fixed, mats).independent);
}

TEST_CASE("rescale divides by the largest component")
{
    PairMap c(2);
    c.at(0, 1) = 8.0;
    auto sol = rescale_solution({vec({2, -4}), vec({1, 1})}, c);
    CHECK(sol.vectors[0](1) == doctest::Approx(-1.0));
    CHECK(sol.couplings.at(0, 1) == doctest::Approx(0.5));
    CHECK(sol.target_scale == doctest::Approx(1.0 / 16.0));
    auto small = rescale_solution({vec({0.5}), vec({0.25})}, c);
    CHECK(small.target_scale == 1.0);
}

TEST_CASE("optimizer reaches the ternary brute-force value on small instances")
{
    auto layout = PhysicalLayout::square(3, 2, CouplingLaw{1.0, 1.0, 1.5, 1.0});
    Grouping g(6, {{0, 3}, {1, 4}, {2, 5}});
    InteractionTable table(layout, g);
    PairMap ratios(3);
    ratios.at(0, 1) = 1;
    ratios.at(1, 2) = 0.5;
    auto pattern = TargetPattern::ratios(ratios);
    const double floor = brute_force_ternary(table, pattern);
    REQUIRE(floor > 0.0);

    MaximizeOptions opt;
    opt.starts = 16;
    opt.iterations = 800;
    auto sol = maximize_coupling(table, pattern, opt);
    REQUIRE(sol.lambda_max);
    CHECK(*sol.lambda_max >= floor - 1e-6);
    auto rep = verify_pattern(sol, table, pattern, 1e-5);
    CHECK(rep.passed);
}

TEST_CASE("optimizer on a single pair finds the box optimum")
{
    auto table = InteractionTable::from_matrices({2, 2}, {Eigen::MatrixXd::Identity(2, 2)});
    PairMap ratios(2);
    ratios.at(0, 1) = 1;
    MaximizeOptions opt;
    opt.starts = 4;
    auto sol = maximize_coupling(table, TargetPattern::ratios(ratios), opt);
    CHECK(*sol.lambda_max == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("optimizer is deterministic for a fixed seed")
{
    InteractionTable table(testing::square4(), testing::corner_blocks());
    PairMap ratios(4);
    for (auto& v : ratios.values())
        v = 1.0;
    MaximizeOptions opt;
    opt.starts = 6;
    opt.iterations = 400;
    opt.threads = 3;
    auto a = maximize_coupling(make_problem(table, TargetPattern::ratios(ratios)), opt);
    opt.threads = 1;
    auto b = maximize_coupling(make_problem(table, TargetPattern::ratios(ratios)), opt);
    CHECK(a.lambda == b.lambda);
    CHECK(a.best_so_far == b.best_so_far);
}

TEST_CASE("nonzero ratio on an uncoupled pair is infeasible")
{
    auto table = InteractionTable::from_matrices({1, 1}, {Eigen::MatrixXd::Zero(1, 1)});
    PairMap ratios(2);
    ratios.at(0, 1) = 1;
    CHECK_THROWS_AS(maximize_coupling(table, TargetPattern::ratios(ratios)), InfeasibleError);
}

TEST_CASE("verify_pattern flags structural zero violations")
{
    auto table = InteractionTable::from_matrices({1, 1, 1}, {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                                                             Eigen::MatrixXd::Ones(1, 1)});
    PairMap ratios(3);
    ratios.at(0, 1) = 1;
    LogicalSolution sol;
    sol.vectors = {vec({1}), vec({1}), vec({0})};
    CHECK(verify_pattern(sol, table, TargetPattern::ratios(ratios), 1e-9).passed);
    sol.vectors[2] = vec({1e-3});
    auto rep = verify_pattern(sol, table, TargetPattern::ratios(ratios), 1e-9);
    CHECK_FALSE(rep.passed);
    sol.vectors[2] = vec({1.5});
    CHECK_FALSE(verify_pattern(sol, table, TargetPattern::ratios(ratios), 10.0).box_ok);
}
