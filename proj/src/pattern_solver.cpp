#include "lqsim/pattern_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "lqsim/errors.hpp"

namespace lqs {

namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kBoxSlack = 1e-12;

Eigen::VectorXd gaussian(std::mt19937_64& rng, Eigen::Index n)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index k = 0; k < n; ++k)
        v(k) = normal(rng);
    return v;
}

std::size_t numeric_rank(const Eigen::VectorXd& singular)
{
    if (singular.size() == 0 || singular(0) <= 0.0)
        return 0;
    const double cut = kRankThreshold * singular(0);
    std::size_t r = 0;
    for (Eigen::Index k = 0; k < singular.size(); ++k)
        r += singular(k) > cut ? 1 : 0;
    return r;
}

} // namespace

std::size_t PairMap::index(std::size_t i, std::size_t j) const
{
    if (i >= j || j >= n_)
        throw std::out_of_range(fmt::format("pair ({}, {}) invalid for {} sets", i, j, n_));
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
}

double& PairMap::at(std::size_t i, std::size_t j) { return values_[index(i, j)]; }
double PairMap::at(std::size_t i, std::size_t j) const { return values_[index(i, j)]; }

std::pair<std::size_t, std::size_t> PairMap::pair(std::size_t index) const
{
    std::size_t i = 0;
    std::size_t row = n_ - 1;
    while (index >= row) {
        index -= row;
        ++i;
        --row;
    }
    return {i, i + 1 + index};
}

TargetPattern TargetPattern::exact(PairMap lambdas) { return TargetPattern{std::move(lambdas), false}; }

TargetPattern TargetPattern::ratios(PairMap ratios)
{
    if (std::none_of(ratios.values().begin(), ratios.values().end(), [](double c) { return c != 0.0; }))
        throw std::invalid_argument("ratio pattern needs at least one nonzero ratio");
    return TargetPattern{std::move(ratios), true};
}

PairMap realized_couplings(const InteractionTable& table, std::span<const Eigen::VectorXd> vectors)
{
    const auto n = table.set_count();
    if (vectors.size() != n)
        throw std::invalid_argument(fmt::format("expected {} vectors, got {}", n, vectors.size()));
    PairMap out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& f = table.matrix(i, j);
            if (vectors[i].size() != f.rows() || vectors[j].size() != f.cols())
                throw std::invalid_argument(fmt::format("vector sizes do not match sets {} and {}", i, j));
            out.at(i, j) = vectors[i].dot(f * vectors[j]);
        }
    return out;
}

LiCheck li_condition_check(std::span<const Eigen::VectorXd> fixed, std::span<const Eigen::MatrixXd> matrices)
{
    if (fixed.size() != matrices.size() || fixed.empty())
        throw std::invalid_argument("li_condition_check needs one matrix per fixed vector");
    const auto cols = matrices.front().cols();
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(fixed.size()), cols);
    for (std::size_t m = 0; m < fixed.size(); ++m)
        rows.row(static_cast<Eigen::Index>(m)) = fixed[m].transpose() * matrices[m];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
    LiCheck out;
    out.rank = numeric_rank(svd.singularValues());
    out.independent = out.rank == fixed.size();
    return out;
}

LogicalSolution rescale_solution(std::vector<Eigen::VectorXd> raw, PairMap realized)
{
    double peak = 0.0;
    for (const auto& v : raw) {
        if (!v.allFinite())
            throw std::invalid_argument("non-finite component in raw vectors");
        if (v.size() > 0)
            peak = std::max(peak, v.cwiseAbs().maxCoeff());
    }
    if (peak == 0.0)
        throw std::invalid_argument("cannot rescale all-zero vectors");
    LogicalSolution out;
    out.couplings = std::move(realized);
    if (peak > 1.0) {
        for (auto& v : raw)
            v /= peak;
        for (auto& c : out.couplings.values())
            c /= peak * peak;
        out.target_scale = 1.0 / (peak * peak);
    }
    out.vectors = std::move(raw);
    return out;
}

LogicalSolution algorithm1_solve(const InteractionTable& table, const TargetPattern& target,
                                 const SequentialSolveOptions& options, SequentialTrace* trace)
{
    const auto n = table.set_count();
    if (target.ratio_form)
        throw std::invalid_argument("sequential solve needs explicit couplings, not a ratio pattern");
    if (target.set_count() != n)
        throw std::invalid_argument(fmt::format("pattern has {} sets, grouping has {}", target.set_count(), n));
    for (std::size_t k = 1; k < n; ++k)
        if (table.set_size(k) < k)
            throw std::invalid_argument(
                fmt::format("set {} has {} qubits but needs at least {} for independent rows", k + 1, table.set_size(k), k));
    auto pinned = [&](std::size_t k) -> const std::optional<Eigen::VectorXd>& {
        static const std::optional<Eigen::VectorXd> none;
        return k < options.pinned.size() ? options.pinned[k] : none;
    };

    std::mt19937_64 rng(options.seed);
    std::vector<Eigen::VectorXd> vectors;
    std::vector<Eigen::MatrixXd> step_rows;
    std::size_t failed_step = 0;
    std::size_t failed_rank = 0;
    std::size_t attempt = 0;
    bool solved = false;
    for (; attempt <= options.max_reseeds && !solved; ++attempt) {
        vectors.clear();
        step_rows.clear();
        const auto n0 = static_cast<Eigen::Index>(table.set_size(0));
        if (const auto& p = pinned(0)) {
            if (p->size() != n0)
                throw std::invalid_argument("pinned vector for set 1 has wrong size");
            vectors.push_back(*p);
        } else {
            vectors.push_back(gaussian(rng, n0));
        }
        solved = true;
        for (std::size_t k = 1; k < n; ++k) {
            const auto cols = static_cast<Eigen::Index>(table.set_size(k));
            Eigen::MatrixXd rows(static_cast<Eigen::Index>(k), cols);
            Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
            for (std::size_t m = 0; m < k; ++m) {
                rows.row(static_cast<Eigen::Index>(m)) = vectors[m].transpose() * table.matrix(m, k);
                rhs(static_cast<Eigen::Index>(m)) = target.entries.at(m, k);
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullU | Eigen::ComputeFullV);
            const auto rank = numeric_rank(svd.singularValues());
            if (rank < k) {
                failed_step = k + 1;
                failed_rank = rank;
                solved = false;
                break;
            }
            svd.setThreshold(kRankThreshold);
            Eigen::VectorXd x;
            if (const auto& p = pinned(k)) {
                if (p->size() != cols)
                    throw std::invalid_argument(fmt::format("pinned vector for set {} has wrong size", k + 1));
                x = *p + svd.solve(rhs - rows * *p);
            } else {
                x = svd.solve(rhs);
                const auto nullity = cols - static_cast<Eigen::Index>(rank);
                if (nullity > 0)
                    x += svd.matrixV().rightCols(nullity) * gaussian(rng, nullity);
            }
            step_rows.push_back(rows);
            vectors.push_back(std::move(x));
        }
    }
    if (!solved)
        throw LiConditionError(failed_step, failed_rank,
                               fmt::format("linear independence fails at set {} (rank {} < {}) after {} attempts",
                                           failed_step, failed_rank, failed_step - 1, attempt));

    auto raw = realized_couplings(table, vectors);
    if (trace) {
        trace->step_rows = step_rows;
        trace->raw_vectors = vectors;
        trace->attempts = attempt;
        trace->max_abs_component = 0.0;
        for (const auto& v : vectors)
            trace->max_abs_component = std::max(trace->max_abs_component, v.cwiseAbs().maxCoeff());
    }
    auto out = rescale_solution(std::move(vectors), std::move(raw));
    double sq = 0.0;
    for (std::size_t p = 0; p < out.couplings.pair_count(); ++p) {
        const double d = out.couplings.values()[p] - out.target_scale * target.entries.values()[p];
        sq += d * d;
    }
    out.residual = std::sqrt(sq);
    return out;
}

BilinearProblem make_problem(const InteractionTable& table, const TargetPattern& pattern)
{
    std::vector<std::size_t> cls(table.set_count());
    for (std::size_t i = 0; i < cls.size(); ++i)
        cls[i] = i;
    return make_problem(table, pattern, cls);
}

BilinearProblem make_problem(const InteractionTable& table, const TargetPattern& pattern,
                             std::span<const std::size_t> set_class)
{
    const auto n = table.set_count();
    if (pattern.set_count() != n || set_class.size() != n)
        throw std::invalid_argument("pattern, grouping and class map disagree on set count");
    BilinearProblem problem;
    const auto classes = n == 0 ? 0 : *std::max_element(set_class.begin(), set_class.end()) + 1;
    problem.dims.assign(classes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& d = problem.dims[set_class[i]];
        if (d != 0 && d != table.set_size(i))
            throw std::invalid_argument(fmt::format("sets sharing class {} differ in size", set_class[i]));
        d = table.set_size(i);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& f = table.matrix(i, j);
            const double c = pattern.entries.at(i, j);
            const bool empty = f.cwiseAbs().maxCoeff() == 0.0;
            if (empty && c == 0.0)
                continue;
            if (empty)
                throw InfeasibleError(fmt::format("pair ({}, {}) has nonzero ratio but no physical coupling", i + 1, j + 1));
            BilinearTerm t{set_class[i], set_class[j], f, c, fmt::format("{}-{}", i + 1, j + 1)};
            const bool dup = std::any_of(problem.terms.begin(), problem.terms.end(), [&](const BilinearTerm& o) {
                return o.a == t.a && o.b == t.b && o.ratio == t.ratio && o.f.rows() == t.f.rows() &&
                       o.f.cols() == t.f.cols() && o.f == t.f;
            });
            if (!dup)
                problem.terms.push_back(std::move(t));
        }
    return problem;
}

namespace {

class BilinearEvaluator {
public:
    explicit BilinearEvaluator(const BilinearProblem& p) : p_(p)
    {
        offsets_.push_back(0);
        for (auto d : p_.dims)
            offsets_.push_back(offsets_.back() + d);
        for (const auto& t : p_.terms)
            ratio_sq_ += t.ratio * t.ratio;
    }

    Eigen::Index size() const { return static_cast<Eigen::Index>(offsets_.back()); }
    double ratio_sq() const { return ratio_sq_; }

    auto block(const Eigen::VectorXd& x, std::size_t v) const
    {
        return x.segment(static_cast<Eigen::Index>(offsets_[v]), static_cast<Eigen::Index>(p_.dims[v]));
    }

    Eigen::VectorXd values(const Eigen::VectorXd& x) const
    {
        Eigen::VectorXd g(static_cast<Eigen::Index>(p_.terms.size()));
        for (std::size_t t = 0; t < p_.terms.size(); ++t) {
            const auto& term = p_.terms[t];
            g(static_cast<Eigen::Index>(t)) = block(x, term.a).dot(term.f * block(x, term.b));
        }
        return g;
    }

    double fit(const Eigen::VectorXd& g) const
    {
        double num = 0.0;
        for (std::size_t t = 0; t < p_.terms.size(); ++t)
            num += p_.terms[t].ratio * g(static_cast<Eigen::Index>(t));
        return num / ratio_sq_;
    }

    Eigen::VectorXd residuals(const Eigen::VectorXd& g, double lambda) const
    {
        Eigen::VectorXd r = g;
        for (std::size_t t = 0; t < p_.terms.size(); ++t)
            r(static_cast<Eigen::Index>(t)) -= p_.terms[t].ratio * lambda;
        return r;
    }

    void add_gradient(Eigen::VectorXd& out, std::size_t t, const Eigen::VectorXd& x, double w) const
    {
        const auto& term = p_.terms[t];
        const auto oa = static_cast<Eigen::Index>(offsets_[term.a]);
        const auto ob = static_cast<Eigen::Index>(offsets_[term.b]);
        out.segment(oa, term.f.rows()) += w * (term.f * block(x, term.b));
        out.segment(ob, term.f.cols()) += w * (term.f.transpose() * block(x, term.a));
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const
    {
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p_.terms.size()), size());
        for (std::size_t t = 0; t < p_.terms.size(); ++t) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(size());
            add_gradient(row, t, x, 1.0);
            jac.row(static_cast<Eigen::Index>(t)) = row.transpose();
        }
        return jac;
    }

    double objective(const Eigen::VectorXd& x, double mu) const
    {
        const auto g = values(x);
        const double lambda = fit(g);
        return lambda - mu * residuals(g, lambda).squaredNorm();
    }

    Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x, double mu) const
    {
        const auto g = values(x);
        const double lambda = fit(g);
        const auto r = residuals(g, lambda);
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(size());
        for (std::size_t t = 0; t < p_.terms.size(); ++t) {
            const double w = p_.terms[t].ratio / ratio_sq_ - 2.0 * mu * r(static_cast<Eigen::Index>(t));
            add_gradient(grad, t, x, w);
        }
        return grad;
    }

    const BilinearProblem& problem() const { return p_; }

private:
    const BilinearProblem& p_;
    std::vector<std::size_t> offsets_;
    double ratio_sq_ = 0.0;
};

Eigen::VectorXd clamp_box(Eigen::VectorXd x) { return x.cwiseMax(-1.0).cwiseMin(1.0); }

struct StartResult {
    Eigen::VectorXd x;
    double lambda = -std::numeric_limits<double>::infinity();
    double residual = std::numeric_limits<double>::infinity();
    bool feasible = false;
};

// Gauss-Newton on (free components, lambda) to drive the ratio residuals to zero.
void restore_feasibility(const BilinearEvaluator& ev, Eigen::VectorXd& x, double& lambda)
{
    const auto n = ev.size();
    const auto& terms = ev.problem().terms;
    for (int it = 0; it < 60; ++it) {
        const auto g = ev.values(x);
        const auto r = ev.residuals(g, lambda);
        const double scale = std::max(std::abs(lambda), 1e-300);
        if (r.cwiseAbs().maxCoeff() <= 1e-14 * scale)
            break;
        const auto jx = ev.jacobian(x);
        std::vector<Eigen::Index> free;
        for (Eigen::Index k = 0; k < n; ++k) {
            const bool at_bound = std::abs(x(k)) >= 1.0 - 1e-12;
            if (!at_bound)
                free.push_back(k);
        }
        Eigen::MatrixXd jac(jx.rows(), static_cast<Eigen::Index>(free.size()) + 1);
        for (std::size_t c = 0; c < free.size(); ++c)
            jac.col(static_cast<Eigen::Index>(c)) = jx.col(free[c]);
        for (std::size_t t = 0; t < terms.size(); ++t)
            jac(static_cast<Eigen::Index>(t), jac.cols() - 1) = -terms[t].ratio;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jac);
        const Eigen::VectorXd step = cod.solve(-r);
        for (std::size_t c = 0; c < free.size(); ++c)
            x(free[c]) += step(static_cast<Eigen::Index>(c));
        lambda += step(step.size() - 1);
        x = clamp_box(std::move(x));
    }
}

StartResult run_start(const BilinearEvaluator& ev, const MaximizeOptions& opt, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd x(ev.size());
    for (Eigen::Index k = 0; k < x.size(); ++k)
        x(k) = uni(rng);

    double mu = 1.0;
    double step = 0.05;
    double phi = ev.objective(x, mu);
    for (std::size_t it = 0; it < opt.iterations; ++it) {
        if (it > 0 && opt.penalty_period > 0 && it % opt.penalty_period == 0) {
            mu *= opt.penalty_growth;
            phi = ev.objective(x, mu);
            step = std::min(step, 0.05 / std::sqrt(mu));
        }
        const auto grad = ev.objective_gradient(x, mu);
        bool moved = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::VectorXd trial = clamp_box(x + step * grad);
            const double phi_trial = ev.objective(trial, mu);
            if (phi_trial >= phi) {
                moved = (trial - x).cwiseAbs().maxCoeff() > 0.0;
                x = std::move(trial);
                phi = phi_trial;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if (!moved && step < 1e-16)
            step = 1e-8;
    }

    StartResult out;
    double lambda = ev.fit(ev.values(x));
    restore_feasibility(ev, x, lambda);
    const auto g = ev.values(x);
    lambda = ev.fit(g);
    out.residual = ev.residuals(g, lambda).cwiseAbs().maxCoeff();
    out.lambda = lambda;
    out.x = std::move(x);
    out.feasible = lambda > 1e-9 && out.residual <= opt.tolerance * std::abs(lambda);
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

CouplingOptimum maximize_coupling(const BilinearProblem& problem, const MaximizeOptions& options)
{
    if (problem.terms.empty())
        throw std::invalid_argument("no constraints to optimize");
    BilinearEvaluator ev(problem);
    if (ev.ratio_sq() == 0.0)
        throw std::invalid_argument("ratio pattern needs at least one nonzero ratio");

    std::vector<StartResult> results(options.starts);
    std::size_t workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(options.starts, 1));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t s = w; s < options.starts; s += workers)
                    results[s] = run_start(ev, options, mix_seed(options.seed, s));
            });
    }

    CouplingOptimum best;
    std::optional<std::size_t> best_index;
    double worst_residual_term = 0.0;
    for (std::size_t s = 0; s < results.size(); ++s) {
        const auto& r = results[s];
        if (r.feasible) {
            ++best.feasible_starts;
            if (!best_index || r.lambda > results[*best_index].lambda)
                best_index = s;
        }
        worst_residual_term = std::max(worst_residual_term, r.residual);
        best.best_so_far.push_back(best_index ? results[*best_index].lambda : 0.0);
    }
    if (!best_index) {
        // Name the constraint that is hardest to meet in the least-violating start.
        const auto it = std::min_element(results.begin(), results.end(), [](const StartResult& a, const StartResult& b) {
            return a.residual / std::max(std::abs(a.lambda), 1e-300) < b.residual / std::max(std::abs(b.lambda), 1e-300);
        });
        std::string pair = "?";
        if (it != results.end() && it->x.size() > 0) {
            const auto g = ev.values(it->x);
            Eigen::Index worst = 0;
            ev.residuals(g, it->lambda).cwiseAbs().maxCoeff(&worst);
            pair = problem.terms[static_cast<std::size_t>(worst)].label;
        }
        throw InfeasibleError(fmt::format("no feasible point with positive coupling; worst constraint is pair {}", pair));
    }
    const auto& r = results[*best_index];
    best.lambda = r.lambda;
    best.residual = r.residual;
    for (std::size_t v = 0; v < problem.dims.size(); ++v)
        best.variables.push_back(ev.block(r.x, v));
    return best;
}

LogicalSolution maximize_coupling(const InteractionTable& table, const TargetPattern& pattern,
                                  const MaximizeOptions& options)
{
    if (!pattern.ratio_form)
        throw std::invalid_argument("maximize_coupling needs a ratio-form pattern");
    const auto opt = maximize_coupling(make_problem(table, pattern), options);
    LogicalSolution out;
    out.vectors = opt.variables;
    out.couplings = realized_couplings(table, out.vectors);
    out.lambda_max = opt.lambda;
    out.target_scale = opt.lambda;
    double sq = 0.0;
    for (std::size_t p = 0; p < out.couplings.pair_count(); ++p) {
        const double d = out.couplings.values()[p] - opt.lambda * pattern.entries.values()[p];
        sq += d * d;
    }
    out.residual = std::sqrt(sq);
    return out;
}

PatternReport verify_pattern(const LogicalSolution& solution, const InteractionTable& table,
                             const TargetPattern& pattern, double tolerance)
{
    PatternReport rep;
    rep.tolerance = tolerance;
    const auto realized = realized_couplings(table, solution.vectors);
    for (const auto& v : solution.vectors)
        if (v.size() > 0 && v.cwiseAbs().maxCoeff() > 1.0 + kBoxSlack)
            rep.box_ok = false;

    const auto& c = pattern.entries.values();
    if (pattern.ratio_form) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t p = 0; p < c.size(); ++p) {
            num += c[p] * realized.values()[p];
            den += c[p] * c[p];
        }
        rep.scale = den > 0.0 ? num / den : 0.0;
    } else {
        rep.scale = solution.target_scale;
    }
    double reference = 0.0;
    for (double v : c)
        reference = std::max(reference, std::abs(v * rep.scale));
    const bool degenerate = reference == 0.0;
    if (degenerate)
        reference = 1.0;

    rep.passed = rep.box_ok && !(pattern.ratio_form && rep.scale <= 0.0);
    for (std::size_t p = 0; p < c.size(); ++p) {
        const auto [i, j] = pattern.entries.pair(p);
        PairCheck pc{i, j, c[p] * rep.scale, realized.values()[p], false};
        const double dev = std::abs(pc.realized - pc.expected) / reference;
        rep.max_deviation = std::max(rep.max_deviation, dev);
        pc.ok = dev <= tolerance;
        rep.passed = rep.passed && pc.ok;
        rep.pairs.push_back(pc);
    }
    return rep;
}

} // namespace lqs
