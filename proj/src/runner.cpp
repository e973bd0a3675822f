#include "lqsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "lqsim/cost_model.hpp"
#include "lqsim/dynamics.hpp"
#include "lqsim/errors.hpp"
#include "lqsim/flip_scheduler.hpp"
#include "lqsim/logical_compiler.hpp"

namespace lqs {

namespace fs = std::filesystem;

double fitted_lambda(const PairMap& couplings, const PairMap& pattern)
{
    double top = 0.0;
    for (double c : pattern.values())
        top = std::max(top, std::abs(c));
    if (top == 0.0)
        return 0.0;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < pattern.pair_count(); ++k) {
        const double c = pattern.values()[k] / top;
        num += c * couplings.values()[k];
        den += c * c;
    }
    return num / den;
}

double log_log_slope(const std::vector<std::size_t>& steps, const std::vector<double>& errors)
{
    if (steps.size() != errors.size() || steps.size() < 2)
        throw std::invalid_argument("slope needs at least two (steps, error) points");
    const auto n = static_cast<double>(steps.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const double x = std::log(static_cast<double>(steps[k])), y = std::log(errors[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

struct Context {
    const Scenario& s;
    const RunOptions& opt;
    Report& report;
    fs::path out;

    double tolerance() const { return opt.tolerance.value_or(s.checks.tolerance); }
    std::uint64_t seed() const { return opt.seed.value_or(s.run.seed); }

    void write(const std::string& file, const std::string& content) const
    {
        if (out.empty())
            return;
        std::ofstream f(out / file, std::ios::binary);
        f << content;
        if (!f)
            throw ConfigError(fmt::format("cannot write {}", (out / file).string()));
    }
};

const PatternSpec& need_pattern(const Scenario& s)
{
    if (!s.pattern)
        throw ConfigError(fmt::format("scenario '{}' has no pattern", s.name));
    return *s.pattern;
}

std::vector<Eigen::VectorXd> to_vectors(const std::vector<std::vector<double>>& rows)
{
    std::vector<Eigen::VectorXd> out;
    for (const auto& r : rows)
        out.push_back(Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size())));
    return out;
}

std::string vector_text(const Eigen::VectorXd& v)
{
    std::string out = "(";
    for (Eigen::Index k = 0; k < v.size(); ++k)
        out += (k ? ", " : "") + format_number(v[k]);
    return out + ")";
}

void report_couplings(Report& r, const std::string& section, const PairMap& m)
{
    for (std::size_t k = 0; k < m.pair_count(); ++k) {
        const auto [i, j] = m.pair(k);
        r.add(section, fmt::format("lambda_{}_{}", i + 1, j + 1), m.values()[k]);
    }
}

void report_vectors(Report& r, const std::vector<Eigen::VectorXd>& vs)
{
    for (std::size_t i = 0; i < vs.size(); ++i)
        r.add("vectors", fmt::format("s_{}", i + 1), vector_text(vs[i]));
}

// Pattern agreement, the fitted scale and an optional scale check.
void check_pattern(Context& c, const LogicalSolution& sol, const InteractionTable& table)
{
    const auto& p = need_pattern(c.s);
    const auto target = p.target();
    const auto pr = verify_pattern(sol, table, target, c.tolerance());
    const double lambda = fitted_lambda(sol.couplings, p.entries());
    c.report.add("pattern", "form", p.ratio_form ? "ratio" : "exact");
    c.report.add("pattern", "fitted_lambda", lambda);
    c.report.add("pattern", "max_relative_deviation", pr.max_deviation);
    c.report.add("pattern", "box_ok", pr.box_ok);
    std::size_t bad = 0;
    for (const auto& pc : pr.pairs)
        if (!pc.ok)
            ++bad;
    c.report.check("pattern", pr.passed,
                   fmt::format("max relative deviation {} vs tolerance {}, {} pair(s) off", format_number(pr.max_deviation),
                               format_number(c.tolerance()), bad));
    if (c.s.checks.lambda)
        c.report.check("lambda", c.s.checks.lambda->contains(lambda),
                       fmt::format("{} vs {} +- {}", format_number(lambda), format_number(c.s.checks.lambda->value),
                                   format_number(c.s.checks.lambda->tolerance)));
}

void write_graph(Context& c, const PairMap& couplings, const std::vector<std::pair<double, double>>& positions)
{
    auto g = interaction_graph(c.s.name, couplings);
    g.positions = positions;
    c.report.add("graph", "vertices", g.vertex_count);
    c.report.add("graph", "edges", g.edges.size());
    std::size_t negative = 0;
    for (const auto& e : g.edges)
        if (e.weight < 0)
            ++negative;
    c.report.add("graph", "negative_edges", negative);
    c.write("graph.dot", render_dot(g));
    if (c.opt.svg)
        c.write("graph.svg", render_svg(g));
}

std::vector<std::pair<double, double>> positions_of(const Scenario& s)
{
    if (!s.layout || !s.grouping)
        return {};
    return set_centroids(s.layout->build(), s.build_grouping());
}

void run_verify(Context& c)
{
    const auto layout = c.s.layout ? c.s.layout->build() : throw ConfigError("verify needs a layout");
    const auto grouping = c.s.build_grouping();
    if (c.s.vectors.empty())
        throw ConfigError(fmt::format("scenario '{}' has no vectors to verify", c.s.name));
    const InteractionTable table(layout, grouping);
    LogicalSolution sol;
    sol.vectors = to_vectors(c.s.vectors);
    sol.couplings = realized_couplings(table, sol.vectors);
    c.report.add("scenario", "reconstructed", c.s.reconstructed);
    report_couplings(c.report, "couplings", sol.couplings);
    check_pattern(c, sol, table);
    write_graph(c, sol.couplings, set_centroids(layout, grouping));
}

void run_solve(Context& c)
{
    const auto layout = c.s.layout ? c.s.layout->build() : throw ConfigError("solve needs a layout");
    const auto grouping = c.s.build_grouping();
    const InteractionTable table(layout, grouping);
    const auto& p = need_pattern(c.s);
    if (p.ratio_form)
        throw ConfigError("solve needs an exact-form pattern");
    SequentialSolveOptions o;
    o.seed = c.seed();
    for (const auto& row : c.s.pinned)
        o.pinned.push_back(row.empty() ? std::nullopt
                                       : std::optional<Eigen::VectorXd>(to_vectors({row}).front()));
    SequentialTrace trace;
    const auto sol = algorithm1_solve(table, p.target(), o, &trace);
    c.report.add("solve", "attempts", trace.attempts);
    c.report.add("solve", "max_abs_component", trace.max_abs_component);
    c.report.add("solve", "rescale", sol.target_scale);
    c.report.add("solve", "residual", sol.residual);
    for (std::size_t k = 0; k < trace.step_rows.size(); ++k)
        for (Eigen::Index m = 0; m < trace.step_rows[k].rows(); ++m)
            c.report.add("steps", fmt::format("row_{}_{}", k + 2, m + 1),
                         vector_text(trace.step_rows[k].row(m).transpose()));
    report_vectors(c.report, sol.vectors);
    report_couplings(c.report, "couplings", sol.couplings);
    check_pattern(c, sol, table);
    if (c.s.checks.rescale)
        c.report.check("rescale", c.s.checks.rescale->contains(sol.target_scale),
                       fmt::format("{} vs {} +- {}", format_number(sol.target_scale),
                                   format_number(c.s.checks.rescale->value),
                                   format_number(c.s.checks.rescale->tolerance)));
    if (!c.s.checks.step_row.empty()) {
        bool ok = !trace.step_rows.empty() && trace.step_rows[0].cols() ==
                                                  static_cast<Eigen::Index>(c.s.checks.step_row.size());
        double worst = 0.0;
        if (ok)
            for (std::size_t k = 0; k < c.s.checks.step_row.size(); ++k)
                worst = std::max(worst, std::abs(trace.step_rows[0](0, static_cast<Eigen::Index>(k)) -
                                                 c.s.checks.step_row[k]));
        ok = ok && worst <= c.s.checks.step_row_tolerance;
        c.report.check("step_row", ok,
                       fmt::format("max deviation {} vs {}", format_number(worst),
                                   format_number(c.s.checks.step_row_tolerance)));
    }
    write_graph(c, sol.couplings, set_centroids(layout, grouping));
}

void run_optimize(Context& c)
{
    const auto layout = c.s.layout ? c.s.layout->build() : throw ConfigError("optimize needs a layout");
    const auto grouping = c.s.build_grouping();
    const InteractionTable table(layout, grouping);
    const auto& p = need_pattern(c.s);
    if (!p.ratio_form)
        throw ConfigError("optimize needs a ratio-form pattern");
    const auto target = p.target();
    std::vector<std::size_t> classes = c.s.grouping->set_class;
    if (classes.empty())
        for (std::size_t i = 0; i < grouping.set_count(); ++i)
            classes.push_back(i);
    MaximizeOptions o;
    o.starts = c.s.run.starts;
    o.iterations = c.s.run.iterations;
    o.seed = c.seed();
    const auto problem = make_problem(table, target, classes);
    const auto best = maximize_coupling(problem, o);

    LogicalSolution sol;
    for (std::size_t i = 0; i < grouping.set_count(); ++i)
        sol.vectors.push_back(best.variables[classes[i]]);
    sol.couplings = realized_couplings(table, sol.vectors);
    sol.lambda_max = best.lambda;
    c.report.add("optimize", "classes", problem.dims.size());
    c.report.add("optimize", "starts", o.starts);
    c.report.add("optimize", "feasible_starts", best.feasible_starts);
    c.report.add("optimize", "lambda_max", best.lambda);
    c.report.add("optimize", "residual", best.residual);
    report_vectors(c.report, sol.vectors);
    report_couplings(c.report, "couplings", sol.couplings);
    check_pattern(c, sol, table);
    if (c.s.checks.lambda_min)
        c.report.check("lambda_min", best.lambda >= *c.s.checks.lambda_min,
                       fmt::format("{} vs floor {}", format_number(best.lambda), format_number(*c.s.checks.lambda_min)));
    write_graph(c, sol.couplings, set_centroids(layout, grouping));
}

void run_schedule(Context& c)
{
    const auto layout = c.s.layout ? c.s.layout->build() : throw ConfigError("schedule needs a layout");
    std::vector<double> spins = c.s.spins;
    std::optional<Grouping> grouping;
    if (c.s.grouping)
        grouping = c.s.build_grouping();
    if (spins.empty()) {
        if (!grouping || c.s.vectors.empty())
            throw ConfigError("schedule needs spins or a grouping with vectors");
        spins = embed_spins(*grouping, to_vectors(c.s.vectors));
    }
    if (spins.size() != layout.size())
        throw ConfigError(fmt::format("spins: {} given for {} qubits", spins.size(), layout.size()));
    if (layout.size() > 20)
        throw ConfigError("schedule oracle is limited to 20 qubits");
    const double tau = c.s.run.time_over_deltaJ;
    const double tol = c.tolerance();

    auto record = [&](const std::string& name, const FlipSchedule& sch, PhaseScope scope, const Grouping* g) {
        const auto chk = verify_schedule(layout, sch, scope, g);
        c.report.add(name, "flips", sch.flip_count());
        c.report.add(name, "events", sch.events().size());
        c.report.add(name, "max_phase_error", chk.max_error);
        c.report.check(name, chk.passed(tol),
                       fmt::format("max phase error {} vs {}", format_number(chk.max_error), format_number(tol)));
        c.write(name + ".txt", sch.event_table());
    };
    record("sequential", sequential_schedule(spins, tau), PhaseScope::AllPairs, nullptr);
    const auto coloring = Coloring::greedy(layout.size(), layout.edges());
    c.report.add("parallel", "colors", coloring.color_count());
    record("parallel", parallel_schedule(coloring, spins, tau), PhaseScope::AllPairs, nullptr);
    if (grouping)
        record("grouped", grouped_parallel_schedule(*grouping, spins, tau), PhaseScope::InterSetOnly, &*grouping);
}

Statevector encode_code_space(const Grouping& g, const Statevector& logical)
{
    std::vector<cplx> amps(std::size_t{1} << g.qubit_count(), 0.0);
    for (std::size_t x = 0; x < logical.dimension(); ++x) {
        std::size_t z = 0;
        for (SetIndex i = 0; i < g.set_count(); ++i)
            if (x >> i & 1U)
                for (auto q : g.set(i))
                    z |= std::size_t{1} << q;
        amps[z] = logical.amplitude(x);
    }
    return Statevector::from_amplitudes(std::move(amps));
}

void run_compile(Context& c)
{
    const auto layout = c.s.layout ? c.s.layout->build() : throw ConfigError("compile needs a layout");
    const auto grouping = c.s.build_grouping();
    const auto circuit = c.s.build_circuit();
    const auto program = compile_circuit(layout, grouping, circuit);
    c.report.add("program", "physical_qubits", layout.size());
    c.report.add("program", "total_time_over_deltaJ", program.total_time());
    c.report.add("program", "evolve_windows", program.evolve_count());
    c.report.add("program", "gates", program.gate_count());
    c.write("program.txt", program.listing());
    if (c.s.checks.total_time)
        c.report.check("total_time", c.s.checks.total_time->contains(program.total_time()),
                       fmt::format("{} vs {} +- {}", format_number(program.total_time()),
                                   format_number(c.s.checks.total_time->value),
                                   format_number(c.s.checks.total_time->tolerance)));

    const bool measures = std::any_of(circuit.ops.begin(), circuit.ops.end(),
                                      [](const auto& op) { return std::holds_alternative<LogicalMeasureOp>(op); });
    const auto cap = std::min(c.opt.max_qubits, kMaxStatevectorQubits);
    if (measures || layout.size() > cap) {
        c.report.add("simulation", "skipped", measures ? "circuit measures" : "register above --max-qubits");
        return;
    }
    std::mt19937_64 rng(c.seed());
    Statevector physical(layout.size());
    const auto run = apply_program(physical, layout, program, rng);
    Statevector logical(circuit.qubit_count);
    simulate_logical(logical, circuit, rng);
    const double f = encode_code_space(grouping, logical).fidelity(physical);
    c.report.add("simulation", "flips_applied", run.flips_applied);
    c.report.add("simulation", "fidelity", f);
    const double floor = c.s.checks.fidelity_min.value_or(1.0 - 1e-9);
    c.report.check("fidelity", f >= floor, fmt::format("{} vs floor {}", format_number(f), format_number(floor)));
}

void run_simulate(Context& c)
{
    const auto n = c.s.logical_count();
    if (n == 0)
        throw ConfigError("simulate needs logical qubits");
    if (n > std::min(c.opt.max_qubits, kMaxStatevectorQubits))
        throw ConfigError(fmt::format("{} logical qubits exceed --max-qubits", n));
    if (!c.s.trotter) {
        const auto circuit = c.s.build_circuit();
        std::mt19937_64 rng(c.seed());
        const auto regs = circuit.register_count();
        std::vector<std::size_t> minus(regs, 0);
        for (std::size_t shot = 0; shot < c.s.run.shots; ++shot) {
            Statevector st(n);
            const auto out = simulate_logical(st, circuit, rng);
            for (std::size_t r = 0; r < regs; ++r)
                minus[r] += out.registers[r] < 0 ? 1 : 0;
        }
        c.report.add("simulation", "shots", c.s.run.shots);
        for (std::size_t r = 0; r < regs; ++r)
            c.report.add("simulation", fmt::format("reg_{}_minus_fraction", r),
                         static_cast<double>(minus[r]) / static_cast<double>(std::max<std::size_t>(c.s.run.shots, 1)));
        return;
    }
    if (n > 12)
        throw ConfigError("Trotter study uses dense references, at most 12 logical qubits");
    const auto& p = need_pattern(c.s);
    PauliStringHamiltonian zz = PauliStringHamiltonian::from_logical(LogicalHamiltonian{p.entries()});
    PauliStringHamiltonian field(n);
    for (std::size_t q = 0; q < n; ++q)
        field.add(c.s.trotter->field, {{q, 'X'}});
    PauliStringHamiltonian full(n);
    for (const auto* h : {&zz, &field})
        for (const auto& t : h->terms())
            full.add(t.coeff, t.ops);
    const double total = c.s.run.time_over_deltaJ;
    const auto exact = unitary_of(n, [&](Statevector& st) { apply_exponential(st, full, total); });
    const std::vector<PauliStringHamiltonian> pieces{zz, field};
    std::vector<double> errors;
    for (auto k : c.s.trotter->steps) {
        const auto u = unitary_of(n, [&](Statevector& st) { trotter_evolve(st, pieces, total, k); });
        errors.push_back(operator_distance(u, exact));
        c.report.add("trotter", fmt::format("error_k{}", k), errors.back());
    }
    if (errors.size() >= 2) {
        const double slope = log_log_slope(c.s.trotter->steps, errors);
        c.report.add("trotter", "log_log_slope", slope);
        if (c.s.checks.slope_min || c.s.checks.slope_max) {
            const double lo = c.s.checks.slope_min.value_or(-INFINITY), hi = c.s.checks.slope_max.value_or(INFINITY);
            c.report.check("slope", slope >= lo && slope <= hi,
                           fmt::format("{} in [{}, {}]", format_number(slope), format_number(lo), format_number(hi)));
        }
    }
}

void run_compare(Context& c)
{
    CostInputs in;
    in.scenario = c.s.name;
    in.evolution_time = c.s.run.time_over_deltaJ;
    in.alternations = c.s.run.alternations;
    in.side = c.s.run.side;
    if (c.s.layout && c.s.grouping) {
        const auto t = measure_compiled_times(c.s.layout->build(), c.s.build_grouping());
        in.prep_time = t.prep_time;
        in.hadamard_time = t.hadamard_time;
        in.set_size = c.s.grouping->sets.front().size();
        c.report.add("compiled", "prep_time_over_deltaJ", t.prep_time);
        c.report.add("compiled", "hadamard_time_over_deltaJ", t.hadamard_time);
    }
    const auto r = compare_costs(in);
    c.report.add("cost", "evolution_time_over_deltaJ", r.evolution_time);
    c.report.add("cost", "alternations", r.alternations);
    c.report.add("cost", "side", r.side);
    c.report.add("cost", "prep_time_over_deltaJ", r.prep_time);
    c.report.add("cost", "hadamard_time_over_deltaJ", r.hadamard_time);
    c.report.add("cost", "rearrange_time_over_deltaJ", r.rearrange_time);
    c.report.add("cost", "rearrange_swaps", swap_rearrange_count(r.side).gates);
    c.report.add("cost", "rearrange_lower_bound", r.rearrange_bound);
    c.report.add("cost", "grouping_total", r.grouping_total);
    c.report.add("cost", "standard_total", r.standard_total);
    c.report.add("cost", "crossover", r.crossover ? format_number(*r.crossover) : std::string("none"));
    c.report.add("cost", "first_advantage",
                 r.first_advantage ? std::to_string(*r.first_advantage) : std::string("none"));
    c.report.add("cost", "standard_qubits", r.standard_qubits);
    c.report.add("cost", "grouping_qubits", r.grouping_qubits);

    if (c.s.run.construction_sets) {
        const auto k = polynomial_scaling_construction(c.s.run.construction_sets);
        c.report.add("construction", "logical_qubits", k.logical_count);
        c.report.add("construction", "blocks", k.blocks.size());
        c.report.add("construction", "physical_qubits", k.physical_qubits);
        c.report.add("construction", "closed_form", polynomial_scaling_closed_form(k.logical_count));
        // Every pair of logical sets needs bonds somewhere in the lattice.
        const auto layout = k.layout();
        const auto g = k.grouping();
        std::vector<std::size_t> bonds(k.logical_count * k.logical_count, 0);
        for (auto [a, b] : layout.edges()) {
            const auto sa = g.locate(a)->set, sb = g.locate(b)->set;
            if (sa != sb)
                ++bonds[std::min(sa, sb) * k.logical_count + std::max(sa, sb)];
        }
        std::size_t missing = 0, weakest = SIZE_MAX;
        for (std::size_t i = 0; i < k.logical_count; ++i)
            for (std::size_t j = i + 1; j < k.logical_count; ++j) {
                missing += bonds[i * k.logical_count + j] == 0;
                weakest = std::min(weakest, bonds[i * k.logical_count + j]);
            }
        c.report.add("construction", "min_bonds_per_pair", weakest);
        c.report.check("pair_coverage", missing == 0, fmt::format("{} uncovered pair(s)", missing));
        if (c.s.checks.physical_qubits)
            c.report.check("physical_qubits", k.physical_qubits == *c.s.checks.physical_qubits,
                           fmt::format("{} vs {}", k.physical_qubits, *c.s.checks.physical_qubits));
    }
}

void run_render(Context& c)
{
    PairMap couplings;
    if (!c.s.vectors.empty()) {
        const auto layout = c.s.layout ? c.s.layout->build() : throw ConfigError("render needs a layout");
        const InteractionTable table(layout, c.s.build_grouping());
        couplings = realized_couplings(table, to_vectors(c.s.vectors));
        c.report.add("graph", "source", "vectors");
    } else {
        couplings = need_pattern(c.s).entries();
        c.report.add("graph", "source", "pattern");
    }
    write_graph(c, couplings, positions_of(c.s));
}

} // namespace

RunResult run_scenario(const Scenario& s, const std::string& requested, const RunOptions& opt)
{
    RunResult r;
    r.scenario = s.name;
    r.action = requested.empty() ? s.action : requested;
    r.report.add("scenario", "name", s.name);
    r.report.add("scenario", "action", r.action);
    try {
        fs::path out;
        if (!opt.out_dir.empty()) {
            out = opt.out_dir;
            fs::create_directories(out);
        }
        Context c{s, opt, r.report, out};
        c.write("scenario.json", serialize(s));
        r.report.add("scenario", "seed", std::to_string(c.seed()));
        r.report.add("scenario", "tolerance", c.tolerance());
        if (r.action == "verify")
            run_verify(c);
        else if (r.action == "solve")
            run_solve(c);
        else if (r.action == "optimize")
            run_optimize(c);
        else if (r.action == "schedule")
            run_schedule(c);
        else if (r.action == "compile")
            run_compile(c);
        else if (r.action == "simulate")
            run_simulate(c);
        else if (r.action == "compare")
            run_compare(c);
        else if (r.action == "render")
            run_render(c);
        else
            throw ConfigError(fmt::format("unknown action '{}'", r.action));
        r.exit_code = r.report.passed() ? kExitOk : kExitVerification;
    } catch (const ConfigError& e) {
        r.report.add("error", "config", e.what());
        r.exit_code = kExitConfig;
    } catch (const VerificationError& e) {
        r.report.add("error", "verification", e.what());
        r.exit_code = kExitVerification;
    } catch (const InfeasibleError& e) {
        r.report.add("error", "infeasible", e.what());
        r.exit_code = kExitInfeasible;
    } catch (const std::invalid_argument& e) {
        r.report.add("error", "config", e.what());
        r.exit_code = kExitConfig;
    } catch (const fs::filesystem_error& e) {
        r.report.add("error", "config", e.what());
        r.exit_code = kExitConfig;
    }
    r.report.add("result", "status", r.exit_code == kExitOk ? "ok" : "failed");
    r.report.add("result", "exit_code", static_cast<std::size_t>(r.exit_code));
    if (!opt.out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(opt.out_dir, ec);
        std::ofstream(fs::path(opt.out_dir) / "report.txt", std::ios::binary) << r.report.format(opt.format);
    }
    return r;
}

BatchResult run_all(const std::string& dir, const RunOptions& options, std::size_t threads)
{
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(dir, ec))
        if (e.is_regular_file() && e.path().extension() == ".json")
            files.push_back(e.path());
    if (ec)
        throw ConfigError(fmt::format("cannot list scenarios in '{}': {}", dir, ec.message()));
    std::sort(files.begin(), files.end());

    BatchResult b;
    b.runs.resize(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto k = next++; k < files.size(); k = next++) {
            RunOptions o = options;
            const auto stem = files[k].stem().string();
            if (!options.out_dir.empty())
                o.out_dir = (fs::path(options.out_dir) / stem).string();
            try {
                b.runs[k] = run_scenario(load_scenario(files[k].string()), "", o);
            } catch (const ConfigError& e) {
                b.runs[k].scenario = stem;
                b.runs[k].report.add("error", "config", e.what());
                b.runs[k].exit_code = kExitConfig;
            }
        }
    };
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(files.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();

    std::size_t failed = 0;
    for (std::size_t k = 0; k < files.size(); ++k) {
        const auto& r = b.runs[k];
        b.exit_code = std::max(b.exit_code, r.exit_code);
        failed += r.exit_code != kExitOk;
        std::string status = r.exit_code == kExitOk ? "ok" : fmt::format("FAIL exit={}", r.exit_code);
        b.summary.add("fixtures", files[k].stem().string(), fmt::format("{} ({})", status, r.action));
    }
    b.summary.add("summary", "fixtures", files.size());
    b.summary.add("summary", "failed", failed);
    b.summary.add("summary", "exit_code", static_cast<std::size_t>(b.exit_code));
    if (!options.out_dir.empty()) {
        fs::create_directories(options.out_dir);
        std::ofstream(fs::path(options.out_dir) / "summary.txt", std::ios::binary) << b.summary.format(options.format);
    }
    return b;
}

} // namespace lqs
