#include "lqsim/pulse_program.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace lqs {

namespace {

using cd = std::complex<double>;

double time_of(const std::vector<PulseStep>& steps)
{
    double total = 0.0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const auto& op = steps[k].op;
        if (const auto* e = std::get_if<EvolveStep>(&op)) {
            total += e->duration;
        } else if (const auto* c = std::get_if<ConditionalStep>(&op)) {
            // Consecutive branches on one register are mutually exclusive.
            double longest = time_of(c->steps);
            while (k + 1 < steps.size()) {
                const auto* next = std::get_if<ConditionalStep>(&steps[k + 1].op);
                if (next == nullptr || next->reg != c->reg)
                    break;
                longest = std::max(longest, time_of(next->steps));
                ++k;
            }
            total += longest;
        }
    }
    return total;
}

template <class T>
std::size_t count_of(const std::vector<PulseStep>& steps)
{
    std::size_t n = 0;
    for (const auto& s : steps) {
        if (std::holds_alternative<T>(s.op))
            ++n;
        else if (const auto* c = std::get_if<ConditionalStep>(&s.op))
            n += count_of<T>(c->steps);
    }
    return n;
}

void list_steps(const std::vector<PulseStep>& steps, int depth, double& clock, std::string& out)
{
    const std::string indent(static_cast<std::size_t>(2 * depth), ' ');
    for (const auto& s : steps) {
        std::visit(
            [&](const auto& op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, EvolveStep>) {
                    std::size_t zeroed = 0;
                    std::size_t fractional = 0;
                    for (double x : op.spins) {
                        zeroed += x == 0.0 ? 1 : 0;
                        fractional += (x != 0.0 && std::abs(x) != 1.0) ? 1 : 0;
                    }
                    std::size_t channels = 1;
                    for (auto c : op.channels)
                        channels = std::max(channels, c + 1);
                    out += fmt::format("{}{:>10.6f}  evolve  duration={:.6f} zeroed={} fractional={} channels={}\n", indent,
                                       clock, op.duration, zeroed, fractional, channels);
                    clock += op.duration;
                } else if constexpr (std::is_same_v<T, GateStep>) {
                    out += fmt::format("{}{:>10.6f}  gate    q{} {}\n", indent, clock, op.qubit, op.label);
                } else if constexpr (std::is_same_v<T, MeasureStep>) {
                    out += fmt::format("{}{:>10.6f}  measure q{} -> r{}\n", indent, clock, op.qubit, op.reg);
                } else if constexpr (std::is_same_v<T, AssignStep>) {
                    out += fmt::format("{}{:>10.6f}  assign  r{} = {}\n", indent, clock, op.reg, op.value);
                } else {
                    out += fmt::format("{}{:>10.6f}  if r{} == {}\n", indent, clock, op.reg, op.value);
                    double branch = clock;
                    list_steps(op.steps, depth + 1, branch, out);
                }
            },
            s.op);
    }
}

void validate_steps(const std::vector<PulseStep>& steps, std::size_t m, std::size_t regs)
{
    for (const auto& s : steps) {
        if (const auto* e = std::get_if<EvolveStep>(&s.op)) {
            if (!(e->duration > 0.0) || !std::isfinite(e->duration))
                throw std::invalid_argument(fmt::format("evolve duration {} must be positive", e->duration));
            if (e->spins.size() != m)
                throw std::invalid_argument("evolve spin profile must cover every qubit");
            for (double x : e->spins)
                if (!(std::abs(x) <= 1.0))
                    throw std::invalid_argument(fmt::format("spin {} outside [-1, 1]", x));
            if (!e->channels.empty() && e->channels.size() != m)
                throw std::invalid_argument("evolve channel map must cover every qubit");
        } else if (const auto* g = std::get_if<GateStep>(&s.op)) {
            if (g->qubit >= m)
                throw std::invalid_argument(fmt::format("gate on missing qubit {}", g->qubit));
            if (!gates::is_unitary(g->matrix, 1e-8))
                throw std::invalid_argument(fmt::format("gate {} on qubit {} is not unitary", g->label, g->qubit));
        } else if (const auto* me = std::get_if<MeasureStep>(&s.op)) {
            if (me->qubit >= m || me->reg >= regs)
                throw std::invalid_argument("measurement references a missing qubit or register");
        } else if (const auto* a = std::get_if<AssignStep>(&s.op)) {
            if (a->reg >= regs)
                throw std::invalid_argument("assignment to a missing register");
        } else if (const auto* c = std::get_if<ConditionalStep>(&s.op)) {
            if (c->reg >= regs)
                throw std::invalid_argument("branch on a missing register");
            validate_steps(c->steps, m, regs);
        }
    }
}

} // namespace

void PulseProgram::evolve(double duration, std::vector<double> spins, std::vector<std::size_t> channels)
{
    steps_.push_back({EvolveStep{duration, std::move(spins), std::move(channels)}});
}

void PulseProgram::gate(QubitIndex q, const Mat2& m, std::string label)
{
    steps_.push_back({GateStep{q, m, std::move(label)}});
}

void PulseProgram::measure(QubitIndex q, std::size_t reg) { steps_.push_back({MeasureStep{q, reg}}); }

void PulseProgram::append(const PulseProgram& other)
{
    if (other.qubits_ != qubits_)
        throw std::invalid_argument("cannot append programs over different qubit counts");
    registers_ = std::max(registers_, other.registers_);
    steps_.insert(steps_.end(), other.steps_.begin(), other.steps_.end());
}

double PulseProgram::total_time() const { return time_of(steps_); }
std::size_t PulseProgram::evolve_count() const { return count_of<EvolveStep>(steps_); }
std::size_t PulseProgram::gate_count() const { return count_of<GateStep>(steps_); }

std::string PulseProgram::listing() const
{
    std::string out = fmt::format("# qubits={} registers={} total_time={:.6f}\n", qubits_, registers_, total_time());
    out += "#      time  step\n";
    double clock = 0.0;
    list_steps(steps_, 0, clock, out);
    return out;
}

void validate(const PulseProgram& program)
{
    validate_steps(program.steps(), program.qubit_count(), program.register_count());
}

namespace gates {

Mat2 identity() { return Mat2::Identity(); }

Mat2 pauli_x()
{
    Mat2 m;
    m << 0, 1, 1, 0;
    return m;
}

Mat2 pauli_y()
{
    Mat2 m;
    m << 0, cd(0, -1), cd(0, 1), 0;
    return m;
}

Mat2 pauli_z()
{
    Mat2 m;
    m << 1, 0, 0, -1;
    return m;
}

Mat2 hadamard()
{
    Mat2 m;
    m << 1, 1, 1, -1;
    return m / std::numbers::sqrt2;
}

Mat2 phase_s()
{
    Mat2 m;
    m << 1, 0, 0, cd(0, 1);
    return m;
}

Mat2 phase_s_dagger() { return phase_s().adjoint(); }

Mat2 rz(double phi)
{
    Mat2 m;
    m << std::polar(1.0, -phi / 2), 0, 0, std::polar(1.0, phi / 2);
    return m;
}

Mat2 rx(double theta)
{
    Mat2 m;
    m << std::cos(theta / 2), cd(0, -std::sin(theta / 2)), cd(0, -std::sin(theta / 2)), std::cos(theta / 2);
    return m;
}

bool is_unitary(const Mat2& m, double tol) { return (m.adjoint() * m - Mat2::Identity()).cwiseAbs().maxCoeff() < tol; }

} // namespace gates

} // namespace lqs
