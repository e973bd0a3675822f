#include "lqsim/logical_circuit.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace lqs {

std::size_t LogicalCircuit::register_count() const
{
    std::size_t n = 0;
    for (const auto& op : ops)
        if (const auto* m = std::get_if<LogicalMeasureOp>(&op))
            n = std::max(n, m->reg + 1);
    return n;
}

void validate(const LogicalCircuit& circuit)
{
    const auto n = circuit.qubit_count;
    auto check = [n](std::size_t q) {
        if (q >= n)
            throw std::invalid_argument(fmt::format("logical qubit {} out of range for {} qubits", q, n));
    };
    for (const auto& op : circuit.ops) {
        if (const auto* p = std::get_if<PrepPlusOp>(&op)) {
            check(p->qubit);
        } else if (const auto* g = std::get_if<LogicalGateOp>(&op)) {
            check(g->qubit);
            if (!gates::is_unitary(g->matrix, 1e-8))
                throw std::invalid_argument(fmt::format("logical gate {} is not unitary", g->label));
        } else if (const auto* e = std::get_if<LogicalEvolveOp>(&op)) {
            if (e->couplings.n() != n)
                throw std::invalid_argument("evolution pattern size differs from circuit size");
            if (!(e->time >= 0.0))
                throw std::invalid_argument("logical evolution time must be non-negative");
        } else if (const auto* m = std::get_if<LogicalMeasureOp>(&op)) {
            check(m->qubit);
            if (!gates::is_unitary(m->basis, 1e-8))
                throw std::invalid_argument("measurement basis columns must be orthonormal");
        }
    }
}

} // namespace lqs
