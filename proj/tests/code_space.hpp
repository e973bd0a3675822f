#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "lqsim/dynamics.hpp"
#include "lqsim/lattice.hpp"

namespace lqs::testing {

// Physical basis index of logical basis index x: set i all |1> when bit i is set.
inline std::size_t code_index(const Grouping& g, std::size_t x)
{
    std::size_t z = 0;
    for (SetIndex i = 0; i < g.set_count(); ++i)
        if (x >> i & 1U)
            for (auto q : g.set(i))
                z |= std::size_t{1} << q;
    return z;
}

inline Statevector encode(const Grouping& g, const Statevector& logical)
{
    std::vector<cplx> amps(std::size_t{1} << g.qubit_count(), 0.0);
    for (std::size_t x = 0; x < logical.dimension(); ++x)
        amps[code_index(g, x)] = logical.amplitude(x);
    return Statevector::from_amplitudes(std::move(amps));
}

// Restriction to the code space; weight() tells how much of the state it holds.
struct Decoded {
    std::vector<cplx> amplitudes;
    double weight = 0.0;
    Statevector state() const { return Statevector::from_amplitudes(amplitudes); }
};

inline Decoded decode(const Grouping& g, const Statevector& physical)
{
    Decoded d;
    d.amplitudes.resize(std::size_t{1} << g.set_count());
    for (std::size_t x = 0; x < d.amplitudes.size(); ++x) {
        d.amplitudes[x] = physical.amplitude(code_index(g, x));
        d.weight += std::norm(d.amplitudes[x]);
    }
    return d;
}

inline Statevector random_state(std::mt19937_64& rng, std::size_t n)
{
    std::normal_distribution<double> gauss;
    std::vector<cplx> a(std::size_t{1} << n);
    double norm = 0.0;
    for (auto& x : a) {
        x = {gauss(rng), gauss(rng)};
        norm += std::norm(x);
    }
    for (auto& x : a)
        x /= std::sqrt(norm);
    return Statevector::from_amplitudes(std::move(a));
}

inline Mat2 random_unitary(std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss;
    Mat2 m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            m(r, c) = {gauss(rng), gauss(rng)};
    return Eigen::HouseholderQR<Mat2>(m).householderQ();
}

} // namespace lqs::testing
