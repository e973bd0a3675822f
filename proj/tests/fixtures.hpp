#pragma once

#include <vector>

#include "lqsim/lattice.hpp"

namespace lqs::testing {

// 4x4 unit lattice, 1/d couplings, four 2x2 corner blocks: TL, TR, BL, BR.
inline PhysicalLayout square4()
{
    return PhysicalLayout::square(4, 4, CouplingLaw{});
}

inline Grouping corner_blocks()
{
    return Grouping(16, {{0, 1, 4, 5}, {2, 3, 6, 7}, {8, 9, 12, 13}, {10, 11, 14, 15}});
}

} // namespace lqs::testing
