#include "lqsim/kernels.hpp"

namespace lqs::kernels {

const KernelTable* avx2_table() { return nullptr; }

} // namespace lqs::kernels
