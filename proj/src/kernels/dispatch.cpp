#include "lqsim/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace lqs::kernels {

namespace {

// -1: no override, otherwise the Backend value.
std::atomic<int> g_override{-1};

} // namespace

std::string_view to_string(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

bool avx2_supported()
{
#if defined(__x86_64__) || defined(__i386__)
    static const bool ok = avx2_table() != nullptr && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Backend active_backend()
{
    const int o = g_override.load(std::memory_order_relaxed);
    if (o >= 0) {
        const auto b = static_cast<Backend>(o);
        if (b == Backend::Scalar || avx2_supported())
            return b;
    }
    return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

void set_backend_override(std::optional<Backend> b) { g_override.store(b ? static_cast<int>(*b) : -1); }

const KernelTable& table(Backend b)
{
    if (b == Backend::Avx2) {
        if (!avx2_supported())
            throw std::runtime_error("AVX2 kernels are not available on this machine");
        return *avx2_table();
    }
    return scalar_table();
}

const KernelTable& active() { return table(active_backend()); }

} // namespace lqs::kernels
