#pragma once

// Statevector inner loops. Every kernel has a portable scalar version and an
// AVX2/FMA version; the dispatcher picks AVX2 when the CPU supports it. Both
// backends must agree to round-off, which the equivalence tests enforce.

#include <complex>
#include <cstddef>
#include <optional>
#include <string_view>

namespace lqs::kernels {

using cplx = std::complex<double>;

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b);

struct KernelTable {
    /// energy[z] += f * z_a * z_b, where bit q of z set means z_q = -1.
    void (*accumulate_zz)(double* energy, std::size_t n, unsigned a, unsigned b, double f);
    /// amp[z] *= phase[z]
    void (*multiply_diagonal)(cplx* amp, const cplx* phase, std::size_t n);
    /// 2x2 unitary {m00, m01, m10, m11} on qubit q.
    void (*apply_single)(cplx* amp, std::size_t n, unsigned q, const cplx* m);
    /// sum |amp|^2
    double (*norm_squared)(const cplx* amp, std::size_t n);
    /// sum conj(a) * b
    cplx (*inner)(const cplx* a, const cplx* b, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the binary was built without AVX2 support.
const KernelTable* avx2_table();

bool avx2_supported();
/// Backend used by active(); an override wins if set and supported.
Backend active_backend();
void set_backend_override(std::optional<Backend> b);
const KernelTable& table(Backend b);
const KernelTable& active();

} // namespace lqs::kernels
