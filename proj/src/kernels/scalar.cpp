#include "lqsim/kernels.hpp"

namespace lqs::kernels {

namespace {

void accumulate_zz(double* energy, std::size_t n, unsigned a, unsigned b, double f)
{
    for (std::size_t z = 0; z < n; ++z)
        energy[z] += (((z >> a) ^ (z >> b)) & 1U) ? -f : f;
}

void multiply_diagonal(cplx* amp, const cplx* phase, std::size_t n)
{
    for (std::size_t z = 0; z < n; ++z)
        amp[z] *= phase[z];
}

void apply_single(cplx* amp, std::size_t n, unsigned q, const cplx* m)
{
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < n; base += 2 * stride)
        for (std::size_t k = base; k < base + stride; ++k) {
            const cplx a0 = amp[k];
            const cplx a1 = amp[k + stride];
            amp[k] = m[0] * a0 + m[1] * a1;
            amp[k + stride] = m[2] * a0 + m[3] * a1;
        }
}

double norm_squared(const cplx* amp, std::size_t n)
{
    double s = 0.0;
    for (std::size_t z = 0; z < n; ++z)
        s += std::norm(amp[z]);
    return s;
}

cplx inner(const cplx* a, const cplx* b, std::size_t n)
{
    cplx s = 0.0;
    for (std::size_t z = 0; z < n; ++z)
        s += std::conj(a[z]) * b[z];
    return s;
}

constexpr KernelTable kScalar{accumulate_zz, multiply_diagonal, apply_single, norm_squared, inner};

} // namespace

const KernelTable& scalar_table() { return kScalar; }

} // namespace lqs::kernels
