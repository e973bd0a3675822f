#include "lqsim/kernels.hpp"

#include <immintrin.h>

namespace lqs::kernels {

namespace {

// Two interleaved complex numbers per register.
inline __m256d cmul(__m256d a, __m256d b)
{
    const __m256d b_re = _mm256_movedup_pd(b);
    const __m256d b_im = _mm256_permute_pd(b, 0xF);
    const __m256d a_sw = _mm256_permute_pd(a, 0x5);
    return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

inline __m256d broadcast(cplx c) { return _mm256_setr_pd(c.real(), c.imag(), c.real(), c.imag()); }

inline double hsum(__m256d v)
{
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void accumulate_zz(double* energy, std::size_t n, unsigned a, unsigned b, double f)
{
    if (n < 4) {
        scalar_table().accumulate_zz(energy, n, a, b, f);
        return;
    }
    double lanes[4];
    for (unsigned l = 0; l < 4; ++l) {
        unsigned p = 0;
        if (a < 2)
            p ^= (l >> a) & 1U;
        if (b < 2)
            p ^= (l >> b) & 1U;
        lanes[l] = p ? -f : f;
    }
    const __m256d plus = _mm256_loadu_pd(lanes);
    const __m256d minus = _mm256_sub_pd(_mm256_setzero_pd(), plus);
    for (std::size_t base = 0; base < n; base += 4) {
        std::size_t p = 0;
        if (a >= 2)
            p ^= base >> a;
        if (b >= 2)
            p ^= base >> b;
        const __m256d add = (p & 1U) ? minus : plus;
        _mm256_storeu_pd(energy + base, _mm256_add_pd(_mm256_loadu_pd(energy + base), add));
    }
}

void multiply_diagonal(cplx* amp, const cplx* phase, std::size_t n)
{
    auto* a = reinterpret_cast<double*>(amp);
    const auto* p = reinterpret_cast<const double*>(phase);
    std::size_t z = 0;
    for (; z + 2 <= n; z += 2)
        _mm256_storeu_pd(a + 2 * z, cmul(_mm256_loadu_pd(a + 2 * z), _mm256_loadu_pd(p + 2 * z)));
    for (; z < n; ++z)
        amp[z] *= phase[z];
}

void apply_single(cplx* amp, std::size_t n, unsigned q, const cplx* m)
{
    const std::size_t stride = std::size_t{1} << q;
    if (stride < 2) {
        scalar_table().apply_single(amp, n, q, m);
        return;
    }
    const __m256d m0 = broadcast(m[0]);
    const __m256d m1 = broadcast(m[1]);
    const __m256d m2 = broadcast(m[2]);
    const __m256d m3 = broadcast(m[3]);
    auto* d = reinterpret_cast<double*>(amp);
    for (std::size_t base = 0; base < n; base += 2 * stride)
        for (std::size_t k = base; k < base + stride; k += 2) {
            double* p0 = d + 2 * k;
            double* p1 = d + 2 * (k + stride);
            const __m256d a0 = _mm256_loadu_pd(p0);
            const __m256d a1 = _mm256_loadu_pd(p1);
            _mm256_storeu_pd(p0, _mm256_add_pd(cmul(m0, a0), cmul(m1, a1)));
            _mm256_storeu_pd(p1, _mm256_add_pd(cmul(m2, a0), cmul(m3, a1)));
        }
}

double norm_squared(const cplx* amp, std::size_t n)
{
    const auto* d = reinterpret_cast<const double*>(amp);
    __m256d acc = _mm256_setzero_pd();
    std::size_t z = 0;
    for (; z + 2 <= n; z += 2) {
        const __m256d v = _mm256_loadu_pd(d + 2 * z);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; z < n; ++z)
        s += std::norm(amp[z]);
    return s;
}

cplx inner(const cplx* a, const cplx* b, std::size_t n)
{
    const auto* da = reinterpret_cast<const double*>(a);
    const auto* db = reinterpret_cast<const double*>(b);
    __m256d re = _mm256_setzero_pd();
    __m256d im = _mm256_setzero_pd();
    std::size_t z = 0;
    for (; z + 2 <= n; z += 2) {
        const __m256d va = _mm256_loadu_pd(da + 2 * z);
        const __m256d vb = _mm256_loadu_pd(db + 2 * z);
        re = _mm256_fmadd_pd(va, vb, re);
        im = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0x5), im);
    }
    // im lanes hold (ar*bi, ai*br) pairs; the imaginary part is their difference.
    const __m256d sign = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
    cplx s(hsum(re), hsum(_mm256_mul_pd(im, sign)));
    for (; z < n; ++z)
        s += std::conj(a[z]) * b[z];
    return s;
}

constexpr KernelTable kAvx2{accumulate_zz, multiply_diagonal, apply_single, norm_squared, inner};

} // namespace

const KernelTable* avx2_table() { return &kAvx2; }

} // namespace lqs::kernels
