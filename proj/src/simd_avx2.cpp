#include "nblda/simd.hpp"

#if defined(NBLDA_HAVE_AVX2)

#include <cmath>
#include <immintrin.h>

namespace nblda::simd::detail {

namespace {

// log(1+u) for u >= 0, 4 lanes. Range reduction w = 1+u = m * 2^k with
// m in [sqrt(2)/2, sqrt(2)), atanh series on s = (m-1)/(m+1), plus the
// fdlibm-style correction (u - (w-1))/w for the rounding of 1+u.
inline __m256d log1p_pd(__m256d u) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d sqrt2 = _mm256_set1_pd(1.4142135623730951);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

    const __m256d w = _mm256_add_pd(one, u);
    const __m256d c = _mm256_sub_pd(u, _mm256_sub_pd(w, one));
    const __m256d corr = _mm256_div_pd(c, w);

    // Exponent and mantissa in [1, 2).
    const __m256i bits = _mm256_castpd_si256(w);
    const __m256i expo = _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(1023));
    const __m256i mant_bits = _mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
        _mm256_set1_epi64x(0x3ff0000000000000LL));
    __m256d m = _mm256_castsi256_pd(mant_bits);

    // Exponent (small nonnegative integer) to double via the 2^52 bias trick.
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000LL);
    __m256d kd = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(expo, magic)),
                               _mm256_set1_pd(4503599627370496.0));

    // Pull m into [sqrt(2)/2, sqrt(2)).
    const __m256d too_big = _mm256_cmp_pd(m, sqrt2, _CMP_GE_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, half), too_big);
    kd = _mm256_add_pd(kd, _mm256_and_pd(too_big, one));

    const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d t = _mm256_mul_pd(s, s);

    // sum_{j=0..10} t^j/(2j+1), Horner.
    __m256d p = _mm256_set1_pd(1.0 / 21.0);
    p = _mm256_add_pd(_mm256_mul_pd(p, t), _mm256_set1_pd(1.0 / 19.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, t), _mm256_set1_pd(1.0 / 17.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, t), _mm256_set1_pd(1.0 / 15.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, t), _mm256_set1_pd(1.0 / 13.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, t), _mm256_set1_pd(1.0 / 11.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, t), _mm256_set1_pd(1.0 / 9.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, t), _mm256_set1_pd(1.0 / 7.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, t), _mm256_set1_pd(1.0 / 5.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, t), _mm256_set1_pd(1.0 / 3.0));
    p = _mm256_add_pd(_mm256_mul_pd(p, t), one);

    const __m256d log_m = _mm256_mul_pd(_mm256_add_pd(s, s), p);
    const __m256d small = _mm256_add_pd(_mm256_add_pd(log_m, corr), _mm256_mul_pd(kd, ln2_lo));
    return _mm256_add_pd(_mm256_mul_pd(kd, ln2_hi), small);
}

inline double reduce_pd(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

} // namespace

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double out = reduce_pd(acc);
    for (; i < n; ++i) out += x[i];
    return out;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    double out = reduce_pd(acc);
    for (; i < n; ++i) out += a[i] * b[i];
    return out;
}

double sum_sq_dev_avx2(const double* x, std::size_t n, double mean) {
    const __m256d mu = _mm256_set1_pd(mean);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), mu);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    double out = reduce_pd(acc);
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        out += d * d;
    }
    return out;
}

ScoreTerms nblda_terms_avx2(const double* x, const double* logd, const double* u,
                            const double* inv_phi, std::size_t n) {
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d l1p = log1p_pd(_mm256_loadu_pd(u + i));
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d dv = _mm256_sub_pd(_mm256_loadu_pd(logd + i), l1p);
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(xv, dv));
        acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(_mm256_loadu_pd(inv_phi + i), l1p));
    }
    ScoreTerms out{reduce_pd(acc1), reduce_pd(acc2)};
    for (; i < n; ++i) {
        const double l1p = std::log1p(u[i]);
        out.t1 += x[i] * (logd[i] - l1p);
        out.t2 += inv_phi[i] * l1p;
    }
    return out;
}

} // namespace nblda::simd::detail

#endif // NBLDA_HAVE_AVX2
