#include "nblda/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace nblda::simd {

bool avx2_supported() {
#if defined(NBLDA_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

namespace {

Isa resolve_from_environment() {
    const char* req = std::getenv("NBLDA_SIMD");
    if (req != nullptr) {
        if (std::strcmp(req, "scalar") == 0) return Isa::Scalar;
        if (std::strcmp(req, "avx2") == 0) return avx2_supported() ? Isa::Avx2 : Isa::Scalar;
    }
    return avx2_supported() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int> g_isa{-1};

Isa current() {
    int v = g_isa.load(std::memory_order_relaxed);
    if (v < 0) {
        v = static_cast<int>(resolve_from_environment());
        g_isa.store(v, std::memory_order_relaxed);
    }
    return static_cast<Isa>(v);
}

} // namespace

Isa active_isa() { return current(); }

void force_isa(Isa isa) {
    if (isa == Isa::Avx2 && !avx2_supported()) isa = Isa::Scalar;
    g_isa.store(static_cast<int>(isa), std::memory_order_relaxed);
}

double sum(const double* x, std::size_t n) {
#if defined(NBLDA_HAVE_AVX2)
    if (current() == Isa::Avx2) return detail::sum_avx2(x, n);
#endif
    return detail::sum_scalar(x, n);
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(NBLDA_HAVE_AVX2)
    if (current() == Isa::Avx2) return detail::dot_avx2(a, b, n);
#endif
    return detail::dot_scalar(a, b, n);
}

double sum_sq_dev(const double* x, std::size_t n, double mean) {
#if defined(NBLDA_HAVE_AVX2)
    if (current() == Isa::Avx2) return detail::sum_sq_dev_avx2(x, n, mean);
#endif
    return detail::sum_sq_dev_scalar(x, n, mean);
}

ScoreTerms nblda_terms(const double* x, const double* logd, const double* u,
                       const double* inv_phi, std::size_t n) {
#if defined(NBLDA_HAVE_AVX2)
    if (current() == Isa::Avx2) return detail::nblda_terms_avx2(x, logd, u, inv_phi, n);
#endif
    return detail::nblda_terms_scalar(x, logd, u, inv_phi, n);
}

} // namespace nblda::simd
