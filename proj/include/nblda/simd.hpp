#pragma once

#include <cstddef>

namespace nblda::simd {

enum class Isa { Scalar, Avx2 };

// Kernel set currently in use. Resolved once from CPU detection and the
// NBLDA_SIMD environment variable (scalar | avx2 | auto).
Isa active_isa();

// Test hook: force a kernel set at runtime.
void force_isa(Isa isa);

bool avx2_supported();

double sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum_sq_dev(const double* x, std::size_t n, double mean);

// Fused accumulation for the NBLDA score over genes with positive dispersion:
//   t1 = sum_g x[g] * (logd[g] - log(1 + u[g]))
//   t2 = sum_g inv_phi[g] * log(1 + u[g])
struct ScoreTerms {
    double t1;
    double t2;
};
ScoreTerms nblda_terms(const double* x, const double* logd, const double* u,
                       const double* inv_phi, std::size_t n);

namespace detail {
double sum_scalar(const double* x, std::size_t n);
double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_sq_dev_scalar(const double* x, std::size_t n, double mean);
ScoreTerms nblda_terms_scalar(const double* x, const double* logd, const double* u,
                              const double* inv_phi, std::size_t n);
#if defined(NBLDA_HAVE_AVX2)
double sum_avx2(const double* x, std::size_t n);
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_sq_dev_avx2(const double* x, std::size_t n, double mean);
ScoreTerms nblda_terms_avx2(const double* x, const double* logd, const double* u,
                            const double* inv_phi, std::size_t n);
#endif
} // namespace detail

} // namespace nblda::simd
