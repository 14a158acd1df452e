#include "nblda/simd.hpp"

#include <cmath>

namespace nblda::simd::detail {

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_sq_dev_scalar(const double* x, std::size_t n, double mean) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        acc += d * d;
    }
    return acc;
}

ScoreTerms nblda_terms_scalar(const double* x, const double* logd, const double* u,
                              const double* inv_phi, std::size_t n) {
    double t1 = 0.0, t2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double l1p = std::log1p(u[i]);
        t1 += x[i] * (logd[i] - l1p);
        t2 += inv_phi[i] * l1p;
    }
    return {t1, t2};
}

} // namespace nblda::simd::detail
