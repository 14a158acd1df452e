#include "nblda/simd.hpp"

#include "nblda/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

namespace simd = nblda::simd;

namespace {

std::vector<double> random_vector(nblda::Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

bool close(double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-10) {
    return std::fabs(a - b) <= abs_tol + rel_tol * std::max(std::fabs(a), std::fabs(b));
}

struct IsaGuard {
    simd::Isa saved = simd::active_isa();
    ~IsaGuard() { simd::force_isa(saved); }
};

} // namespace

TEST_SUITE("simd") {

TEST_CASE("kernels match naive loops on awkward lengths") {
    nblda::Rng rng(1);
    for (const std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{3}, std::size_t{4},
                                std::size_t{7}, std::size_t{8}, std::size_t{31}, std::size_t{1000}}) {
        const auto a = random_vector(rng, n, -5.0, 5.0);
        const auto b = random_vector(rng, n, -2.0, 2.0);
        double sum = 0.0, dot = 0.0, ssd = 0.0;
        const double mean = 0.37;
        for (std::size_t i = 0; i < n; ++i) {
            sum += a[i];
            dot += a[i] * b[i];
            ssd += (a[i] - mean) * (a[i] - mean);
        }
        CHECK(close(simd::sum(a.data(), n), sum));
        CHECK(close(simd::dot(a.data(), b.data(), n), dot));
        CHECK(close(simd::sum_sq_dev(a.data(), n, mean), ssd));
    }
}

TEST_CASE("nblda_terms matches a direct evaluation") {
    nblda::Rng rng(2);
    for (const std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{16}, std::size_t{257}}) {
        const auto x = random_vector(rng, n, 0.0, 40.0);
        const auto logd = random_vector(rng, n, -2.0, 2.0);
        const auto u = random_vector(rng, n, 0.0, 1000.0);
        auto inv_phi = random_vector(rng, n, 0.05, 20.0);
        double t1 = 0.0, t2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double l = std::log1p(u[i]);
            t1 += x[i] * (logd[i] - l);
            t2 += inv_phi[i] * l;
        }
        const simd::ScoreTerms t = simd::nblda_terms(x.data(), logd.data(), u.data(), inv_phi.data(), n);
        CHECK(close(t.t1, t1, 1e-9, 1e-10));
        CHECK(close(t.t2, t2, 1e-9, 1e-10));
    }
}

TEST_CASE("forced scalar and avx2 kernels agree") {
    if (!simd::avx2_supported()) return;
    IsaGuard guard;
    nblda::Rng rng(3);
    const std::size_t n = 513;
    const auto a = random_vector(rng, n, -10.0, 10.0);
    const auto b = random_vector(rng, n, -3.0, 3.0);
    const auto x = random_vector(rng, n, 0.0, 50.0);
    const auto logd = random_vector(rng, n, -1.5, 1.5);
    const auto u = random_vector(rng, n, 0.0, 900.0);
    const auto inv_phi = random_vector(rng, n, 0.03, 30.0);

    simd::force_isa(simd::Isa::Scalar);
    const double sum_s = simd::sum(a.data(), n);
    const double dot_s = simd::dot(a.data(), b.data(), n);
    const double ssd_s = simd::sum_sq_dev(a.data(), n, 1.25);
    const simd::ScoreTerms t_s = simd::nblda_terms(x.data(), logd.data(), u.data(), inv_phi.data(), n);

    simd::force_isa(simd::Isa::Avx2);
    CHECK(simd::active_isa() == simd::Isa::Avx2);
    CHECK(close(simd::sum(a.data(), n), sum_s));
    CHECK(close(simd::dot(a.data(), b.data(), n), dot_s));
    CHECK(close(simd::sum_sq_dev(a.data(), n, 1.25), ssd_s));
    const simd::ScoreTerms t_v = simd::nblda_terms(x.data(), logd.data(), u.data(), inv_phi.data(), n);
    CHECK(close(t_v.t1, t_s.t1, 1e-9, 1e-11));
    CHECK(close(t_v.t2, t_s.t2, 1e-9, 1e-11));
}

TEST_CASE("vector log1p stays accurate across magnitudes") {
    if (!simd::avx2_supported()) return;
    IsaGuard guard;
    // one-element nblda_terms pins log1p itself: x = 0, inv_phi = 1 gives t2 = log1p(u)
    const double zero = 0.0, one = 1.0, logd = 0.0;
    for (const double u : {1e-12, 1e-8, 1e-4, 0.1, 0.5, 1.0, 2.0, 10.0, 1e3, 1e6}) {
        simd::force_isa(simd::Isa::Avx2);
        const simd::ScoreTerms t = simd::nblda_terms(&zero, &logd, &u, &one, 1);
        const double expect = std::log1p(u);
        CHECK(std::fabs(t.t2 - expect) <= 1e-15 + 1e-13 * std::fabs(expect));
    }
}

TEST_CASE("empty input gives zero terms") {
    const simd::ScoreTerms t = simd::nblda_terms(nullptr, nullptr, nullptr, nullptr, 0);
    CHECK(t.t1 == 0.0);
    CHECK(t.t2 == 0.0);
    CHECK(simd::sum(nullptr, 0) == 0.0);
}

} // TEST_SUITE
