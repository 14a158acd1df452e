#include "nblda/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using nblda::Rng;

TEST_SUITE("rng") {

TEST_CASE("splitmix64 matches the reference outputs") {
    std::uint64_t state = 0;
    CHECK(nblda::splitmix64(state) == 16294208416658607535ULL);
    CHECK(nblda::splitmix64(state) == 7960286522194355700ULL);
    CHECK(nblda::splitmix64(state) == 487617019471545679ULL);
}

TEST_CASE("same seed replays the same sequence") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derived streams are deterministic and distinct") {
    Rng a = Rng::derive(7, 0);
    Rng b = Rng::derive(7, 0);
    Rng c = Rng::derive(7, 1);
    bool all_equal = true;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) all_equal = false;
    }
    CHECK_FALSE(all_equal);
}

TEST_CASE("uniform stays in [0,1) with mean near one half") {
    Rng rng(99);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::fabs(sum / n - 0.5) < 0.005);
}

TEST_CASE("uniform over an interval respects the bounds") {
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform(0.2, 2.2);
        REQUIRE(u >= 0.2);
        REQUIRE(u < 2.2);
    }
}

TEST_CASE("uniform_int covers every residue roughly evenly") {
    Rng rng(321);
    std::vector<int> hits(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++hits[rng.uniform_int(7)];
    for (const int h : hits) {
        CHECK(h > 9000);
        CHECK(h < 11000);
    }
    CHECK_THROWS(rng.uniform_int(0));
}

TEST_CASE("normal has zero mean and unit variance") {
    Rng rng(2024);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::fabs(mean) < 0.01);
    CHECK(std::fabs(var - 1.0) < 0.02);
}

TEST_CASE("exponential mean matches 1/rate") {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.exponential(0.04);
    CHECK(std::fabs(sum / n - 25.0) < 0.5);
    CHECK_THROWS(rng.exponential(0.0));
}

TEST_CASE("gamma moments for both shape branches") {
    Rng rng(77);
    const int n = 200000;
    // shape >= 1: Marsaglia-Tsang directly
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gamma(3.0, 2.0);
        sum += g;
        sum2 += g * g;
    }
    double mean = sum / n;
    CHECK(std::fabs(mean - 6.0) < 0.1);
    CHECK(std::fabs((sum2 / n - mean * mean) - 12.0) < 0.6);
    // shape < 1: boosted branch (the NB mixture uses shape 1/phi = 0.05)
    sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gamma(0.05, 10.0);
        REQUIRE(g >= 0.0);
        sum += g;
    }
    CHECK(std::fabs(sum / n - 0.5) < 0.05);
    CHECK_THROWS(rng.gamma(0.0, 1.0));
}

TEST_CASE("poisson moments on both algorithm branches") {
    Rng rng(404);
    const int n = 200000;
    // mean < 10: Knuth multiplication
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = static_cast<double>(rng.poisson(3.0));
        REQUIRE(k >= 0.0);
        sum += k;
        sum2 += k * k;
    }
    double mean = sum / n;
    CHECK(std::fabs(mean - 3.0) < 0.03);
    CHECK(std::fabs((sum2 / n - mean * mean) - 3.0) < 0.1);
    // mean >= 10: transformed rejection
    sum = 0.0;
    sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double k = static_cast<double>(rng.poisson(50.0));
        sum += k;
        sum2 += k * k;
    }
    mean = sum / n;
    CHECK(std::fabs(mean - 50.0) < 0.2);
    CHECK(std::fabs((sum2 / n - mean * mean) - 50.0) < 1.5);
    // zero mean is a hard zero (gamma mixtures can underflow to it)
    CHECK(rng.poisson(0.0) == 0);
}

} // TEST_SUITE
