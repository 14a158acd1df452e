#include "nblda/dispersion.hpp"

#include "nblda/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace nblda;

namespace {

LabeledDataset one_gene(std::vector<std::int64_t> counts, std::vector<int> labels, int k) {
    LabeledDataset d;
    d.matrix.gene_ids = {"g1"};
    for (std::size_t i = 0; i < counts.size(); ++i)
        d.matrix.sample_ids.push_back("s" + std::to_string(i + 1));
    d.matrix.counts = std::move(counts);
    d.labels = std::move(labels);
    d.k_classes = k;
    return d;
}

SizeFactors unit_factors(std::size_t n) {
    SizeFactors sf;
    sf.method = SfMethod::TotalCount;
    sf.values.assign(n, 1.0);
    return sf;
}

} // namespace

TEST_SUITE("dispersion") {

TEST_CASE("moments estimate on a worked example") {
    // z = (0, 4, 10, 14), classes (1,1,2,2): m = 7, pooled within variance
    // v = 16 / (4 - 2) = 8, so (v - m) / m^2 = 1/49
    const LabeledDataset d = one_gene({0, 4, 10, 14}, {1, 1, 2, 2}, 2);
    const auto phi = moments_dispersion(d, unit_factors(4));
    REQUIRE(phi.size() == 1);
    CHECK(phi[0] == doctest::Approx(1.0 / 49.0).epsilon(1e-14));
}

TEST_CASE("moments estimate divides by the size factors") {
    // counts (2, 4, 6, 40) over s = (0.5, 1, 1, 2) give z = (4, 4, 6, 20):
    // m = 8.5, v = 98/2 = 49, estimate = 40.5 / 72.25
    const LabeledDataset d = one_gene({2, 4, 6, 40}, {1, 1, 2, 2}, 2);
    SizeFactors sf = unit_factors(4);
    sf.values = {0.5, 1.0, 1.0, 2.0};
    const auto phi = moments_dispersion(d, sf);
    CHECK(phi[0] == doctest::Approx(162.0 / 289.0).epsilon(1e-14));
}

TEST_CASE("underdispersed and empty genes clamp to zero") {
    const LabeledDataset d = one_gene({3, 3, 3, 3}, {1, 1, 2, 2}, 2);
    CHECK(moments_dispersion(d, unit_factors(4))[0] == 0.0);
    const LabeledDataset zeros = one_gene({0, 0, 0, 0}, {1, 1, 2, 2}, 2);
    CHECK(moments_dispersion(zeros, unit_factors(4))[0] == 0.0);
    const LabeledDataset tiny = one_gene({5}, {1}, 1);
    CHECK_THROWS_AS(moments_dispersion(tiny, unit_factors(1)), std::invalid_argument);
}

TEST_CASE("shrinkage weight on the worked vector") {
    const std::vector<double> initial{1.0, 2.0, 3.0, 4.0};
    // variance 5/3 over mean squared distance to zero 30/2
    CHECK(shrinkage_weight(initial, 0.0) == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
    CHECK(shrinkage_weight(initial, 2.5) <= 1.0);
    CHECK(shrinkage_weight({2.0, 2.0, 2.0}, 2.0) == 0.0); // degenerate denominator
    CHECK_THROWS_AS(shrinkage_weight({1.0, 2.0}, 0.0), std::invalid_argument);
}

TEST_CASE("target search breaks ties toward the smaller candidate") {
    // symmetric around the mean: both endpoints give the same objective
    CHECK(target_value({1.0, 2.0, 3.0, 4.0}) == 1.0);
    // skewed: the far endpoint wins
    CHECK(target_value({0.0, 1.0, 2.0, 9.0}) == 9.0);
    // all equal: the common value is already optimal
    CHECK(target_value({3.0, 3.0, 3.0}) == 3.0);
    CHECK_THROWS_AS(target_value({1.0}), std::invalid_argument);
}

TEST_CASE("shrink_from_initial composes weight, target, and identity") {
    const DispersionEstimate est = shrink_from_initial({1.0, 2.0, 3.0, 4.0});
    CHECK(est.target == 1.0);
    CHECK(est.weight == doctest::Approx(5.0 / 21.0).epsilon(1e-14));
    const std::vector<double> expect{1.0, 37.0 / 21.0, 53.0 / 21.0, 69.0 / 21.0};
    for (std::size_t g = 0; g < 4; ++g)
        CHECK(est.shrunken[g] == doctest::Approx(expect[g]).epsilon(1e-13));
}

TEST_CASE("shrunken values satisfy the identity and stay between the ends") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t G = 3 + rng.uniform_int(40);
        std::vector<double> initial(G);
        for (auto& v : initial) v = rng.uniform(0.0, 30.0);
        const DispersionEstimate est = shrink_from_initial(initial);
        REQUIRE(est.weight >= 0.0);
        REQUIRE(est.weight <= 1.0);
        for (std::size_t g = 0; g < G; ++g) {
            const double recomposed = est.weight * est.target + (1.0 - est.weight) * est.initial[g];
            CHECK(est.shrunken[g] == recomposed);
            const double lo = std::min(est.initial[g], est.target) - 1e-12;
            const double hi = std::max(est.initial[g], est.target) + 1e-12;
            CHECK(est.shrunken[g] >= lo);
            CHECK(est.shrunken[g] <= hi);
        }
    }
}

TEST_CASE("shrink_dispersions runs the full pipeline") {
    LabeledDataset d;
    d.matrix.gene_ids = {"g1", "g2", "g3"};
    d.matrix.sample_ids = {"s1", "s2", "s3", "s4"};
    d.matrix.counts = {0, 4, 10, 14, 2, 2, 2, 2, 9, 1, 3, 7};
    d.labels = {1, 1, 2, 2};
    d.k_classes = 2;
    const DispersionEstimate est = shrink_dispersions(d, unit_factors(4));
    REQUIRE(est.initial.size() == 3);
    REQUIRE(est.shrunken.size() == 3);
    for (std::size_t g = 0; g < 3; ++g) {
        CHECK(est.initial[g] >= 0.0);
        CHECK(est.shrunken[g] ==
              est.weight * est.target + (1.0 - est.weight) * est.initial[g]);
    }
}

} // TEST_SUITE
