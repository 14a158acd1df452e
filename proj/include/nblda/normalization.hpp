#pragma once

#include "nblda/count_data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nblda {

enum class SfMethod { TotalCount, MedianRatio, UpperQuartile };

std::string to_string(SfMethod m);
SfMethod sf_method_from_string(const std::string& s);

// Training size factors plus the reference statistics needed to score a test
// sample without refitting.
struct SizeFactors {
    SfMethod method = SfMethod::TotalCount;
    std::vector<double> values;

    double grand_total = 0.0;            // total-count
    std::vector<std::size_t> ref_genes;  // median-ratio: genes positive in every sample
    std::vector<double> ref_geomean;     // median-ratio: geometric means for ref_genes
    double quartile_sum = 0.0;           // upper-quartile
    double quantile = 0.75;              // upper-quartile
};

SizeFactors size_factors_total_count(const CountMatrix& m);
SizeFactors size_factors_median_ratio(const CountMatrix& m);
SizeFactors size_factors_upper_quartile(const CountMatrix& m, double quantile = 0.75);
SizeFactors compute_size_factors(const CountMatrix& m, SfMethod method, double quantile = 0.75);

// Size factor for one new sample, from stored training reference statistics.
double size_factor_for_test(const SizeFactors& sf, const std::int64_t* x_star, std::size_t g_count);

// Midpoint-interpolation quantile (exposed for direct testing).
double midpoint_quantile(std::vector<double> values, double q);

} // namespace nblda
