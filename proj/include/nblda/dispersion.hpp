#pragma once

#include "nblda/count_data.hpp"
#include "nblda/normalization.hpp"

#include <vector>

namespace nblda {

struct DispersionEstimate {
    std::vector<double> initial;  // method-of-moments phi-tilde, >= 0
    std::vector<double> shrunken; // delta*xi + (1-delta)*initial
    double target = 0.0;          // xi
    double weight = 0.0;          // delta in [0,1]
};

// Method-of-moments initial estimates on normalized counts z = X/s:
// phi-tilde = max(0, (v - m) / m^2) with pooled within-class variance v
// (denominator n - K) and the pooled mean m; m = 0 genes get 0.
std::vector<double> moments_dispersion(const LabeledDataset& data, const SizeFactors& sf);

// Shrinkage weight: variance of the initial estimates over the mean squared
// distance to the target, clamped to [0,1].
double shrinkage_weight(const std::vector<double>& initial, double target);

// Grid search for the target: 101 evenly spaced candidates on
// [min initial, max initial], minimizing the average squared difference
// between shrunken and initial values; ties to the smaller candidate.
double target_value(const std::vector<double>& initial);

DispersionEstimate shrink_from_initial(std::vector<double> initial);
DispersionEstimate shrink_dispersions(const LabeledDataset& data, const SizeFactors& sf);

} // namespace nblda
