#include "nblda/dispersion.hpp"

#include "nblda/simd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nblda {

std::vector<double> moments_dispersion(const LabeledDataset& data, const SizeFactors& sf) {
    data.validate(true);
    const std::size_t n = data.matrix.samples();
    const std::size_t G = data.matrix.genes();
    if (n < 2) throw std::invalid_argument("moments_dispersion requires n >= 2");
    if (sf.values.size() != n)
        throw std::invalid_argument("size factor count does not match sample count");

    const auto nk = data.class_counts();
    const std::size_t dof = n - static_cast<std::size_t>(data.k_classes);

    std::vector<double> z(n);
    std::vector<double> class_mean(static_cast<std::size_t>(data.k_classes));
    std::vector<double> out(G, 0.0);
    for (std::size_t g = 0; g < G; ++g) {
        const std::int64_t* row = data.matrix.row(g);
        for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<double>(row[i]) / sf.values[i];
        const double m = simd::sum(z.data(), n) / static_cast<double>(n);
        if (!(m > 0.0) || dof == 0) continue;
        std::fill(class_mean.begin(), class_mean.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            class_mean[static_cast<std::size_t>(data.labels[i] - 1)] += z[i];
        for (int k = 0; k < data.k_classes; ++k)
            class_mean[static_cast<std::size_t>(k)] /= static_cast<double>(nk[static_cast<std::size_t>(k)]);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = z[i] - class_mean[static_cast<std::size_t>(data.labels[i] - 1)];
            ss += dev * dev;
        }
        const double v = ss / static_cast<double>(dof);
        out[g] = std::max(0.0, (v - m) / (m * m));
    }
    return out;
}

double shrinkage_weight(const std::vector<double>& initial, double target) {
    const std::size_t G = initial.size();
    if (G < 3) throw std::invalid_argument("shrinkage_weight requires G >= 3");
    const double mean = simd::sum(initial.data(), G) / static_cast<double>(G);
    const double num = simd::sum_sq_dev(initial.data(), G, mean) / static_cast<double>(G - 1);
    const double den = simd::sum_sq_dev(initial.data(), G, target) / static_cast<double>(G - 2);
    if (den <= 1e-12) return 0.0;
    return std::clamp(num / den, 0.0, 1.0);
}

double target_value(const std::vector<double>& initial) {
    const std::size_t G = initial.size();
    if (G < 3) throw std::invalid_argument("target_value requires G >= 3");
    const auto [lo_it, hi_it] = std::minmax_element(initial.begin(), initial.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi - lo <= 0.0) return lo; // all equal: any point is optimal

    double best_xi = lo;
    double best_obj = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 101; ++j) {
        const double xi = lo + (hi - lo) * static_cast<double>(j) / 100.0;
        const double delta = shrinkage_weight(initial, xi);
        // (1/G) sum (shrunken - initial)^2 = delta^2 * (1/G) sum (xi - initial)^2
        const double msd = simd::sum_sq_dev(initial.data(), G, xi) / static_cast<double>(G);
        const double obj = delta * delta * msd;
        if (obj < best_obj) {
            best_obj = obj;
            best_xi = xi;
        }
    }
    return best_xi;
}

DispersionEstimate shrink_from_initial(std::vector<double> initial) {
    DispersionEstimate est;
    est.target = target_value(initial);
    est.weight = shrinkage_weight(initial, est.target);
    est.shrunken.resize(initial.size());
    for (std::size_t g = 0; g < initial.size(); ++g)
        est.shrunken[g] = est.weight * est.target + (1.0 - est.weight) * initial[g];
    est.initial = std::move(initial);
    return est;
}

DispersionEstimate shrink_dispersions(const LabeledDataset& data, const SizeFactors& sf) {
    return shrink_from_initial(moments_dispersion(data, sf));
}

} // namespace nblda
