#include "nblda/normalization.hpp"

#include "nblda/simd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nblda {

std::string to_string(SfMethod m) {
    switch (m) {
        case SfMethod::TotalCount: return "total";
        case SfMethod::MedianRatio: return "median-ratio";
        case SfMethod::UpperQuartile: return "upper-quartile";
    }
    throw std::logic_error("unknown size-factor method");
}

SfMethod sf_method_from_string(const std::string& s) {
    if (s == "total" || s == "total-count") return SfMethod::TotalCount;
    if (s == "median-ratio") return SfMethod::MedianRatio;
    if (s == "upper-quartile") return SfMethod::UpperQuartile;
    throw std::invalid_argument("unknown size-factor method: " + s);
}

double midpoint_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of empty set");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile must be in (0,1)");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const double h = static_cast<double>(n) * q;
    const double rounded = std::round(h);
    if (std::fabs(h - rounded) < 1e-9) {
        const auto k = static_cast<std::size_t>(rounded);
        if (k >= n) return values[n - 1];
        return 0.5 * (values[k - 1] + values[k]);
    }
    const auto k = static_cast<std::size_t>(std::ceil(h));
    return values[std::min(k, n) - 1];
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

SizeFactors size_factors_total_count(const CountMatrix& m) {
    m.validate();
    SizeFactors sf;
    sf.method = SfMethod::TotalCount;
    const std::size_t n = m.samples();
    std::vector<double> col(n, 0.0);
    for (std::size_t g = 0; g < m.genes(); ++g) {
        const std::int64_t* row = m.row(g);
        for (std::size_t i = 0; i < n; ++i) col[i] += static_cast<double>(row[i]);
    }
    const double grand = simd::sum(col.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(col[i] > 0.0))
            throw std::invalid_argument("total-count size factors: sample '" + m.sample_ids[i] +
                                        "' has zero total count");
    }
    sf.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) sf.values[i] = col[i] / grand;
    sf.grand_total = grand;
    return sf;
}

SizeFactors size_factors_median_ratio(const CountMatrix& m) {
    m.validate();
    SizeFactors sf;
    sf.method = SfMethod::MedianRatio;
    const std::size_t n = m.samples();
    for (std::size_t g = 0; g < m.genes(); ++g) {
        const std::int64_t* row = m.row(g);
        const bool all_positive = std::all_of(row, row + n, [](std::int64_t v) { return v > 0; });
        if (!all_positive) continue;
        double log_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) log_sum += std::log(static_cast<double>(row[i]));
        sf.ref_genes.push_back(g);
        sf.ref_geomean.push_back(std::exp(log_sum / static_cast<double>(n)));
    }
    if (sf.ref_genes.empty())
        throw std::invalid_argument("median-ratio size factors: no gene has positive counts in every sample");
    sf.values.resize(n);
    std::vector<double> ratios(sf.ref_genes.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < sf.ref_genes.size(); ++r)
            ratios[r] = static_cast<double>(m.at(sf.ref_genes[r], i)) / sf.ref_geomean[r];
        sf.values[i] = median_of(ratios);
    }
    return sf;
}

SizeFactors size_factors_upper_quartile(const CountMatrix& m, double quantile) {
    m.validate();
    SizeFactors sf;
    sf.method = SfMethod::UpperQuartile;
    sf.quantile = quantile;
    const std::size_t n = m.samples();
    std::vector<double> q(n);
    std::vector<double> col(m.genes());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t g = 0; g < m.genes(); ++g) col[g] = static_cast<double>(m.at(g, i));
        q[i] = midpoint_quantile(col, quantile);
        if (!(q[i] > 0.0))
            throw std::invalid_argument("upper-quartile size factors: sample '" + m.sample_ids[i] +
                                        "' has a zero quantile");
    }
    sf.quartile_sum = simd::sum(q.data(), n);
    sf.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) sf.values[i] = q[i] / sf.quartile_sum;
    return sf;
}

SizeFactors compute_size_factors(const CountMatrix& m, SfMethod method, double quantile) {
    switch (method) {
        case SfMethod::TotalCount: return size_factors_total_count(m);
        case SfMethod::MedianRatio: return size_factors_median_ratio(m);
        case SfMethod::UpperQuartile: return size_factors_upper_quartile(m, quantile);
    }
    throw std::logic_error("unknown size-factor method");
}

double size_factor_for_test(const SizeFactors& sf, const std::int64_t* x_star, std::size_t g_count) {
    switch (sf.method) {
        case SfMethod::TotalCount: {
            double total = 0.0;
            for (std::size_t g = 0; g < g_count; ++g) total += static_cast<double>(x_star[g]);
            const double s = total / sf.grand_total;
            if (!(s > 0.0))
                throw std::invalid_argument("test size factor is not positive (all-zero test sample)");
            return s;
        }
        case SfMethod::MedianRatio: {
            std::vector<double> ratios(sf.ref_genes.size());
            for (std::size_t r = 0; r < sf.ref_genes.size(); ++r) {
                const std::size_t g = sf.ref_genes[r];
                if (g >= g_count) throw std::invalid_argument("test vector shorter than training gene set");
                ratios[r] = static_cast<double>(x_star[g]) / sf.ref_geomean[r];
            }
            const double s = median_of(ratios);
            if (!(s > 0.0))
                throw std::invalid_argument("test size factor is not positive under median-ratio");
            return s;
        }
        case SfMethod::UpperQuartile: {
            std::vector<double> col(g_count);
            for (std::size_t g = 0; g < g_count; ++g) col[g] = static_cast<double>(x_star[g]);
            const double q = midpoint_quantile(col, sf.quantile);
            if (!(q > 0.0))
                throw std::invalid_argument("test size factor is not positive under upper-quartile");
            return q / sf.quartile_sum;
        }
    }
    throw std::logic_error("unknown size-factor method");
}

} // namespace nblda
