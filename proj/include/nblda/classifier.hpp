#pragma once

#include "nblda/count_data.hpp"
#include "nblda/normalization.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nblda {

enum class Method { Nblda, Plda };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Fitted model. Immutable after fit; concurrent scoring against one model is
// safe.
struct NbldaModel {
    std::vector<std::string> gene_ids;
    std::vector<double> lambda; // per-gene training totals
    std::vector<double> d;      // K x G class effects, row-major, all > 0
    std::vector<double> phi;    // per-gene dispersions, >= 0
    std::vector<double> priors; // length K, positive, sums to 1
    SizeFactors size_factors;
    int k_classes = 0;

    std::size_t genes() const { return gene_ids.size(); }
    double d_at(int k, std::size_t g) const {
        return d[static_cast<std::size_t>(k) * genes() + g];
    }

    void validate() const;
};

struct ScoreVector {
    std::vector<double> scores;     // per-class discriminant scores (log scale)
    std::vector<double> posteriors; // softmax of scores, sums to 1
    int argmax = 0;                 // 1-based; ties go to the lowest class
};

struct PredictResult {
    std::vector<int> labels;
    std::vector<ScoreVector> scores;
};

// Log NB pmf with mean mu and dispersion phi (variance mu + mu^2 phi);
// phi = 0 is the Poisson limit.
double nb_log_pmf(std::int64_t x, double mu, double phi);

// Fit with dispersions estimated by the shrinkage estimator.
NbldaModel fit_nblda(const LabeledDataset& train, SfMethod sf_method, double quantile = 0.75);
// Fit with supplied per-gene dispersions.
NbldaModel fit_nblda(const LabeledDataset& train, SfMethod sf_method, double quantile,
                     const std::vector<double>& phi);

ScoreVector nblda_scores(const NbldaModel& model, const std::int64_t* x_star, double s_star);
ScoreVector plda_scores(const NbldaModel& model, const std::int64_t* x_star, double s_star);
ScoreVector nblda_scores(const NbldaModel& model, const std::vector<std::int64_t>& x_star,
                         double s_star);
ScoreVector plda_scores(const NbldaModel& model, const std::vector<std::int64_t>& x_star,
                        double s_star);

// Classify every column of the matrix. Genes are matched to the model by id;
// unknown or missing ids are an error listing the mismatches.
PredictResult predict(const NbldaModel& model, const CountMatrix& matrix, Method method);

// Pick PLDA when the estimated average dispersion is below the threshold,
// NBLDA otherwise (the boundary goes to the NB side).
Method recommend_method(double average_dispersion, double threshold = 0.1);

// Versioned JSON persistence; writes are atomic (temp file + rename).
void save_model(const std::string& path, const NbldaModel& model);
NbldaModel load_model(const std::string& path);

// Write content to path via a temp file in the same directory plus rename.
void atomic_write_file(const std::string& path, const std::string& content);

} // namespace nblda
