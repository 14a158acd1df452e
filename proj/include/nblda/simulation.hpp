#pragma once

#include "nblda/classifier.hpp"
#include "nblda/count_data.hpp"
#include "nblda/rng.hpp"

#include <cstdint>
#include <vector>

namespace nblda {

// Two-class synthetic scenario: lambda_g ~ Exp(0.04), s_i ~ U[0.2, 2.2],
// the first ceil(G * de_proportion) genes differentially expressed with
// log d_kg ~ N(0, sigma^2), counts NB(s_i lambda_g d_kg, phi).
struct SimScenario {
    std::size_t genes = 100;
    std::size_t samples = 8; // train and test each get this many
    int classes = 2;
    double de_proportion = 0.8;
    double sigma = 5.0;
    double phi = 20.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ScenarioData {
    LabeledDataset train;
    LabeledDataset test;
};

struct StudyResult {
    Method method = Method::Nblda;
    double mean_rate = 0.0;
    double std_error = 0.0;
    int replicates = 0; // completed
    int skipped = 0;    // replicates dropped because fitting failed
    std::vector<double> rates; // per completed replicate, replicate order
};

// NB draw with E = mean, Var = mean + mean^2 phi, via a gamma-Poisson
// mixture; phi = 0 draws Poisson(mean).
std::int64_t sample_nb(double mean, double phi, Rng& rng);

// Fresh world per call: all scenario parameters are redrawn from rng.
ScenarioData generate_scenario(const SimScenario& sc, Rng& rng);

// Monte Carlo misclassification study. Replicate r draws its world from
// Rng::derive(sc.seed, r), so results do not depend on thread schedule.
// Thread count comes from the NBLDA_THREADS environment variable.
std::vector<StudyResult> run_study(const SimScenario& sc, int replicates,
                                   const std::vector<Method>& methods,
                                   SfMethod sf_method = SfMethod::TotalCount);

enum class CurveMode { Common, ChiSquared };

struct CurvePoint {
    double x = 0.0; // phi (common mode) or chi-squared df (random mode)
    double nblda = 0.0;
    double plda = 0.0;
};

// Score-versus-dispersion curve over G identical genes: the class term of the
// NB score and its Poisson counterpart, without the prior. Common mode reads
// the grid as phi values; chi-squared mode reads it as degrees of freedom and
// draws per-gene phi once per grid point from Rng::derive(seed, point).
std::vector<CurvePoint> score_curve(std::int64_t x_star, double d, double s_star, double lambda,
                                    std::size_t genes, const std::vector<double>& grid,
                                    CurveMode mode, std::uint64_t seed = 0);

// Worker count for replicate-parallel loops: NBLDA_THREADS if set and valid,
// otherwise the hardware concurrency.
unsigned thread_count();

} // namespace nblda
