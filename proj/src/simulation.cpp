#include "nblda/simulation.hpp"

#include "nblda/normalization.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace nblda {

void SimScenario::validate() const {
    if (genes < 1 || samples < 1) throw std::invalid_argument("scenario needs genes >= 1 and samples >= 1");
    if (classes != 2) throw std::invalid_argument("scenario supports exactly 2 classes");
    if (!(de_proportion > 0.0 && de_proportion <= 1.0))
        throw std::invalid_argument("de_proportion must lie in (0, 1]");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(phi >= 0.0)) throw std::invalid_argument("phi must be nonnegative");
}

std::int64_t sample_nb(double mean, double phi, Rng& rng) {
    if (!(mean > 0.0)) throw std::invalid_argument("sample_nb: mean must be positive");
    if (phi == 0.0) return rng.poisson(mean);
    const double rate = rng.gamma(1.0 / phi, mean * phi);
    return rng.poisson(rate);
}

ScenarioData generate_scenario(const SimScenario& sc, Rng& rng) {
    sc.validate();
    const std::size_t G = sc.genes;
    const std::size_t n = sc.samples;

    std::vector<double> lambda(G);
    for (std::size_t g = 0; g < G; ++g)
        lambda[g] = std::max(rng.exponential(0.04), 1e-6);

    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = rng.uniform(0.2, 2.2);

    const std::size_t de_count =
        std::min<std::size_t>(G, static_cast<std::size_t>(std::ceil(static_cast<double>(G) * sc.de_proportion)));
    std::vector<double> d(2 * G, 1.0);
    for (std::size_t g = 0; g < de_count; ++g)
        for (std::size_t k = 0; k < 2; ++k)
            d[k * G + g] = std::exp(sc.sigma * rng.normal());

    const std::size_t n1 = n - n / 2; // odd n puts the extra sample in class 1
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < n1 ? 1 : 2;

    auto draw = [&](const char* prefix) {
        LabeledDataset ds;
        ds.matrix.gene_ids.resize(G);
        for (std::size_t g = 0; g < G; ++g) ds.matrix.gene_ids[g] = "g" + std::to_string(g + 1);
        ds.matrix.sample_ids.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            ds.matrix.sample_ids[i] = prefix + std::to_string(i + 1);
        ds.matrix.counts.resize(G * n);
        for (std::size_t g = 0; g < G; ++g)
            for (std::size_t i = 0; i < n; ++i) {
                const double mean = s[i] * lambda[g] * d[static_cast<std::size_t>(labels[i] - 1) * G + g];
                ds.matrix.at(g, i) = sample_nb(mean, sc.phi, rng);
            }
        ds.labels = labels;
        ds.k_classes = 2;
        return ds;
    };

    ScenarioData out;
    out.train = draw("train_");
    out.test = draw("test_");
    return out;
}

unsigned thread_count() {
    if (const char* env = std::getenv("NBLDA_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw >= 1 ? hw : 1;
}

std::vector<StudyResult> run_study(const SimScenario& sc, int replicates,
                                   const std::vector<Method>& methods, SfMethod sf_method) {
    sc.validate();
    if (replicates < 1) throw std::invalid_argument("run_study needs at least one replicate");
    if (methods.empty()) throw std::invalid_argument("run_study needs at least one method");

    const std::size_t M = methods.size();
    const std::size_t R = static_cast<std::size_t>(replicates);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> rates(M, std::vector<double>(R, nan));
    std::vector<char> skipped(R, 0);

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= R) break;
            Rng rng = Rng::derive(sc.seed, r);
            try {
                const ScenarioData data = generate_scenario(sc, rng);
                const NbldaModel model = fit_nblda(data.train, sf_method);
                for (std::size_t m = 0; m < M; ++m) {
                    const PredictResult pred = predict(model, data.test.matrix, methods[m]);
                    std::size_t wrong = 0;
                    for (std::size_t i = 0; i < pred.labels.size(); ++i)
                        if (pred.labels[i] != data.test.labels[i]) ++wrong;
                    rates[m][r] = static_cast<double>(wrong) / static_cast<double>(pred.labels.size());
                }
            } catch (const std::exception&) {
                skipped[r] = 1;
                for (std::size_t m = 0; m < M; ++m) rates[m][r] = nan;
            }
        }
    };

    const unsigned workers = std::min<unsigned>(thread_count(), static_cast<unsigned>(R));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    int skip_count = 0;
    for (char f : skipped) skip_count += f;

    std::vector<StudyResult> out(M);
    for (std::size_t m = 0; m < M; ++m) {
        StudyResult& res = out[m];
        res.method = methods[m];
        res.skipped = skip_count;
        for (std::size_t r = 0; r < R; ++r)
            if (!skipped[r]) res.rates.push_back(rates[m][r]);
        res.replicates = static_cast<int>(res.rates.size());
        if (res.replicates == 0) {
            res.mean_rate = nan;
            res.std_error = nan;
            continue;
        }
        double sum = 0.0;
        for (double v : res.rates) sum += v;
        res.mean_rate = sum / static_cast<double>(res.replicates);
        if (res.replicates >= 2) {
            double ss = 0.0;
            for (double v : res.rates) ss += (v - res.mean_rate) * (v - res.mean_rate);
            const double var = ss / static_cast<double>(res.replicates - 1);
            res.std_error = std::sqrt(var / static_cast<double>(res.replicates));
        }
    }
    return out;
}

namespace {

// Class term of the NB score for one gene, prior omitted; phi = 0 is the
// Poisson limit shared with the PLDA score.
double gene_term(double x, double d, double s_lambda, double phi) {
    if (phi <= 0.0) return x * std::log(d) - s_lambda * d;
    const double l = std::log1p(s_lambda * d * phi);
    return x * (std::log(d) - l) - l / phi;
}

} // namespace

std::vector<CurvePoint> score_curve(std::int64_t x_star, double d, double s_star, double lambda,
                                    std::size_t genes, const std::vector<double>& grid,
                                    CurveMode mode, std::uint64_t seed) {
    if (grid.empty()) throw std::invalid_argument("score_curve needs a nonempty grid");
    if (x_star < 0) throw std::invalid_argument("score_curve: x_star must be nonnegative");
    if (!(d > 0.0) || !(s_star > 0.0) || !(lambda > 0.0) || genes < 1)
        throw std::invalid_argument("score_curve: d, s_star, lambda must be positive and genes >= 1");
    if (mode == CurveMode::ChiSquared)
        for (double r : grid)
            if (!(r > 0.0))
                throw std::invalid_argument("score_curve: chi-squared degrees of freedom must be positive");

    const double x = static_cast<double>(x_star);
    const double s_lambda = s_star * lambda;
    const double gd = static_cast<double>(genes);
    const double plda = gd * (x * std::log(d) - s_lambda * d);

    std::vector<CurvePoint> out(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        out[j].x = grid[j];
        out[j].plda = plda;
        if (mode == CurveMode::Common) {
            if (!(grid[j] >= 0.0))
                throw std::invalid_argument("score_curve: phi grid values must be nonnegative");
            out[j].nblda = gd * gene_term(x, d, s_lambda, grid[j]);
        } else {
            Rng rng = Rng::derive(seed, j);
            double total = 0.0;
            for (std::size_t g = 0; g < genes; ++g)
                total += gene_term(x, d, s_lambda, rng.gamma(grid[j] / 2.0, 2.0));
            out[j].nblda = total;
        }
    }
    return out;
}

} // namespace nblda
