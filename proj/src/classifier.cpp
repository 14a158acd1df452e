#include "nblda/classifier.hpp"

#include "nblda/dispersion.hpp"
#include "nblda/simd.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace nblda {

std::string to_string(Method m) {
    return m == Method::Nblda ? "nblda" : "plda";
}

Method method_from_string(const std::string& s) {
    if (s == "nblda") return Method::Nblda;
    if (s == "plda") return Method::Plda;
    throw std::invalid_argument("unknown method '" + s + "' (expected nblda or plda)");
}

void NbldaModel::validate() const {
    const std::size_t G = genes();
    if (k_classes < 1) throw std::invalid_argument("model has no classes");
    const std::size_t K = static_cast<std::size_t>(k_classes);
    if (lambda.size() != G || phi.size() != G || d.size() != K * G || priors.size() != K)
        throw std::invalid_argument("model field lengths are inconsistent");
    double prior_sum = 0.0;
    for (double p : priors) {
        if (!(p > 0.0)) throw std::invalid_argument("model priors must be positive");
        prior_sum += p;
    }
    if (std::abs(prior_sum - 1.0) > 1e-12)
        throw std::invalid_argument("model priors must sum to 1");
    for (double v : d)
        if (!(v > 0.0)) throw std::invalid_argument("model class effects must be positive");
    for (double p : phi)
        if (!(p >= 0.0)) throw std::invalid_argument("model dispersions must be nonnegative");
}

double nb_log_pmf(std::int64_t x, double mu, double phi) {
    if (x < 0) throw std::invalid_argument("nb_log_pmf: x must be nonnegative");
    if (!(mu > 0.0)) throw std::invalid_argument("nb_log_pmf: mu must be positive");
    if (!(phi >= 0.0)) throw std::invalid_argument("nb_log_pmf: phi must be nonnegative");
    const double xd = static_cast<double>(x);
    if (phi == 0.0) return xd * std::log(mu) - mu - std::lgamma(xd + 1.0);
    const double inv = 1.0 / phi;
    const double t = mu * phi;
    return std::lgamma(xd + inv) - std::lgamma(xd + 1.0) - std::lgamma(inv) +
           xd * (std::log(t) - std::log1p(t)) - inv * std::log1p(t);
}

namespace {

ScoreVector finish_scores(std::vector<double> scores) {
    ScoreVector sv;
    const std::size_t K = scores.size();
    double best = scores[0];
    int arg = 1;
    for (std::size_t k = 1; k < K; ++k) {
        if (scores[k] > best) {
            best = scores[k];
            arg = static_cast<int>(k) + 1;
        }
    }
    sv.posteriors.resize(K);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        sv.posteriors[k] = std::exp(scores[k] - best);
        total += sv.posteriors[k];
    }
    for (double& p : sv.posteriors) p /= total;
    sv.scores = std::move(scores);
    sv.argmax = arg;
    return sv;
}

NbldaModel fit_core(const LabeledDataset& train, SfMethod sf_method, double quantile,
                    const std::vector<double>* supplied_phi) {
    train.validate(true);
    NbldaModel m;
    m.size_factors = compute_size_factors(train.matrix, sf_method, quantile);
    const std::size_t G = train.matrix.genes();
    const std::size_t n = train.matrix.samples();
    const std::size_t K = static_cast<std::size_t>(train.k_classes);
    m.gene_ids = train.matrix.gene_ids;
    m.k_classes = train.k_classes;

    std::vector<double> s_class(K, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        s_class[static_cast<std::size_t>(train.labels[i] - 1)] += m.size_factors.values[i];

    m.lambda.resize(G);
    m.d.resize(K * G);
    std::vector<double> class_sum(K);
    for (std::size_t g = 0; g < G; ++g) {
        const std::int64_t* row = train.matrix.row(g);
        std::fill(class_sum.begin(), class_sum.end(), 0.0);
        double lam = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = static_cast<double>(row[i]);
            lam += v;
            class_sum[static_cast<std::size_t>(train.labels[i] - 1)] += v;
        }
        m.lambda[g] = lam;
        for (std::size_t k = 0; k < K; ++k)
            m.d[k * G + g] = (class_sum[k] + 1.0) / (s_class[k] * lam + 1.0);
    }

    const auto nk = train.class_counts();
    m.priors.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        m.priors[k] = static_cast<double>(nk[k]) / static_cast<double>(n);

    if (supplied_phi) {
        if (supplied_phi->size() != G)
            throw std::invalid_argument("supplied dispersion vector length does not match gene count");
        for (double p : *supplied_phi)
            if (!(p >= 0.0)) throw std::invalid_argument("supplied dispersions must be nonnegative");
        m.phi = *supplied_phi;
    } else {
        m.phi = shrink_dispersions(train, m.size_factors).shrunken;
    }
    m.validate();
    return m;
}

} // namespace

NbldaModel fit_nblda(const LabeledDataset& train, SfMethod sf_method, double quantile) {
    return fit_core(train, sf_method, quantile, nullptr);
}

NbldaModel fit_nblda(const LabeledDataset& train, SfMethod sf_method, double quantile,
                     const std::vector<double>& phi) {
    return fit_core(train, sf_method, quantile, &phi);
}

ScoreVector nblda_scores(const NbldaModel& model, const std::int64_t* x_star, double s_star) {
    if (!(s_star > 0.0)) throw std::invalid_argument("nblda_scores: s_star must be positive");
    const std::size_t G = model.genes();
    const std::size_t K = static_cast<std::size_t>(model.k_classes);

    std::vector<std::size_t> pos, zero;
    pos.reserve(G);
    for (std::size_t g = 0; g < G; ++g)
        (model.phi[g] > 0.0 ? pos : zero).push_back(g);

    std::vector<double> xp(pos.size()), inv_phi(pos.size());
    for (std::size_t j = 0; j < pos.size(); ++j) {
        xp[j] = static_cast<double>(x_star[pos[j]]);
        inv_phi[j] = 1.0 / model.phi[pos[j]];
    }
    std::vector<double> xz(zero.size());
    for (std::size_t j = 0; j < zero.size(); ++j)
        xz[j] = static_cast<double>(x_star[zero[j]]);

    std::vector<double> logd_p(pos.size()), u_p(pos.size());
    std::vector<double> logd_z(zero.size()), ld_z(zero.size());
    std::vector<double> scores(K);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t j = 0; j < pos.size(); ++j) {
            const std::size_t g = pos[j];
            const double dk = model.d[k * G + g];
            logd_p[j] = std::log(dk);
            u_p[j] = s_star * model.lambda[g] * dk * model.phi[g];
        }
        const simd::ScoreTerms t =
            simd::nblda_terms(xp.data(), logd_p.data(), u_p.data(), inv_phi.data(), pos.size());
        for (std::size_t j = 0; j < zero.size(); ++j) {
            const std::size_t g = zero[j];
            const double dk = model.d[k * G + g];
            logd_z[j] = std::log(dk);
            ld_z[j] = model.lambda[g] * dk;
        }
        const double limit_part = simd::dot(xz.data(), logd_z.data(), zero.size()) -
                                  s_star * simd::sum(ld_z.data(), zero.size());
        scores[k] = t.t1 - t.t2 + limit_part + std::log(model.priors[k]);
    }
    return finish_scores(std::move(scores));
}

ScoreVector plda_scores(const NbldaModel& model, const std::int64_t* x_star, double s_star) {
    if (!(s_star > 0.0)) throw std::invalid_argument("plda_scores: s_star must be positive");
    const std::size_t G = model.genes();
    const std::size_t K = static_cast<std::size_t>(model.k_classes);

    std::vector<double> xd(G);
    for (std::size_t g = 0; g < G; ++g) xd[g] = static_cast<double>(x_star[g]);

    std::vector<double> logd(G), ld(G);
    std::vector<double> scores(K);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t g = 0; g < G; ++g) {
            const double dk = model.d[k * G + g];
            logd[g] = std::log(dk);
            ld[g] = model.lambda[g] * dk;
        }
        scores[k] = simd::dot(xd.data(), logd.data(), G) - s_star * simd::sum(ld.data(), G) +
                    std::log(model.priors[k]);
    }
    return finish_scores(std::move(scores));
}

ScoreVector nblda_scores(const NbldaModel& model, const std::vector<std::int64_t>& x_star,
                         double s_star) {
    if (x_star.size() != model.genes())
        throw std::invalid_argument("nblda_scores: test vector length does not match gene count");
    return nblda_scores(model, x_star.data(), s_star);
}

ScoreVector plda_scores(const NbldaModel& model, const std::vector<std::int64_t>& x_star,
                        double s_star) {
    if (x_star.size() != model.genes())
        throw std::invalid_argument("plda_scores: test vector length does not match gene count");
    return plda_scores(model, x_star.data(), s_star);
}

PredictResult predict(const NbldaModel& model, const CountMatrix& matrix, Method method) {
    model.validate();
    matrix.validate();
    const std::size_t G = model.genes();

    std::unordered_map<std::string, std::size_t> index;
    index.reserve(G);
    for (std::size_t g = 0; g < G; ++g) index.emplace(model.gene_ids[g], g);

    std::vector<std::size_t> to_model(matrix.genes());
    std::vector<bool> covered(G, false);
    std::vector<std::string> unknown;
    for (std::size_t mg = 0; mg < matrix.genes(); ++mg) {
        const auto it = index.find(matrix.gene_ids[mg]);
        if (it == index.end()) {
            unknown.push_back(matrix.gene_ids[mg]);
            continue;
        }
        to_model[mg] = it->second;
        covered[it->second] = true;
    }
    std::vector<std::string> missing;
    for (std::size_t g = 0; g < G; ++g)
        if (!covered[g]) missing.push_back(model.gene_ids[g]);
    if (!unknown.empty() || !missing.empty()) {
        std::ostringstream msg;
        msg << "gene ids do not align with the model";
        auto list = [&msg](const char* what, const std::vector<std::string>& ids) {
            if (ids.empty()) return;
            msg << "; " << what << ":";
            for (std::size_t i = 0; i < ids.size() && i < 8; ++i) msg << ' ' << ids[i];
            if (ids.size() > 8) msg << " (+" << ids.size() - 8 << " more)";
        };
        list("not in model", unknown);
        list("missing from input", missing);
        throw std::invalid_argument(msg.str());
    }

    PredictResult out;
    out.labels.reserve(matrix.samples());
    out.scores.reserve(matrix.samples());
    std::vector<std::int64_t> x(G);
    for (std::size_t i = 0; i < matrix.samples(); ++i) {
        for (std::size_t mg = 0; mg < matrix.genes(); ++mg)
            x[to_model[mg]] = matrix.at(mg, i);
        const double s_star = size_factor_for_test(model.size_factors, x.data(), G);
        ScoreVector sv = method == Method::Nblda ? nblda_scores(model, x.data(), s_star)
                                                 : plda_scores(model, x.data(), s_star);
        out.labels.push_back(sv.argmax);
        out.scores.push_back(std::move(sv));
    }
    return out;
}

Method recommend_method(double average_dispersion, double threshold) {
    if (!(average_dispersion >= 0.0))
        throw std::invalid_argument("recommend_method: average dispersion must be nonnegative");
    return average_dispersion < threshold ? Method::Plda : Method::Nblda;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
}

void save_model(const std::string& path, const NbldaModel& model) {
    model.validate();
    nlohmann::json j;
    j["schema_version"] = 1;
    j["k_classes"] = model.k_classes;
    j["gene_ids"] = model.gene_ids;
    j["lambda"] = model.lambda;
    j["phi"] = model.phi;
    j["priors"] = model.priors;
    nlohmann::json rows = nlohmann::json::array();
    const std::size_t G = model.genes();
    for (int k = 0; k < model.k_classes; ++k) {
        const auto* base = model.d.data() + static_cast<std::size_t>(k) * G;
        rows.push_back(std::vector<double>(base, base + G));
    }
    j["d"] = std::move(rows);
    nlohmann::json sf;
    sf["method"] = to_string(model.size_factors.method);
    sf["values"] = model.size_factors.values;
    sf["grand_total"] = model.size_factors.grand_total;
    sf["ref_genes"] = model.size_factors.ref_genes;
    sf["ref_geomean"] = model.size_factors.ref_geomean;
    sf["quartile_sum"] = model.size_factors.quartile_sum;
    sf["quantile"] = model.size_factors.quantile;
    j["size_factors"] = std::move(sf);
    atomic_write_file(path, j.dump(2) + "\n");
}

NbldaModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != 1)
            throw std::runtime_error("model file '" + path + "' has unsupported schema_version " +
                                     std::to_string(version));
        NbldaModel m;
        m.k_classes = j.at("k_classes").get<int>();
        m.gene_ids = j.at("gene_ids").get<std::vector<std::string>>();
        m.lambda = j.at("lambda").get<std::vector<double>>();
        m.phi = j.at("phi").get<std::vector<double>>();
        m.priors = j.at("priors").get<std::vector<double>>();
        const auto rows = j.at("d");
        for (const auto& row : rows) {
            const auto vals = row.get<std::vector<double>>();
            m.d.insert(m.d.end(), vals.begin(), vals.end());
        }
        const auto& sf = j.at("size_factors");
        m.size_factors.method = sf_method_from_string(sf.at("method").get<std::string>());
        m.size_factors.values = sf.at("values").get<std::vector<double>>();
        m.size_factors.grand_total = sf.at("grand_total").get<double>();
        m.size_factors.ref_genes = sf.at("ref_genes").get<std::vector<std::size_t>>();
        m.size_factors.ref_geomean = sf.at("ref_geomean").get<std::vector<double>>();
        m.size_factors.quartile_sum = sf.at("quartile_sum").get<double>();
        m.size_factors.quantile = sf.at("quantile").get<double>();
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("model file '" + path + "' is malformed: " + e.what());
    }
}

} // namespace nblda
