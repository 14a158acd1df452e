#include "nblda/classifier.hpp"
#include "nblda/count_data.hpp"
#include "nblda/dispersion.hpp"
#include "nblda/normalization.hpp"
#include "nblda/rng.hpp"
#include "nblda/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace {

using nblda::CountMatrix;
using nblda::LabeledDataset;
using nblda::Method;
using nblda::NbldaModel;
using nblda::SfMethod;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void emit(const std::string& output, const std::string& content) {
    if (output.empty()) {
        std::cout << content;
        return;
    }
    nblda::atomic_write_file(output, content);
}

nblda::Layout layout_from(const std::string& s) {
    return s == "samples-rows" ? nblda::Layout::SamplesAsRows : nblda::Layout::GenesAsRows;
}

nblda::Delimiter delim_from(const std::string& s) {
    return s == "comma" ? nblda::Delimiter::Comma : nblda::Delimiter::Tab;
}

LabeledDataset load_dataset(const std::string& counts_path, const std::string& labels_path,
                            const std::string& layout, const std::string& delim) {
    CountMatrix m = nblda::load_counts_file(counts_path, layout_from(layout), delim_from(delim));
    const auto labels = nblda::load_labels_file(labels_path);
    return nblda::attach_labels(std::move(m), labels);
}

std::vector<std::string> split_fields(const std::string& line) {
    const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Per-gene dispersion table: gene id in the first column, value in the last;
// comment lines and an optional gene_id header are skipped. This reads the
// estimate-dispersion output directly.
std::vector<double> load_phi_file(const std::string& path, const std::vector<std::string>& gene_ids) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dispersion file '" + path + "'");
    std::unordered_map<std::string, double> by_gene;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_fields(line);
        if (fields[0] == "gene_id") continue;
        if (fields.size() < 2)
            throw std::runtime_error("dispersion file '" + path + "' line " +
                                     std::to_string(line_no) + " needs at least two columns");
        double value = 0.0;
        const std::string& text = fields.back();
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !(value >= 0.0))
            throw std::runtime_error("dispersion file '" + path + "' line " +
                                     std::to_string(line_no) + ": bad value '" + text + "'");
        if (!by_gene.emplace(fields[0], value).second)
            throw std::runtime_error("dispersion file '" + path + "' repeats gene '" + fields[0] + "'");
    }
    std::vector<double> out(gene_ids.size());
    for (std::size_t g = 0; g < gene_ids.size(); ++g) {
        const auto it = by_gene.find(gene_ids[g]);
        if (it == by_gene.end())
            throw std::runtime_error("dispersion file '" + path + "' has no entry for gene '" +
                                     gene_ids[g] + "'");
        out[g] = it->second;
    }
    return out;
}

CountMatrix subset_genes(const CountMatrix& m, const std::vector<std::string>& keep) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(m.genes());
    for (std::size_t g = 0; g < m.genes(); ++g) index.emplace(m.gene_ids[g], g);
    CountMatrix out;
    out.gene_ids = keep;
    out.sample_ids = m.sample_ids;
    out.counts.resize(keep.size() * m.samples());
    for (std::size_t g = 0; g < keep.size(); ++g) {
        const auto it = index.find(keep[g]);
        if (it == index.end())
            throw std::runtime_error("gene '" + keep[g] + "' is missing from the count table");
        const std::int64_t* src = m.row(it->second);
        std::copy(src, src + m.samples(), out.counts.begin() + g * m.samples());
    }
    return out;
}

struct FitArgs {
    std::string counts, labels, output, layout = "genes-rows", delimiter = "tab";
    std::string size_factor = "total";
    double quantile = 0.75;
    double phi = -1.0;
    std::string phi_file;
    std::size_t top_genes = 0;
};

void run_fit(const FitArgs& a) {
    LabeledDataset data = load_dataset(a.counts, a.labels, a.layout, a.delimiter);
    const SfMethod sf_method = nblda::sf_method_from_string(a.size_factor);
    if (a.top_genes > 0) {
        const auto sf = nblda::compute_size_factors(data.matrix, sf_method, a.quantile);
        data = nblda::bss_wss_filter(data, sf.values, a.top_genes);
    }
    NbldaModel model;
    if (a.phi >= 0.0) {
        model = nblda::fit_nblda(data, sf_method, a.quantile,
                                 std::vector<double>(data.matrix.genes(), a.phi));
    } else if (!a.phi_file.empty()) {
        model = nblda::fit_nblda(data, sf_method, a.quantile,
                                 load_phi_file(a.phi_file, data.matrix.gene_ids));
    } else {
        model = nblda::fit_nblda(data, sf_method, a.quantile);
    }
    nblda::save_model(a.output, model);
}

struct PredictArgs {
    std::string model, counts, output, layout = "genes-rows", delimiter = "tab";
    std::string method = "nblda", format = "tsv";
};

void run_predict(const PredictArgs& a) {
    const NbldaModel model = nblda::load_model(a.model);
    const CountMatrix m =
        nblda::load_counts_file(a.counts, layout_from(a.layout), delim_from(a.delimiter));
    const nblda::PredictResult res =
        nblda::predict(model, m, nblda::method_from_string(a.method));
    if (a.format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < m.samples(); ++i) {
            nlohmann::json row;
            row["sample_id"] = m.sample_ids[i];
            row["predicted_class"] = res.labels[i];
            row["posteriors"] = res.scores[i].posteriors;
            rows.push_back(std::move(row));
        }
        emit(a.output, rows.dump(2) + "\n");
        return;
    }
    std::ostringstream out;
    out << "sample_id\tpredicted_class";
    for (int k = 1; k <= model.k_classes; ++k) out << "\tposterior_" << k;
    out << '\n';
    for (std::size_t i = 0; i < m.samples(); ++i) {
        out << m.sample_ids[i] << '\t' << res.labels[i];
        for (double p : res.scores[i].posteriors) out << '\t' << num(p);
        out << '\n';
    }
    emit(a.output, out.str());
}

struct EvaluateArgs {
    std::string counts, labels, output, layout = "genes-rows", delimiter = "tab";
    std::string method = "nblda", size_factor = "total", format = "tsv";
    double quantile = 0.75;
    double phi = -1.0;
    std::size_t top_genes = 0;
    std::size_t test_count = 0;
    int replicates = 50;
    std::uint64_t seed = 0;
    bool per_replicate = false;
};

void run_evaluate(const EvaluateArgs& a) {
    if (a.replicates < 1) throw std::runtime_error("evaluate needs at least one replicate");
    const LabeledDataset data = load_dataset(a.counts, a.labels, a.layout, a.delimiter);
    const SfMethod sf_method = nblda::sf_method_from_string(a.size_factor);
    const Method method = nblda::method_from_string(a.method);
    const std::size_t n = data.matrix.samples();
    const std::size_t test_count = a.test_count > 0 ? a.test_count : std::max<std::size_t>(1, n / 4);

    std::vector<double> rates;
    int skipped = 0;
    for (int rep = 0; rep < a.replicates; ++rep) {
        const std::uint64_t split_seed = nblda::Rng::derive(a.seed, static_cast<std::uint64_t>(rep)).next_u64();
        try {
            nblda::SplitResult split = nblda::split_dataset(data, test_count, split_seed);
            LabeledDataset train = std::move(split.train);
            if (a.top_genes > 0) {
                const auto sf = nblda::compute_size_factors(train.matrix, sf_method, a.quantile);
                train = nblda::bss_wss_filter(train, sf.values, a.top_genes);
            }
            const NbldaModel model =
                a.phi >= 0.0
                    ? nblda::fit_nblda(train, sf_method, a.quantile,
                                       std::vector<double>(train.matrix.genes(), a.phi))
                    : nblda::fit_nblda(train, sf_method, a.quantile);
            const CountMatrix test_matrix = a.top_genes > 0
                                                ? subset_genes(split.test.matrix, model.gene_ids)
                                                : split.test.matrix;
            const nblda::PredictResult pred = nblda::predict(model, test_matrix, method);
            std::size_t wrong = 0;
            for (std::size_t i = 0; i < pred.labels.size(); ++i)
                if (pred.labels[i] != split.test.labels[i]) ++wrong;
            rates.push_back(static_cast<double>(wrong) / static_cast<double>(pred.labels.size()));
        } catch (const std::exception&) {
            ++skipped;
        }
    }

    double mean = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
    if (!rates.empty()) {
        double sum = 0.0;
        for (double r : rates) sum += r;
        mean = sum / static_cast<double>(rates.size());
        se = 0.0;
        if (rates.size() >= 2) {
            double ss = 0.0;
            for (double r : rates) ss += (r - mean) * (r - mean);
            se = std::sqrt(ss / static_cast<double>(rates.size() - 1) /
                           static_cast<double>(rates.size()));
        }
    }

    if (a.format == "json") {
        nlohmann::json j;
        j["method"] = a.method;
        j["mean_error_rate"] = mean;
        j["std_error"] = se;
        j["replicates"] = rates.size();
        j["skipped"] = skipped;
        j["test_count"] = test_count;
        if (a.per_replicate) j["rates"] = rates;
        emit(a.output, j.dump(2) + "\n");
        return;
    }
    std::ostringstream out;
    out << "method\tmean_error_rate\tstd_error\treplicates\tskipped\ttest_count\n";
    out << a.method << '\t' << num(mean) << '\t' << num(se) << '\t' << rates.size() << '\t'
        << skipped << '\t' << test_count << '\n';
    if (a.per_replicate) {
        out << "\nmethod\treplicate\terror_rate\n";
        for (std::size_t i = 0; i < rates.size(); ++i)
            out << a.method << '\t' << i + 1 << '\t' << num(rates[i]) << '\n';
    }
    emit(a.output, out.str());
}

struct DispersionArgs {
    std::string counts, labels, output, layout = "genes-rows", delimiter = "tab";
    std::string size_factor = "total", format = "tsv";
    double quantile = 0.75;
    double threshold = 0.1;
};

void run_estimate_dispersion(const DispersionArgs& a) {
    const LabeledDataset data = load_dataset(a.counts, a.labels, a.layout, a.delimiter);
    const auto sf = nblda::compute_size_factors(
        data.matrix, nblda::sf_method_from_string(a.size_factor), a.quantile);
    const nblda::DispersionEstimate est = nblda::shrink_dispersions(data, sf);
    double avg = 0.0;
    for (double p : est.shrunken) avg += p;
    avg /= static_cast<double>(est.shrunken.size());
    const Method rec = nblda::recommend_method(avg, a.threshold);

    if (a.format == "json") {
        nlohmann::json genes = nlohmann::json::array();
        for (std::size_t g = 0; g < est.shrunken.size(); ++g) {
            nlohmann::json row;
            row["gene_id"] = data.matrix.gene_ids[g];
            row["phi_initial"] = est.initial[g];
            row["phi_shrunken"] = est.shrunken[g];
            genes.push_back(std::move(row));
        }
        nlohmann::json j;
        j["genes"] = std::move(genes);
        j["delta"] = est.weight;
        j["xi"] = est.target;
        j["average_dispersion"] = avg;
        j["threshold"] = a.threshold;
        j["recommendation"] = nblda::to_string(rec);
        emit(a.output, j.dump(2) + "\n");
        return;
    }
    std::ostringstream out;
    out << "gene_id\tphi_initial\tphi_shrunken\n";
    for (std::size_t g = 0; g < est.shrunken.size(); ++g)
        out << data.matrix.gene_ids[g] << '\t' << num(est.initial[g]) << '\t'
            << num(est.shrunken[g]) << '\n';
    out << "# delta=" << num(est.weight) << " xi=" << num(est.target) << " average_dispersion="
        << num(avg) << " threshold=" << num(a.threshold) << " recommendation="
        << nblda::to_string(rec) << '\n';
    emit(a.output, out.str());
}

struct SimulateArgs {
    std::size_t genes = 100;
    std::size_t samples = 8;
    int classes = 2;
    double de_proportion = 0.8;
    double sigma = 5.0;
    double phi = 20.0;
    std::uint64_t seed = 0;
    int replicates = 200;
    std::vector<std::string> methods{"nblda", "plda"};
    std::string size_factor = "total", format = "tsv", output;
    bool per_replicate = false;
};

void run_simulate(const SimulateArgs& a) {
    nblda::SimScenario sc;
    sc.genes = a.genes;
    sc.samples = a.samples;
    sc.classes = a.classes;
    sc.de_proportion = a.de_proportion;
    sc.sigma = a.sigma;
    sc.phi = a.phi;
    sc.seed = a.seed;

    std::vector<Method> methods;
    for (const auto& name : a.methods) methods.push_back(nblda::method_from_string(name));
    const auto results =
        nblda::run_study(sc, a.replicates, methods, nblda::sf_method_from_string(a.size_factor));

    if (a.format == "json") {
        nlohmann::json j;
        nlohmann::json scenario;
        scenario["genes"] = sc.genes;
        scenario["samples"] = sc.samples;
        scenario["classes"] = sc.classes;
        scenario["de_proportion"] = sc.de_proportion;
        scenario["sigma"] = sc.sigma;
        scenario["phi"] = sc.phi;
        scenario["seed"] = sc.seed;
        scenario["replicates"] = a.replicates;
        j["scenario"] = std::move(scenario);
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : results) {
            nlohmann::json row;
            row["method"] = nblda::to_string(r.method);
            row["mean_error_rate"] = r.mean_rate;
            row["std_error"] = r.std_error;
            row["replicates"] = r.replicates;
            row["skipped"] = r.skipped;
            if (a.per_replicate) row["rates"] = r.rates;
            rows.push_back(std::move(row));
        }
        j["results"] = std::move(rows);
        emit(a.output, j.dump(2) + "\n");
        return;
    }
    std::ostringstream out;
    out << "# scenario genes=" << sc.genes << " samples=" << sc.samples << " classes="
        << sc.classes << " de_proportion=" << num(sc.de_proportion) << " sigma=" << num(sc.sigma)
        << " phi=" << num(sc.phi) << " seed=" << sc.seed << " replicates=" << a.replicates << '\n';
    out << "method\tmean_error_rate\tstd_error\treplicates\tskipped\n";
    for (const auto& r : results)
        out << nblda::to_string(r.method) << '\t' << num(r.mean_rate) << '\t' << num(r.std_error)
            << '\t' << r.replicates << '\t' << r.skipped << '\n';
    if (a.per_replicate) {
        out << "\nmethod\treplicate\terror_rate\n";
        for (const auto& r : results)
            for (std::size_t i = 0; i < r.rates.size(); ++i)
                out << nblda::to_string(r.method) << '\t' << i + 1 << '\t' << num(r.rates[i])
                    << '\n';
    }
    emit(a.output, out.str());
}

struct CurveArgs {
    std::int64_t x_star = 10;
    double d = 1.5;
    double s_star = 1.0;
    double lambda = 10.0;
    std::size_t genes = 500;
    std::string mode = "common", format = "tsv", output;
    double grid_min = 0.1;
    double grid_max = 20.0;
    std::size_t grid_points = 200;
    std::uint64_t seed = 0;
};

void run_score_curve(const CurveArgs& a) {
    if (a.grid_points < 1) throw std::runtime_error("score-curve needs at least one grid point");
    if (a.grid_points > 1 && !(a.grid_max > a.grid_min))
        throw std::runtime_error("score-curve grid needs grid-max > grid-min");
    std::vector<double> grid(a.grid_points);
    if (a.grid_points == 1) {
        grid[0] = a.grid_min;
    } else {
        for (std::size_t j = 0; j < a.grid_points; ++j)
            grid[j] = a.grid_min + (a.grid_max - a.grid_min) * static_cast<double>(j) /
                                       static_cast<double>(a.grid_points - 1);
    }
    const auto mode = a.mode == "chi-squared" ? nblda::CurveMode::ChiSquared : nblda::CurveMode::Common;
    const auto points =
        nblda::score_curve(a.x_star, a.d, a.s_star, a.lambda, a.genes, grid, mode, a.seed);

    if (a.format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& p : points) {
            nlohmann::json row;
            row["x"] = p.x;
            row["nblda"] = p.nblda;
            row["plda"] = p.plda;
            rows.push_back(std::move(row));
        }
        emit(a.output, rows.dump(2) + "\n");
        return;
    }
    std::ostringstream out;
    out << "x\tnblda\tplda\n";
    for (const auto& p : points)
        out << num(p.x) << '\t' << num(p.nblda) << '\t' << num(p.plda) << '\n';
    emit(a.output, out.str());
}

void add_table_flags(CLI::App* sub, std::string& layout, std::string& delimiter) {
    sub->add_option("--layout", layout, "count table orientation")
        ->check(CLI::IsMember({"genes-rows", "samples-rows"}))
        ->capture_default_str();
    sub->add_option("--delimiter", delimiter, "count table delimiter")
        ->check(CLI::IsMember({"tab", "comma"}))
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"negative binomial linear discriminant analysis for count data"};
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model and write it as JSON");
    fit_cmd->add_option("--counts", fit.counts, "count table")->required();
    fit_cmd->add_option("--labels", fit.labels, "labels file (sample_id, class)")->required();
    fit_cmd->add_option("--output", fit.output, "model output path")->required();
    add_table_flags(fit_cmd, fit.layout, fit.delimiter);
    fit_cmd->add_option("--size-factor", fit.size_factor, "size factor method")
        ->check(CLI::IsMember({"total", "total-count", "median-ratio", "upper-quartile"}))
        ->capture_default_str();
    fit_cmd->add_option("--quantile", fit.quantile, "upper-quartile quantile")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    auto* fit_phi = fit_cmd->add_option("--phi", fit.phi, "common dispersion for every gene")
                        ->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--phi-file", fit.phi_file, "per-gene dispersion table")
        ->excludes(fit_phi);
    fit_cmd->add_option("--top-genes", fit.top_genes, "keep the top genes by BSS/WSS ratio");
    fit_cmd->callback([&fit]() { run_fit(fit); });

    PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "classify samples with a fitted model");
    predict_cmd->add_option("--model", predict.model, "model JSON from fit")->required();
    predict_cmd->add_option("--counts", predict.counts, "count table to classify")->required();
    add_table_flags(predict_cmd, predict.layout, predict.delimiter);
    predict_cmd->add_option("--method", predict.method, "discriminant score")
        ->check(CLI::IsMember({"nblda", "plda"}))
        ->capture_default_str();
    predict_cmd->add_option("--output", predict.output, "output path (default stdout)");
    predict_cmd->add_option("--format", predict.format, "output format")
        ->check(CLI::IsMember({"tsv", "json"}))
        ->capture_default_str();
    predict_cmd->callback([&predict]() { run_predict(predict); });

    EvaluateArgs evaluate;
    auto* eval_cmd =
        app.add_subcommand("evaluate", "repeated stratified splits, mean misclassification rate");
    eval_cmd->add_option("--counts", evaluate.counts, "count table")->required();
    eval_cmd->add_option("--labels", evaluate.labels, "labels file")->required();
    add_table_flags(eval_cmd, evaluate.layout, evaluate.delimiter);
    eval_cmd->add_option("--method", evaluate.method, "discriminant score")
        ->check(CLI::IsMember({"nblda", "plda"}))
        ->capture_default_str();
    eval_cmd->add_option("--size-factor", evaluate.size_factor, "size factor method")
        ->check(CLI::IsMember({"total", "total-count", "median-ratio", "upper-quartile"}))
        ->capture_default_str();
    eval_cmd->add_option("--quantile", evaluate.quantile, "upper-quartile quantile")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    eval_cmd->add_option("--phi", evaluate.phi, "common dispersion override")
        ->check(CLI::NonNegativeNumber);
    eval_cmd->add_option("--top-genes", evaluate.top_genes,
                         "keep the top training genes by BSS/WSS ratio");
    eval_cmd->add_option("--test-count", evaluate.test_count,
                         "held-out samples per split (default: a quarter)");
    eval_cmd->add_option("--replicates", evaluate.replicates, "number of splits")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    eval_cmd->add_option("--seed", evaluate.seed, "RNG seed")->capture_default_str();
    eval_cmd->add_flag("--per-replicate", evaluate.per_replicate, "also list per-split rates");
    eval_cmd->add_option("--output", evaluate.output, "output path (default stdout)");
    eval_cmd->add_option("--format", evaluate.format, "output format")
        ->check(CLI::IsMember({"tsv", "json"}))
        ->capture_default_str();
    eval_cmd->callback([&evaluate]() { run_evaluate(evaluate); });

    DispersionArgs disp;
    auto* disp_cmd =
        app.add_subcommand("estimate-dispersion", "per-gene shrinkage dispersion estimates");
    disp_cmd->add_option("--counts", disp.counts, "count table")->required();
    disp_cmd->add_option("--labels", disp.labels, "labels file")->required();
    add_table_flags(disp_cmd, disp.layout, disp.delimiter);
    disp_cmd->add_option("--size-factor", disp.size_factor, "size factor method")
        ->check(CLI::IsMember({"total", "total-count", "median-ratio", "upper-quartile"}))
        ->capture_default_str();
    disp_cmd->add_option("--quantile", disp.quantile, "upper-quartile quantile")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    disp_cmd->add_option("--threshold", disp.threshold,
                         "average dispersion below this recommends plda")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    disp_cmd->add_option("--output", disp.output, "output path (default stdout)");
    disp_cmd->add_option("--format", disp.format, "output format")
        ->check(CLI::IsMember({"tsv", "json"}))
        ->capture_default_str();
    disp_cmd->callback([&disp]() { run_estimate_dispersion(disp); });

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo misclassification study");
    sim_cmd->add_option("--genes", sim.genes, "gene count")->capture_default_str();
    sim_cmd->add_option("--samples", sim.samples, "samples per dataset")->capture_default_str();
    sim_cmd->add_option("--classes", sim.classes, "class count")->capture_default_str();
    sim_cmd->add_option("--de-proportion", sim.de_proportion, "fraction of DE genes")
        ->capture_default_str();
    sim_cmd->add_option("--sigma", sim.sigma, "log fold-change scale")->capture_default_str();
    sim_cmd->add_option("--phi", sim.phi, "common true dispersion")->capture_default_str();
    sim_cmd->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
    sim_cmd->add_option("--replicates", sim.replicates, "simulation replicates")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim_cmd->add_option("--methods", sim.methods, "methods to compare")
        ->delimiter(',')
        ->check(CLI::IsMember({"nblda", "plda"}));
    sim_cmd->add_option("--size-factor", sim.size_factor, "size factor method used when fitting")
        ->check(CLI::IsMember({"total", "total-count", "median-ratio", "upper-quartile"}))
        ->capture_default_str();
    sim_cmd->add_flag("--per-replicate", sim.per_replicate, "also list per-replicate rates");
    sim_cmd->add_option("--output", sim.output, "output path (default stdout)");
    sim_cmd->add_option("--format", sim.format, "output format")
        ->check(CLI::IsMember({"tsv", "json"}))
        ->capture_default_str();
    sim_cmd->callback([&sim]() { run_simulate(sim); });

    CurveArgs curve;
    auto* curve_cmd = app.add_subcommand("score-curve", "score versus dispersion table");
    curve_cmd->add_option("--x-star", curve.x_star, "test count per gene")->capture_default_str();
    curve_cmd->add_option("--d", curve.d, "class effect")->capture_default_str();
    curve_cmd->add_option("--s-star", curve.s_star, "test size factor")->capture_default_str();
    curve_cmd->add_option("--lambda", curve.lambda, "per-gene total")->capture_default_str();
    curve_cmd->add_option("--genes", curve.genes, "gene count")->capture_default_str();
    curve_cmd->add_option("--mode", curve.mode, "grid meaning: phi, or chi-squared df")
        ->check(CLI::IsMember({"common", "chi-squared"}))
        ->capture_default_str();
    curve_cmd->add_option("--grid-min", curve.grid_min, "first grid value")->capture_default_str();
    curve_cmd->add_option("--grid-max", curve.grid_max, "last grid value")->capture_default_str();
    curve_cmd->add_option("--grid-points", curve.grid_points, "grid size")->capture_default_str();
    curve_cmd->add_option("--seed", curve.seed, "RNG seed (chi-squared mode)")
        ->capture_default_str();
    curve_cmd->add_option("--output", curve.output, "output path (default stdout)");
    curve_cmd->add_option("--format", curve.format, "output format")
        ->check(CLI::IsMember({"tsv", "json"}))
        ->capture_default_str();
    curve_cmd->callback([&curve]() { run_score_curve(curve); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
