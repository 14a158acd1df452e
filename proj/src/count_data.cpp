#include "nblda/count_data.hpp"

#include "nblda/rng.hpp"
#include "nblda/simd.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace nblda {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

std::int64_t parse_count_cell(const std::string& cell, std::size_t row, std::size_t col) {
    std::int64_t value = 0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
        throw std::invalid_argument("count table: non-integer cell '" + cell + "' at data row " +
                                    std::to_string(row + 1) + ", column " + std::to_string(col + 1));
    }
    if (value < 0) {
        throw std::invalid_argument("count table: negative value at data row " +
                                    std::to_string(row + 1) + ", column " + std::to_string(col + 1));
    }
    return value;
}

void require_unique(const std::vector<std::string>& ids, const char* what) {
    std::unordered_set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second)
            throw std::invalid_argument(std::string(what) + " ids not unique: '" + id + "'");
    }
}

CountMatrix transpose(const CountMatrix& m) {
    CountMatrix t;
    t.gene_ids = m.sample_ids;
    t.sample_ids = m.gene_ids;
    t.counts.resize(m.counts.size());
    for (std::size_t g = 0; g < m.genes(); ++g)
        for (std::size_t i = 0; i < m.samples(); ++i)
            t.counts[i * m.genes() + g] = m.at(g, i);
    return t;
}

} // namespace

void CountMatrix::validate() const {
    if (genes() == 0 || samples() == 0)
        throw std::invalid_argument("count matrix must have at least one gene and one sample");
    if (counts.size() != genes() * samples())
        throw std::invalid_argument("count matrix storage size does not match dimensions");
    require_unique(gene_ids, "gene");
    require_unique(sample_ids, "sample");
    for (const auto v : counts)
        if (v < 0) throw std::invalid_argument("count matrix contains a negative entry");
}

void LabeledDataset::validate(bool require_every_class_nonempty) const {
    matrix.validate();
    if (labels.size() != matrix.samples())
        throw std::invalid_argument("labels length does not match sample count");
    if (k_classes < 1) throw std::invalid_argument("class count must be at least 1");
    for (const int y : labels)
        if (y < 1 || y > k_classes)
            throw std::invalid_argument("label " + std::to_string(y) + " outside {1.." +
                                        std::to_string(k_classes) + "}");
    if (require_every_class_nonempty) {
        const auto counts = class_counts();
        for (int k = 0; k < k_classes; ++k)
            if (counts[static_cast<std::size_t>(k)] == 0)
                throw std::invalid_argument("class " + std::to_string(k + 1) + " has no samples");
    }
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
    std::vector<std::size_t> out(static_cast<std::size_t>(k_classes), 0);
    for (const int y : labels) ++out[static_cast<std::size_t>(y - 1)];
    return out;
}

CountMatrix load_counts(std::istream& in, Layout layout, Delimiter delim) {
    const char d = delim == Delimiter::Tab ? '\t' : ',';
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("count table: empty input");
    const auto header = split_line(strip_cr(line), d);
    if (header.size() < 2)
        throw std::invalid_argument("count table: header must contain an id column and data columns");

    CountMatrix m;
    m.sample_ids.assign(header.begin() + 1, header.end());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split_line(line, d);
        if (cells.size() != header.size())
            throw std::invalid_argument("count table: row " + std::to_string(row + 1) + " has " +
                                        std::to_string(cells.size()) + " fields, expected " +
                                        std::to_string(header.size()));
        m.gene_ids.push_back(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c)
            m.counts.push_back(parse_count_cell(cells[c], row, c));
        ++row;
    }
    if (layout == Layout::SamplesAsRows) m = transpose(m);
    m.validate();
    return m;
}

CountMatrix load_counts_file(const std::string& path, Layout layout, Delimiter delim) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open count table: " + path);
    return load_counts(in, layout, delim);
}

void save_counts(std::ostream& out, const CountMatrix& m, Delimiter delim) {
    const char d = delim == Delimiter::Tab ? '\t' : ',';
    out << "gene_id";
    for (const auto& s : m.sample_ids) out << d << s;
    out << '\n';
    for (std::size_t g = 0; g < m.genes(); ++g) {
        out << m.gene_ids[g];
        for (std::size_t i = 0; i < m.samples(); ++i) out << d << m.at(g, i);
        out << '\n';
    }
}

std::vector<std::pair<std::string, int>> load_labels_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open labels file: " + path);
    std::vector<std::pair<std::string, int>> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        ++row;
        if (line.empty()) continue;
        const char d = line.find('\t') != std::string::npos ? '\t' : ',';
        const auto cells = split_line(line, d);
        if (cells.size() != 2)
            throw std::invalid_argument("labels file: row " + std::to_string(row) +
                                        " must have two columns (sample_id, class_index)");
        if (row == 1 && cells[0] == "sample_id") continue; // optional header
        int y = 0;
        const auto res = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), y);
        if (res.ec != std::errc() || res.ptr != cells[1].data() + cells[1].size())
            throw std::invalid_argument("labels file: non-integer class at row " + std::to_string(row));
        out.emplace_back(cells[0], y);
    }
    if (out.empty()) throw std::invalid_argument("labels file: no label rows in " + path);
    return out;
}

LabeledDataset attach_labels(CountMatrix matrix,
                             const std::vector<std::pair<std::string, int>>& labels) {
    matrix.validate();
    std::unordered_map<std::string, int> by_id;
    for (const auto& [id, y] : labels) {
        if (!by_id.emplace(id, y).second)
            throw std::invalid_argument("labels file: duplicate sample id '" + id + "'");
    }
    LabeledDataset data;
    data.labels.reserve(matrix.samples());
    int k = 0;
    for (const auto& id : matrix.sample_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end())
            throw std::invalid_argument("labels file: no label for sample '" + id + "'");
        data.labels.push_back(it->second);
        k = std::max(k, it->second);
    }
    data.matrix = std::move(matrix);
    data.k_classes = k;
    data.validate(false);
    return data;
}

SplitResult split_dataset(const LabeledDataset& data, std::size_t test_count,
                          std::uint64_t rng_seed) {
    data.validate(true);
    const std::size_t n = data.matrix.samples();
    if (test_count < 1 || test_count >= n)
        throw std::invalid_argument("test_count must satisfy 1 <= test_count < n");

    std::vector<std::size_t> order(n);
    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng = Rng::derive(rng_seed, static_cast<std::uint64_t>(attempt));
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = rng.uniform_int(i + 1);
            std::swap(order[i], order[j]);
        }
        std::vector<std::size_t> per_class(static_cast<std::size_t>(data.k_classes), 0);
        for (std::size_t i = test_count; i < n; ++i)
            ++per_class[static_cast<std::size_t>(data.labels[order[i]] - 1)];
        const bool ok = std::all_of(per_class.begin(), per_class.end(),
                                    [](std::size_t c) { return c >= 1; });
        if (!ok) continue;

        SplitResult res;
        res.test_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_count));
        res.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(test_count), order.end());
        std::sort(res.test_indices.begin(), res.test_indices.end());
        std::sort(res.train_indices.begin(), res.train_indices.end());

        const auto take = [&](const std::vector<std::size_t>& idx) {
            LabeledDataset part;
            part.k_classes = data.k_classes;
            part.matrix.gene_ids = data.matrix.gene_ids;
            part.matrix.counts.reserve(data.matrix.genes() * idx.size());
            for (const std::size_t i : idx) {
                part.matrix.sample_ids.push_back(data.matrix.sample_ids[i]);
                part.labels.push_back(data.labels[i]);
            }
            for (std::size_t g = 0; g < data.matrix.genes(); ++g)
                for (const std::size_t i : idx) part.matrix.counts.push_back(data.matrix.at(g, i));
            return part;
        };
        res.train = take(res.train_indices);
        res.test = take(res.test_indices);
        return res;
    }
    throw std::runtime_error("split_dataset: could not stratify split after 100 attempts");
}

std::vector<double> bss_wss_ratios(const LabeledDataset& data,
                                   const std::vector<double>& size_factors) {
    data.validate(true);
    if (data.k_classes < 2) throw std::invalid_argument("bss_wss_filter requires K >= 2");
    if (size_factors.size() != data.matrix.samples())
        throw std::invalid_argument("size factor count does not match sample count");
    for (const double s : size_factors)
        if (!(s > 0.0)) throw std::invalid_argument("size factors must be strictly positive");

    const std::size_t n = data.matrix.samples();
    const std::size_t G = data.matrix.genes();
    const auto nk = data.class_counts();

    std::vector<double> z(n);
    std::vector<double> ratios(G);
    std::vector<double> class_mean(static_cast<std::size_t>(data.k_classes));
    for (std::size_t g = 0; g < G; ++g) {
        const std::int64_t* row = data.matrix.row(g);
        for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<double>(row[i]) / size_factors[i];
        const double grand_mean = simd::sum(z.data(), n) / static_cast<double>(n);
        std::fill(class_mean.begin(), class_mean.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            class_mean[static_cast<std::size_t>(data.labels[i] - 1)] += z[i];
        double bss = 0.0;
        for (int k = 0; k < data.k_classes; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            class_mean[ku] /= static_cast<double>(nk[ku]);
            const double dev = class_mean[ku] - grand_mean;
            bss += static_cast<double>(nk[ku]) * dev * dev;
        }
        double wss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = z[i] - class_mean[static_cast<std::size_t>(data.labels[i] - 1)];
            wss += dev * dev;
        }
        if (bss <= 0.0) {
            ratios[g] = -1.0; // no between-class signal: ranked last
        } else if (wss <= 0.0) {
            ratios[g] = std::numeric_limits<double>::infinity();
        } else {
            ratios[g] = bss / wss;
        }
    }
    return ratios;
}

LabeledDataset bss_wss_filter(const LabeledDataset& data,
                              const std::vector<double>& size_factors, std::size_t top_g) {
    if (top_g > data.matrix.genes())
        throw std::invalid_argument("top_g exceeds gene count");
    const auto ratios = bss_wss_ratios(data, size_factors);

    std::vector<std::size_t> order(ratios.size());
    for (std::size_t g = 0; g < order.size(); ++g) order[g] = g;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ratios[a] > ratios[b]; });
    std::vector<std::size_t> keep(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_g));
    std::sort(keep.begin(), keep.end()); // preserve original gene order

    LabeledDataset out;
    out.k_classes = data.k_classes;
    out.labels = data.labels;
    out.matrix.sample_ids = data.matrix.sample_ids;
    out.matrix.counts.reserve(top_g * data.matrix.samples());
    for (const std::size_t g : keep) {
        out.matrix.gene_ids.push_back(data.matrix.gene_ids[g]);
        const std::int64_t* row = data.matrix.row(g);
        out.matrix.counts.insert(out.matrix.counts.end(), row, row + data.matrix.samples());
    }
    return out;
}

} // namespace nblda
