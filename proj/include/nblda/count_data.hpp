#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nblda {

// G x n matrix of nonnegative integer read counts, genes as rows.
struct CountMatrix {
    std::vector<std::string> gene_ids;
    std::vector<std::string> sample_ids;
    std::vector<std::int64_t> counts; // row-major, genes() * samples()

    std::size_t genes() const { return gene_ids.size(); }
    std::size_t samples() const { return sample_ids.size(); }
    std::int64_t at(std::size_t g, std::size_t i) const { return counts[g * samples() + i]; }
    std::int64_t& at(std::size_t g, std::size_t i) { return counts[g * samples() + i]; }
    const std::int64_t* row(std::size_t g) const { return counts.data() + g * samples(); }

    // Throws std::invalid_argument on any violated invariant.
    void validate() const;
};

// Count matrix plus per-sample class labels in {1..K}.
struct LabeledDataset {
    CountMatrix matrix;
    std::vector<int> labels;
    int k_classes = 0;

    void validate(bool require_every_class_nonempty) const;
    std::vector<std::size_t> class_counts() const; // length k_classes
};

struct SplitResult {
    LabeledDataset train;
    LabeledDataset test;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
};

enum class Layout { GenesAsRows, SamplesAsRows };
enum class Delimiter { Tab, Comma };

CountMatrix load_counts(std::istream& in, Layout layout, Delimiter delim);
CountMatrix load_counts_file(const std::string& path, Layout layout, Delimiter delim);
void save_counts(std::ostream& out, const CountMatrix& m, Delimiter delim);

// Labels file: two columns (sample_id, class_index), header row optional.
std::vector<std::pair<std::string, int>> load_labels_file(const std::string& path);
LabeledDataset attach_labels(CountMatrix matrix,
                             const std::vector<std::pair<std::string, int>>& labels);

// Uniform random split, stratified so every class keeps at least one training
// sample; re-draws up to 100 times before giving up.
SplitResult split_dataset(const LabeledDataset& data, std::size_t test_count,
                          std::uint64_t rng_seed);

// Per-gene BSS/WSS ratio on size-factor-normalized counts. A gene with
// BSS = 0 carries no between-class signal and is ranked last; WSS = 0 with
// BSS > 0 is treated as an infinite ratio and ranked first.
std::vector<double> bss_wss_ratios(const LabeledDataset& data,
                                   const std::vector<double>& size_factors);
LabeledDataset bss_wss_filter(const LabeledDataset& data,
                              const std::vector<double>& size_factors, std::size_t top_g);

} // namespace nblda
