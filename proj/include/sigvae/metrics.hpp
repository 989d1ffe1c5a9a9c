// Language evaluation: topographic similarity at character and segment level,
// branching entropy over an empirical n-gram model, entropy-spike boundary
// detection, segment statistics, and length-vs-frequency curves.
#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sigvae/corpus.hpp"

namespace sigvae::metrics {

class MetricsError : public std::runtime_error {
public:
    explicit MetricsError(const std::string& what) : std::runtime_error(what) {}
};

struct NGramOptions {
    int max_context = 0;     // 0 means no cap
    bool strip_eos = false;  // drop the terminal eos before analysis
    double add_k = 0.0;      // optional add-k smoothing over the corpus alphabet
};

// Message symbols as analyzed (eos kept or stripped).
std::vector<int> analysis_symbols(const game::Message& m, bool strip_eos);

// Empirical n-gram statistics over every substring context of a corpus.
class NGramModel {
public:
    NGramModel(const corpus::Corpus& corpus, NGramOptions options);

    bool context_has_successors(std::span<const int> context) const;

    // H(A_next | context) in bits over the observed successor counts; throws
    // MetricsError for a context never followed by a symbol.
    double branching_entropy(std::span<const int> context) const;

    // Average next-symbol entropy in bits given contexts of length n, over
    // the start-padded ensemble (every position of every message contributes
    // one context of each length, padded at message starts), which makes the
    // sequence non-increasing in n on any corpus.
    double conditional_entropy(int n) const;

    const NGramOptions& options() const { return options_; }
    int max_sequence_length() const { return max_seq_len_; }

private:
    std::string key(std::span<const int> context) const;

    NGramOptions options_;
    int alphabet_hint_ = 0;  // number of distinct symbols seen
    int max_seq_len_ = 0;
    std::vector<std::vector<int>> sequences_;
    // real-substring contexts -> successor counts
    std::unordered_map<std::string, std::unordered_map<int, int>> counts_;
};

// Entropy-spike boundary positions for one symbol sequence, replaying the
// grow-then-slide window walk: at window (i, w) a boundary lands at i+w when
// BE(s[i..i+w-1]) - BE(s[i..i+w-2]) exceeds the threshold and w > 1; the
// window grows while i+w < n-1 and otherwise slides one position.
std::vector<int> detect_boundaries(const NGramModel& model, std::span<const int> symbols,
                                   double threshold);

struct Segmentation {
    std::vector<std::vector<int>> boundaries;             // per message, sorted, strictly inside
    std::vector<std::vector<std::vector<int>>> segments;  // per message, boundary-delimited chunks
};

Segmentation segment_corpus(const corpus::Corpus& corpus, const NGramModel& model, double threshold);

struct CriteriaStats {
    double n_bou = 0.0;  // mean boundaries per message
    double n_seg = 0.0;  // distinct segment strings in the language
};
CriteriaStats criteria_stats(const Segmentation& seg);

// Spearman rank correlation with average ranks for ties; throws MetricsError
// when either vector has zero variance.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

double hamming_distance(const game::AttValObject& a, const game::AttValObject& b);
double levenshtein(std::span<const int> a, std::span<const int> b);

// Spearman correlation between pairwise object Hamming distances and message
// Levenshtein distances over all unordered pairs.
double topsim_character(const corpus::Corpus& corpus, bool strip_eos);
// Same with boundary-delimited segments as the edit unit.
double topsim_word(const corpus::Corpus& corpus, const Segmentation& seg);

struct ZlaCurve {
    std::vector<double> lengths_by_rank;  // message length per frequency rank (descending)
    std::vector<double> smoothed;         // centered moving average
    double spearman_rank_length = 0.0;
};

// object_probs aligns with corpus entries; window is the moving-average span.
ZlaCurve zla_curve(const corpus::Corpus& corpus, const std::vector<double>& object_probs, int window);

struct MetricsOptions {
    double threshold = 0.0;
    bool strip_eos = false;
    int max_context = 0;
    double add_k = 0.0;
};

struct MetricsReport {
    std::optional<double> c_topsim;
    std::optional<double> w_topsim;
    std::optional<double> delta_wc;  // w_topsim - c_topsim when both defined
    double n_bou = 0.0;
    double n_seg = 0.0;
    std::optional<double> zla_spearman;
};

MetricsReport compute_report(const corpus::Corpus& corpus, const MetricsOptions& options);

}  // namespace sigvae::metrics
