#include "sigvae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace sigvae::metrics {

namespace {

constexpr char kPadByte = 0;  // start padding; real symbols map to byte value+1

char symbol_byte(int symbol) { return static_cast<char>(symbol + 1); }

double entropy_bits(const std::unordered_map<int, int>& counts, double add_k, int alphabet) {
    double total = 0.0;
    for (const auto& [sym, c] : counts) total += c;
    total += add_k * alphabet;
    double h = 0.0;
    if (add_k > 0.0) {
        const int unseen = alphabet - static_cast<int>(counts.size());
        for (const auto& [sym, c] : counts) {
            const double p = (c + add_k) / total;
            h -= p * std::log2(p);
        }
        if (unseen > 0) {
            const double p = add_k / total;
            h -= unseen * p * std::log2(p);
        }
    } else {
        for (const auto& [sym, c] : counts) {
            const double p = c / total;
            if (p > 0.0) h -= p * std::log2(p);
        }
    }
    return h;
}

}  // namespace

std::vector<int> analysis_symbols(const game::Message& m, bool strip_eos) {
    std::vector<int> s = m.symbols;
    if (strip_eos && !s.empty() && s.back() == game::kEosId) s.pop_back();
    return s;
}

NGramModel::NGramModel(const corpus::Corpus& corpus, NGramOptions options) : options_(options) {
    std::set<int> alphabet;
    for (const corpus::Entry& e : corpus) {
        std::vector<int> s = analysis_symbols(e.message, options.strip_eos);
        for (int v : s) {
            if (v < 0 || v > 253) throw MetricsError("NGramModel: symbol out of byte range");
            alphabet.insert(v);
        }
        max_seq_len_ = std::max(max_seq_len_, static_cast<int>(s.size()));
        sequences_.push_back(std::move(s));
    }
    alphabet_hint_ = static_cast<int>(alphabet.size());
    for (const std::vector<int>& s : sequences_) {
        const int n = static_cast<int>(s.size());
        for (int i = 0; i < n; ++i) {
            for (int j = i; j + 1 < n; ++j) {
                const int len = j - i + 1;
                if (options_.max_context > 0 && len > options_.max_context) break;
                std::string k;
                k.reserve(len);
                for (int p = i; p <= j; ++p) k.push_back(symbol_byte(s[p]));
                ++counts_[k][s[j + 1]];
            }
        }
    }
}

std::string NGramModel::key(std::span<const int> context) const {
    std::string k;
    k.reserve(context.size());
    for (int v : context) k.push_back(symbol_byte(v));
    return k;
}

bool NGramModel::context_has_successors(std::span<const int> context) const {
    return counts_.count(key(context)) > 0;
}

double NGramModel::branching_entropy(std::span<const int> context) const {
    auto it = counts_.find(key(context));
    if (it == counts_.end())
        throw MetricsError("branching_entropy: context with no observed successor");
    return entropy_bits(it->second, options_.add_k, alphabet_hint_);
}

double NGramModel::conditional_entropy(int n) const {
    if (n < 0) throw MetricsError("conditional_entropy: negative context length");
    std::unordered_map<std::string, std::unordered_map<int, int>> table;
    for (const std::vector<int>& s : sequences_) {
        const int len = static_cast<int>(s.size());
        for (int p = 0; p < len; ++p) {
            std::string ctx;
            ctx.reserve(n);
            for (int q = p - n; q < p; ++q) ctx.push_back(q < 0 ? kPadByte : symbol_byte(s[q]));
            ++table[ctx][s[p]];
        }
    }
    double total = 0.0;
    for (const auto& [ctx, succ] : table)
        for (const auto& [sym, c] : succ) total += c;
    if (total == 0.0) return 0.0;
    double h = 0.0;
    for (const auto& [ctx, succ] : table) {
        double ctx_total = 0.0;
        for (const auto& [sym, c] : succ) ctx_total += c;
        h += (ctx_total / total) * entropy_bits(succ, 0.0, alphabet_hint_);
    }
    return h;
}

std::vector<int> detect_boundaries(const NGramModel& model, std::span<const int> symbols,
                                   double threshold) {
    const int n = static_cast<int>(symbols.size());
    std::set<int> boundaries;
    int i = 0;
    int w = 1;
    std::optional<double> prev_be;
    while (i < n) {
        std::optional<double> be;
        std::span<const int> ctx = symbols.subspan(i, w);
        if (model.context_has_successors(ctx)) be = model.branching_entropy(ctx);
        if (w > 1 && be.has_value() && prev_be.has_value() && *be - *prev_be > threshold)
            boundaries.insert(i + w);
        if (i + w < n - 1) {
            ++w;
            prev_be = be;
        } else {
            ++i;
            w = 1;
            prev_be.reset();
        }
    }
    return {boundaries.begin(), boundaries.end()};
}

Segmentation segment_corpus(const corpus::Corpus& corpus, const NGramModel& model,
                            double threshold) {
    Segmentation seg;
    seg.boundaries.reserve(corpus.size());
    seg.segments.reserve(corpus.size());
    for (const corpus::Entry& e : corpus) {
        std::vector<int> s = analysis_symbols(e.message, model.options().strip_eos);
        std::vector<int> b = detect_boundaries(model, s, threshold);
        std::vector<std::vector<int>> chunks;
        int start = 0;
        for (int cut : b) {
            chunks.emplace_back(s.begin() + start, s.begin() + cut);
            start = cut;
        }
        chunks.emplace_back(s.begin() + start, s.end());
        seg.boundaries.push_back(std::move(b));
        seg.segments.push_back(std::move(chunks));
    }
    return seg;
}

CriteriaStats criteria_stats(const Segmentation& seg) {
    CriteriaStats st;
    if (seg.boundaries.empty()) return st;
    double total = 0.0;
    for (const auto& b : seg.boundaries) total += static_cast<double>(b.size());
    st.n_bou = total / static_cast<double>(seg.boundaries.size());
    std::set<std::vector<int>> distinct;
    for (const auto& msg_segments : seg.segments)
        for (const auto& chunk : msg_segments) distinct.insert(chunk);
    st.n_seg = static_cast<double>(distinct.size());
    return st;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0)
        throw MetricsError("correlation undefined: zero variance in a distance vector");
    return cov / std::sqrt(va * vb);
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw MetricsError("spearman: length mismatch");
    if (a.size() < 2) throw MetricsError("spearman: need at least two points");
    return pearson(average_ranks(a), average_ranks(b));
}

double hamming_distance(const game::AttValObject& a, const game::AttValObject& b) {
    if (a.values.size() != b.values.size()) throw MetricsError("hamming: attribute count mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] != b.values[i]) d += 1.0;
    return d;
}

double levenshtein(std::span<const int> a, std::span<const int> b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[m]);
}

namespace {

double topsim_over_tokens(const corpus::Corpus& corpus, const std::vector<std::vector<int>>& tokens) {
    if (corpus.size() < 2) throw MetricsError("topsim: need at least two objects");
    std::vector<double> dx, dm;
    dx.reserve(corpus.size() * (corpus.size() - 1) / 2);
    dm.reserve(dx.capacity());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (std::size_t j = i + 1; j < corpus.size(); ++j) {
            dx.push_back(hamming_distance(corpus[i].object, corpus[j].object));
            dm.push_back(levenshtein(tokens[i], tokens[j]));
        }
    }
    return spearman(dx, dm);
}

}  // namespace

double topsim_character(const corpus::Corpus& corpus, bool strip_eos) {
    std::vector<std::vector<int>> tokens;
    tokens.reserve(corpus.size());
    for (const corpus::Entry& e : corpus) tokens.push_back(analysis_symbols(e.message, strip_eos));
    return topsim_over_tokens(corpus, tokens);
}

double topsim_word(const corpus::Corpus& corpus, const Segmentation& seg) {
    if (seg.segments.size() != corpus.size())
        throw MetricsError("topsim_word: segmentation does not match corpus");
    std::map<std::vector<int>, int> segment_ids;
    std::vector<std::vector<int>> tokens;
    tokens.reserve(corpus.size());
    for (const auto& msg_segments : seg.segments) {
        std::vector<int> t;
        t.reserve(msg_segments.size());
        for (const auto& chunk : msg_segments) {
            auto [it, inserted] = segment_ids.emplace(chunk, static_cast<int>(segment_ids.size()));
            t.push_back(it->second);
        }
        tokens.push_back(std::move(t));
    }
    return topsim_over_tokens(corpus, tokens);
}

ZlaCurve zla_curve(const corpus::Corpus& corpus, const std::vector<double>& object_probs,
                   int window) {
    if (object_probs.size() != corpus.size())
        throw MetricsError("zla_curve: probability vector does not match corpus");
    if (window < 1) throw MetricsError("zla_curve: window must be positive");
    if (static_cast<std::size_t>(window) > corpus.size())
        throw MetricsError("zla_curve: window exceeds series length");
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return object_probs[a] > object_probs[b]; });
    ZlaCurve out;
    out.lengths_by_rank.reserve(corpus.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        out.lengths_by_rank.push_back(static_cast<double>(corpus[order[r]].message.length()));

    const int half_lo = (window - 1) / 2;
    const int half_hi = window / 2;
    const int n = static_cast<int>(out.lengths_by_rank.size());
    out.smoothed.resize(n);
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half_lo);
        const int hi = std::min(n - 1, i + half_hi);
        double s = 0.0;
        for (int k = lo; k <= hi; ++k) s += out.lengths_by_rank[k];
        out.smoothed[i] = s / static_cast<double>(hi - lo + 1);
    }
    std::vector<double> ranks(out.lengths_by_rank.size());
    std::iota(ranks.begin(), ranks.end(), 1.0);
    out.spearman_rank_length = spearman(ranks, out.lengths_by_rank);
    return out;
}

MetricsReport compute_report(const corpus::Corpus& corpus, const MetricsOptions& options) {
    MetricsReport report;
    NGramOptions ngram_opts;
    ngram_opts.max_context = options.max_context;
    ngram_opts.strip_eos = options.strip_eos;
    ngram_opts.add_k = options.add_k;
    NGramModel model(corpus, ngram_opts);
    Segmentation seg = segment_corpus(corpus, model, options.threshold);
    CriteriaStats stats = criteria_stats(seg);
    report.n_bou = stats.n_bou;
    report.n_seg = stats.n_seg;
    try {
        report.c_topsim = topsim_character(corpus, options.strip_eos);
    } catch (const MetricsError&) {
        report.c_topsim.reset();
    }
    try {
        report.w_topsim = topsim_word(corpus, seg);
    } catch (const MetricsError&) {
        report.w_topsim.reset();
    }
    if (report.c_topsim && report.w_topsim) report.delta_wc = *report.w_topsim - *report.c_topsim;
    return report;
}

}  // namespace sigvae::metrics
