#include "sigvae/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sigvae::game {

void GameConfig::validate() const {
    if (n_att < 1) throw std::invalid_argument("GameConfig: n_att must be positive");
    if (n_val < 1) throw std::invalid_argument("GameConfig: n_val must be positive");
    if (alphabet_size < 3)
        throw std::invalid_argument("GameConfig: alphabet must have at least 2 symbols besides eos");
    if (alphabet_size > 255) throw std::invalid_argument("GameConfig: alphabet_size must fit a byte");
    if (max_len < 1) throw std::invalid_argument("GameConfig: max_len must be positive");
}

double GameConfig::gamma() const { return std::log(static_cast<double>(alphabet_size - 1)); }

std::int64_t GameConfig::object_space_size() const {
    std::int64_t n = 1;
    for (int i = 0; i < n_att; ++i) {
        if (n > (1LL << 40) / n_val) throw std::overflow_error("GameConfig: object space too large");
        n *= n_val;
    }
    return n;
}

void validate_object(const GameConfig& cfg, const AttValObject& x) {
    if (static_cast<int>(x.values.size()) != cfg.n_att)
        throw std::invalid_argument("AttValObject: expected " + std::to_string(cfg.n_att) + " attributes");
    for (int v : x.values)
        if (v < 1 || v > cfg.n_val)
            throw std::invalid_argument("AttValObject: value " + std::to_string(v) + " out of range");
}

AttValObject object_from_index(const GameConfig& cfg, std::int64_t index) {
    if (index < 0 || index >= cfg.object_space_size())
        throw std::out_of_range("object_from_index: " + std::to_string(index));
    AttValObject x;
    x.values.assign(cfg.n_att, 1);
    for (int a = cfg.n_att - 1; a >= 0; --a) {
        x.values[a] = static_cast<int>(index % cfg.n_val) + 1;
        index /= cfg.n_val;
    }
    return x;
}

std::int64_t object_to_index(const GameConfig& cfg, const AttValObject& x) {
    validate_object(cfg, x);
    std::int64_t idx = 0;
    for (int a = 0; a < cfg.n_att; ++a) idx = idx * cfg.n_val + (x.values[a] - 1);
    return idx;
}

bool message_valid(const GameConfig& cfg, const Message& m) {
    const int len = m.length();
    if (len < 1 || len > cfg.max_len) return false;
    for (int i = 0; i < len - 1; ++i)
        if (m.symbols[i] == kEosId || m.symbols[i] < 0 || m.symbols[i] >= cfg.alphabet_size) return false;
    return m.symbols[len - 1] == kEosId;
}

void validate_message(const GameConfig& cfg, const Message& m) {
    if (!message_valid(cfg, m)) throw std::invalid_argument("Message: invalid for this game config");
}

ObjectDistribution::ObjectDistribution(const GameConfig& cfg, ObjectDistKind kind)
    : cfg_(cfg), kind_(kind) {
    const std::int64_t n = cfg.object_space_size();
    if (n > 10'000'000) throw std::invalid_argument("ObjectDistribution: support too large to tabulate");
    probs_.resize(static_cast<std::size_t>(n));
    double total = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double w = kind == ObjectDistKind::uniform ? 1.0 : 1.0 / static_cast<double>(i + 1);
        probs_[static_cast<std::size_t>(i)] = w;
        total += w;
    }
    cdf_.resize(probs_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        probs_[i] /= total;
        acc += probs_[i];
        cdf_[i] = acc;
    }
    cdf_.back() = 1.0;
}

AttValObject ObjectDistribution::sample(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::int64_t idx = it == cdf_.end() ? static_cast<std::int64_t>(cdf_.size()) - 1
                                              : static_cast<std::int64_t>(it - cdf_.begin());
    return object_from_index(cfg_, idx);
}

namespace {

void check_probs(const std::vector<double>& p, const GameConfig& cfg) {
    if (static_cast<int>(p.size()) != cfg.alphabet_size)
        throw std::invalid_argument("Policy: distribution size != alphabet size");
}

double entropy_nats(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

}  // namespace

double RolloutSample::total_log_prob() const {
    double s = 0.0;
    for (double lp : step_log_probs) s += lp;
    return s;
}

RolloutSample rollout_sample(Policy& policy, const GameConfig& cfg, Rng& rng) {
    policy.reset();
    RolloutSample out;
    for (int t = 1; t <= cfg.max_len; ++t) {
        if (t == cfg.max_len) {
            // Cap reached: eos is emitted with probability one.
            out.message.symbols.push_back(kEosId);
            out.forced_eos = true;
            break;
        }
        std::vector<double> p = policy.next_probs();
        check_probs(p, cfg);
        const int symbol = static_cast<int>(rng.categorical(p));
        out.message.symbols.push_back(symbol);
        out.step_log_probs.push_back(std::log(p[symbol]));
        out.step_entropies.push_back(entropy_nats(p));
        if (symbol == kEosId) break;
        policy.advance(symbol);
    }
    return out;
}

Message rollout_greedy(Policy& policy, const GameConfig& cfg) {
    policy.reset();
    Message m;
    for (int t = 1; t <= cfg.max_len; ++t) {
        if (t == cfg.max_len) {
            m.symbols.push_back(kEosId);
            break;
        }
        std::vector<double> p = policy.next_probs();
        check_probs(p, cfg);
        int best = 0;
        for (int a = 1; a < cfg.alphabet_size; ++a)
            if (p[a] > p[best]) best = a;  // ties keep the smaller id
        m.symbols.push_back(best);
        if (best == kEosId) break;
        policy.advance(best);
    }
    return m;
}

double teacher_forced_log_prob(Policy& policy, const GameConfig& cfg, const Message& m) {
    validate_message(cfg, m);
    policy.reset();
    double lp = 0.0;
    const int scored_steps = std::min(m.length(), cfg.max_len - 1);
    for (int t = 0; t < scored_steps; ++t) {
        std::vector<double> p = policy.next_probs();
        check_probs(p, cfg);
        lp += std::log(p[m.symbols[t]]);
        if (t + 1 < scored_steps) policy.advance(m.symbols[t]);
    }
    return lp;
}

std::int64_t message_space_size(const GameConfig& cfg) {
    // sum over l of (|A|-1)^(l-1), capped to avoid overflow
    std::int64_t count = 0;
    double per_len = 1.0;
    for (int l = 1; l <= cfg.max_len; ++l) {
        if (per_len > 2e18) return std::numeric_limits<std::int64_t>::max();
        count += static_cast<std::int64_t>(per_len);
        per_len *= cfg.alphabet_size - 1;
        if (count < 0) return std::numeric_limits<std::int64_t>::max();
    }
    return count;
}

std::vector<Message> enumerate_messages(const GameConfig& cfg) {
    const std::int64_t total = message_space_size(cfg);
    if (total > 1'000'000)
        throw std::invalid_argument("enumerate_messages: space has " + std::to_string(total) +
                                    " messages, guard is 1e6");
    std::vector<Message> out;
    out.reserve(static_cast<std::size_t>(total));
    std::vector<int> prefix;
    // Depth-first by length: emit the eos-terminated message for each prefix
    // of non-eos symbols.
    struct Walker {
        const GameConfig& cfg;
        std::vector<Message>& out;
        std::vector<int> prefix;
        void walk() {
            Message m;
            m.symbols = prefix;
            m.symbols.push_back(kEosId);
            out.push_back(std::move(m));
            if (static_cast<int>(prefix.size()) + 1 >= cfg.max_len) return;
            for (int a = 1; a < cfg.alphabet_size; ++a) {
                prefix.push_back(a);
                walk();
                prefix.pop_back();
            }
        }
    } walker{cfg, out, {}};
    walker.walk();
    std::stable_sort(out.begin(), out.end(), [](const Message& a, const Message& b) {
        if (a.length() != b.length()) return a.length() < b.length();
        return a.symbols < b.symbols;
    });
    return out;
}

}  // namespace sigvae::game
