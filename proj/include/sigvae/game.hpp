// Object and message spaces for the signaling game: attribute-value objects,
// eos-terminated messages of bounded length, object distributions, policy
// rollouts (sampled and greedy), and exhaustive message enumeration.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sigvae/rng.hpp"

namespace sigvae::game {

inline constexpr int kEosId = 0;

struct GameConfig {
    int n_att = 2;
    int n_val = 8;
    int alphabet_size = 5;  // includes eos; must be >= 3
    int max_len = 8;        // L_max, counts the terminal eos

    void validate() const;
    // log(|A|-1); growth rate of the per-length message count.
    double gamma() const;
    std::int64_t object_space_size() const;
};

// Tuple of n_att values, each in [1, n_val].
struct AttValObject {
    std::vector<int> values;

    bool operator==(const AttValObject& o) const { return values == o.values; }
};

void validate_object(const GameConfig& cfg, const AttValObject& x);

// Lexicographic index <-> object, value 1 first.
AttValObject object_from_index(const GameConfig& cfg, std::int64_t index);
std::int64_t object_to_index(const GameConfig& cfg, const AttValObject& x);

// Symbol sequence whose last element (and only that one) is eos.
struct Message {
    std::vector<int> symbols;

    int length() const { return static_cast<int>(symbols.size()); }
    bool operator==(const Message& o) const { return symbols == o.symbols; }
};

bool message_valid(const GameConfig& cfg, const Message& m);
void validate_message(const GameConfig& cfg, const Message& m);

enum class ObjectDistKind { uniform, power_law };

// Distribution over the object space by lexicographic index; power_law puts
// P(index i) proportional to 1/(i+1).
class ObjectDistribution {
public:
    ObjectDistribution(const GameConfig& cfg, ObjectDistKind kind);

    AttValObject sample(Rng& rng) const;
    double prob(std::int64_t index) const { return probs_[index]; }
    std::int64_t support_size() const { return static_cast<std::int64_t>(probs_.size()); }
    ObjectDistKind kind() const { return kind_; }

private:
    GameConfig cfg_;
    ObjectDistKind kind_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

// Incremental next-symbol policy; the observed object, if any, is bound at
// construction by the implementation.
class Policy {
public:
    virtual ~Policy() = default;
    virtual void reset() = 0;
    // Distribution over the alphabet for the next symbol.
    virtual std::vector<double> next_probs() = 0;
    virtual void advance(int symbol) = 0;
};

struct RolloutSample {
    Message message;
    // One entry per symbol emitted before the cap; a message that hits
    // max_len gets its final eos by forcing, which contributes log-prob 0 and
    // entropy 0 and is not listed here.
    std::vector<double> step_log_probs;
    std::vector<double> step_entropies;
    bool forced_eos = false;

    double total_log_prob() const;
};

// Autoregressive sampling; stops at a sampled eos or forces eos at max_len.
RolloutSample rollout_sample(Policy& policy, const GameConfig& cfg, Rng& rng);

// Argmax decoding with ties broken toward the smallest symbol id.
Message rollout_greedy(Policy& policy, const GameConfig& cfg);

// Log-probability of m under the policy's truncated process (the forced
// terminal step of a full-length message contributes zero).
double teacher_forced_log_prob(Policy& policy, const GameConfig& cfg, const Message& m);

// All valid messages, shortest first, lexicographic within a length.
// Guarded: throws if the space exceeds 10^6 messages.
std::vector<Message> enumerate_messages(const GameConfig& cfg);
std::int64_t message_space_size(const GameConfig& cfg);

}  // namespace sigvae::game
