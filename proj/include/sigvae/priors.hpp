// Analytic prior message distributions: uniform over the message space,
// exponential-in-length with normalizer Z_alpha, and the monkey-typing
// unigram model that the exponential prior approaches as max_len grows.
#pragma once

#include <vector>

#include "sigvae/game.hpp"

namespace sigvae::priors {

enum class PriorKind { uniform, exponential, monkey };

struct AnalyticPrior {
    PriorKind kind = PriorKind::uniform;
    double alpha = 0.0;  // used by exponential and monkey
    game::GameConfig config;

    void validate() const;
};

// Sum over the message space of exp(-alpha * |m|). Uses the closed form
// (1 - ((|A|-1) e^-alpha)^L) / (e^alpha - |A| + 1) away from the removable
// singularity e^alpha = |A|-1, and the analytic limit near it.
double normalizer(const game::GameConfig& cfg, double alpha);

// Exact normalized log-probability of a valid message under the prior.
// Monkey requires alpha > log(|A|-1) and is defined without a length cap.
double log_prob(const AnalyticPrior& prior, const game::Message& m);

// Per-step symbol probabilities of the monkey model: eos with probability
// 1 - (|A|-1) e^-alpha, every other symbol with e^-alpha.
double monkey_step_prob(const AnalyticPrior& prior, int symbol);

// P(K = k) for k = 1..max_len. Uniform and exponential are exact pushforwards
// of the prior; monkey is the geometric law conditioned on K <= max_len.
std::vector<double> length_distribution(const AnalyticPrior& prior);

double expected_length(const AnalyticPrior& prior);

// Sup-norm distance between the exponential prior and the monkey model over
// the message space at each max_len in the sweep. alpha must exceed gamma.
std::vector<double> monkey_limit_gap(const game::GameConfig& cfg, double alpha,
                                     const std::vector<int>& max_len_sweep);

}  // namespace sigvae::priors
