#include "sigvae/priors.hpp"

#include <cmath>
#include <stdexcept>

namespace sigvae::priors {

void AnalyticPrior::validate() const {
    config.validate();
    if (kind != PriorKind::uniform && alpha < 0.0)
        throw std::invalid_argument("AnalyticPrior: alpha must be non-negative");
    if (kind == PriorKind::monkey && alpha <= config.gamma())
        throw std::invalid_argument("AnalyticPrior: monkey model needs alpha > log(|A|-1)");
}

double normalizer(const game::GameConfig& cfg, double alpha) {
    cfg.validate();
    const double ea = std::exp(-alpha);
    const double q = static_cast<double>(cfg.alphabet_size - 1) * ea;  // per-length growth factor
    if (std::abs(1.0 - q) < 1e-6) {
        // Near the removable singularity sum the geometric series directly.
        double z = 0.0;
        double term = ea;
        for (int l = 1; l <= cfg.max_len; ++l) {
            z += term;
            term *= q;
        }
        return z;
    }
    return (1.0 - std::pow(q, cfg.max_len)) / (std::exp(alpha) - cfg.alphabet_size + 1.0);
}

double monkey_step_prob(const AnalyticPrior& prior, int symbol) {
    const double ea = std::exp(-prior.alpha);
    if (symbol == game::kEosId) return 1.0 - static_cast<double>(prior.config.alphabet_size - 1) * ea;
    return ea;
}

double log_prob(const AnalyticPrior& prior, const game::Message& m) {
    prior.validate();
    game::validate_message(prior.config, m);
    const double len = static_cast<double>(m.length());
    switch (prior.kind) {
        case PriorKind::uniform:
            return -std::log(static_cast<double>(game::message_space_size(prior.config)));
        case PriorKind::exponential:
            return -prior.alpha * len - std::log(normalizer(prior.config, prior.alpha));
        case PriorKind::monkey: {
            // (e^alpha - |A| + 1) * e^(-alpha |m|)
            const double coeff = std::exp(prior.alpha) - prior.config.alphabet_size + 1;
            return std::log(coeff) - prior.alpha * len;
        }
    }
    throw std::logic_error("log_prob: unknown prior kind");
}

std::vector<double> length_distribution(const AnalyticPrior& prior) {
    prior.validate();
    const game::GameConfig& cfg = prior.config;
    std::vector<double> out(static_cast<std::size_t>(cfg.max_len), 0.0);
    // (|A|-1)^(k-1) messages of length k.
    switch (prior.kind) {
        case PriorKind::uniform: {
            double count = 1.0;
            double total = 0.0;
            for (int k = 1; k <= cfg.max_len; ++k) {
                out[k - 1] = count;
                total += count;
                count *= cfg.alphabet_size - 1;
            }
            for (double& v : out) v /= total;
            break;
        }
        case PriorKind::exponential: {
            const double z = normalizer(cfg, prior.alpha);
            double count = 1.0;
            for (int k = 1; k <= cfg.max_len; ++k) {
                out[k - 1] = count * std::exp(-prior.alpha * k) / z;
                count *= cfg.alphabet_size - 1;
            }
            break;
        }
        case PriorKind::monkey: {
            // Geometric(p_eos) conditioned on K <= max_len.
            const double p_eos = monkey_step_prob(prior, game::kEosId);
            const double q = 1.0 - p_eos;
            double tail = 1.0;  // P(K >= k)
            double total = 0.0;
            for (int k = 1; k <= cfg.max_len; ++k) {
                out[k - 1] = tail * p_eos;
                total += out[k - 1];
                tail *= q;
            }
            for (double& v : out) v /= total;
            break;
        }
    }
    return out;
}

double expected_length(const AnalyticPrior& prior) {
    const std::vector<double> dist = length_distribution(prior);
    double e = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) e += static_cast<double>(k + 1) * dist[k];
    return e;
}

std::vector<double> monkey_limit_gap(const game::GameConfig& cfg, double alpha,
                                     const std::vector<int>& max_len_sweep) {
    if (alpha <= cfg.gamma())
        throw std::invalid_argument("monkey_limit_gap: alpha must exceed log(|A|-1)");
    std::vector<double> gaps;
    gaps.reserve(max_len_sweep.size());
    for (int L : max_len_sweep) {
        game::GameConfig c = cfg;
        c.max_len = L;
        AnalyticPrior exp_prior{PriorKind::exponential, alpha, c};
        AnalyticPrior monkey_prior{PriorKind::monkey, alpha, c};
        double gap = 0.0;
        for (const game::Message& m : game::enumerate_messages(c)) {
            const double diff = std::abs(std::exp(log_prob(exp_prior, m)) - std::exp(log_prob(monkey_prior, m)));
            gap = std::max(gap, diff);
        }
        gaps.push_back(gap);
    }
    return gaps;
}

}  // namespace sigvae::priors
