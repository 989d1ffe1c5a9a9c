#include "sigvae/objectives.hpp"

#include "sigvae/priors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sigvae::objectives {

const char* objective_kind_name(ObjectiveKind k) {
    switch (k) {
        case ObjectiveKind::conv: return "conv";
        case ObjectiveKind::conv_alpha: return "conv_alpha";
        case ObjectiveKind::elbo_alpha: return "elbo_alpha";
        case ObjectiveKind::ours: return "ours";
    }
    return "?";
}

ObjectiveKind objective_kind_from_name(const std::string& name) {
    if (name == "conv") return ObjectiveKind::conv;
    if (name == "conv_alpha") return ObjectiveKind::conv_alpha;
    if (name == "elbo_alpha") return ObjectiveKind::elbo_alpha;
    if (name == "ours") return ObjectiveKind::ours;
    throw std::invalid_argument("unknown objective kind: " + name);
}

void ObjectiveSpec::validate() const {
    if (uses_entropy_regularizer() && entropy_coeff < 0.0)
        throw std::invalid_argument("ObjectiveSpec: entropy_coeff must be non-negative");
    if (uses_alpha() && alpha < 0.0)
        throw std::invalid_argument("ObjectiveSpec: alpha must be non-negative");
    if (uses_beta() && beta.mode == BetaSchedule::Mode::rewo) {
        if (beta.kappa <= 0.0) throw std::invalid_argument("ObjectiveSpec: rewo kappa must be positive");
        if (beta.beta0 <= 0.0 || beta.beta0 > 1.0)
            throw std::invalid_argument("ObjectiveSpec: rewo beta0 must be in (0, 1]");
        if (beta.growth_rate <= 0.0) throw std::invalid_argument("ObjectiveSpec: rewo rate must be positive");
        if (beta.ema_decay <= 0.0 || beta.ema_decay >= 1.0)
            throw std::invalid_argument("ObjectiveSpec: rewo ema decay must be in (0, 1)");
    }
}

TrainState init_train_state(const ObjectiveSpec& spec) {
    TrainState s;
    if (!spec.uses_beta()) {
        s.beta = 1.0;
    } else if (spec.beta.mode == BetaSchedule::Mode::fixed) {
        s.beta = spec.beta.fixed_value;
    } else {
        s.beta = spec.beta.beta0;
    }
    return s;
}

void rewo_update(TrainState& state, const BetaSchedule& schedule, double batch_recon_error) {
    ++state.step;
    if (!state.recon_error_ema.has_value())
        state.recon_error_ema = batch_recon_error;
    else
        state.recon_error_ema = schedule.ema_decay * *state.recon_error_ema +
                                (1.0 - schedule.ema_decay) * batch_recon_error;
    if (schedule.mode != BetaSchedule::Mode::rewo) return;
    if (*state.recon_error_ema < schedule.kappa)
        state.beta = std::min(1.0, state.beta * (1.0 + schedule.growth_rate));
}

Var baseline_loss(Tape& tape, const std::vector<std::vector<double>>& returns,
                  const std::vector<Var>& baseline_step,
                  const std::vector<std::vector<double>>& step_mask) {
    if (returns.size() != baseline_step.size() || returns.size() != step_mask.size())
        throw std::invalid_argument("baseline_loss: step count mismatch");
    if (returns.empty()) return tape.constant_scalar(0.0);
    Var total;
    for (std::size_t t = 0; t < returns.size(); ++t) {
        Var target = tape.constant(Tensor::column(returns[t]));
        Var diff = tape.sub(target, baseline_step[t]);
        Var sq = tape.mul(tape.mul(diff, diff), tape.constant(Tensor::column(step_mask[t])));
        total = t == 0 ? sq : tape.add(total, sq);
    }
    return tape.reduce_mean(total);
}

namespace {

// C_t per row over scored steps: the reconstruction term plus, from step t
// onward, the beta-weighted prior-minus-sender log-probabilities (learnable
// and exponential priors) or the raw length penalty (conv_alpha).
std::vector<std::vector<double>> compute_returns(const ObjectiveSpec& spec, double beta,
                                                 const agents::BatchRollout& ro,
                                                 const agents::ReceiverPass& rp) {
    const std::size_t batch = ro.messages.size();
    const int steps = ro.scored_steps;
    std::vector<std::vector<double>> returns(steps, std::vector<double>(batch, 0.0));
    const Tensor& log_r = rp.log_r.value();

    for (std::size_t i = 0; i < batch; ++i) {
        const int len = ro.lengths[i];
        int scored = 0;
        for (int t = 0; t < steps; ++t)
            if (ro.step_mask[t][i] > 0.0) scored = t + 1;
        double suffix = 0.0;
        // the forced terminal eos is unscored but still carries the per-symbol
        // length penalty of the alpha objectives
        if (spec.uses_alpha() && len > scored) {
            const double penalty_per_symbol = -spec.alpha;
            const double w = spec.kind == ObjectiveKind::conv_alpha ? 1.0 : beta;
            suffix += w * penalty_per_symbol * static_cast<double>(len - scored);
        }
        for (int t = scored - 1; t >= 0; --t) {
            switch (spec.kind) {
                case ObjectiveKind::conv:
                    break;
                case ObjectiveKind::conv_alpha:
                    suffix += -spec.alpha;
                    break;
                case ObjectiveKind::elbo_alpha:
                    suffix += beta * (-spec.alpha - ro.step_log_prob[t].value().at(i, 0));
                    break;
                case ObjectiveKind::ours:
                    suffix += beta * (rp.prior_step_lp[t].value().at(i, 0) -
                                      ro.step_log_prob[t].value().at(i, 0));
                    break;
            }
            returns[t][i] = log_r.at(i, 0) + suffix;
        }
    }
    return returns;
}

}  // namespace

StepLosses build_step_losses(Tape& tape, const ObjectiveSpec& spec, double beta,
                             const game::GameConfig& cfg, const agents::BatchRollout& ro,
                             const agents::ReceiverPass& rp, const std::vector<Var>& baseline_step) {
    spec.validate();
    if (spec.uses_learnable_prior() && !rp.has_prior)
        throw std::invalid_argument("build_step_losses: objective 'ours' needs prior log-probs");
    if (spec.uses_learnable_prior() &&
        rp.prior_step_lp.size() != static_cast<std::size_t>(ro.scored_steps))
        throw std::invalid_argument("build_step_losses: prior step count mismatch");
    if (!baseline_step.empty() && baseline_step.size() != static_cast<std::size_t>(ro.scored_steps))
        throw std::invalid_argument("build_step_losses: baseline step count mismatch");

    const std::size_t batch = ro.messages.size();
    StepLosses out;
    out.returns = compute_returns(spec, beta, ro, rp);

    // pathwise terms
    Var j_rows = rp.log_r;  // [B,1]
    if (spec.uses_learnable_prior() && ro.scored_steps > 0) {
        Var prior_total;
        for (int t = 0; t < ro.scored_steps; ++t)
            prior_total = t == 0 ? rp.prior_step_lp[t] : tape.add(prior_total, rp.prior_step_lp[t]);
        j_rows = tape.add(j_rows, tape.affine(prior_total, beta, 0.0));
    }

    // score-function terms with detached advantages
    for (int t = 0; t < ro.scored_steps; ++t) {
        std::vector<double> coeff(batch, 0.0);
        for (std::size_t i = 0; i < batch; ++i) {
            if (ro.step_mask[t][i] == 0.0) continue;
            double b = 0.0;
            if (!baseline_step.empty()) b = baseline_step[t].value().at(i, 0);
            coeff[i] = out.returns[t][i] - b;
        }
        j_rows = tape.add(j_rows, tape.mul(ro.step_log_prob[t], tape.constant(Tensor::column(coeff))));
    }

    // entropy regularizer, averaged per step within each message
    if (spec.uses_entropy_regularizer() && spec.entropy_coeff > 0.0 && ro.scored_steps > 0) {
        for (int t = 0; t < ro.scored_steps; ++t) {
            std::vector<double> w(batch, 0.0);
            for (std::size_t i = 0; i < batch; ++i)
                if (ro.step_mask[t][i] > 0.0)
                    w[i] = spec.entropy_coeff / static_cast<double>(ro.lengths[i]);
            j_rows = tape.add(j_rows, tape.mul(ro.step_entropy[t], tape.constant(Tensor::column(w))));
        }
    }

    out.surrogate = tape.reduce_mean(j_rows);
    Var loss = tape.affine(out.surrogate, -1.0, 0.0);
    if (!baseline_step.empty()) {
        out.baseline_term = baseline_loss(tape, out.returns, baseline_step, ro.step_mask);
        loss = tape.add(loss, out.baseline_term);
    } else {
        out.baseline_term = tape.constant_scalar(0.0);
    }
    out.total_loss = loss;

    // diagnostics
    double recon = 0.0;
    for (std::size_t i = 0; i < batch; ++i) recon -= rp.log_r.value().at(i, 0);
    out.recon_error = recon / static_cast<double>(batch);
    double ent_sum = 0.0;
    std::size_t ent_n = 0;
    for (int t = 0; t < ro.scored_steps; ++t)
        for (std::size_t i = 0; i < batch; ++i)
            if (ro.step_mask[t][i] > 0.0) {
                ent_sum += ro.step_entropy[t].value().at(i, 0);
                ++ent_n;
            }
    out.mean_entropy = ent_n > 0 ? ent_sum / static_cast<double>(ent_n) : 0.0;
    (void)cfg;
    return out;
}

// ---- enumeration oracles ----

namespace {

struct EnumeratedSpace {
    std::vector<game::Message> messages;
    std::vector<game::AttValObject> object_rows;  // object replicated per message
};

EnumeratedSpace enumerate_rows(const game::GameConfig& cfg, const game::AttValObject& x) {
    EnumeratedSpace s;
    s.messages = game::enumerate_messages(cfg);
    s.object_rows.assign(s.messages.size(), x);
    return s;
}

}  // namespace

Var exact_objective(Tape& tape, const ObjectiveSpec& spec, double beta,
                    const agents::SenderBound& sb, const agents::ReceiverBound& rb,
                    const game::GameConfig& cfg, const std::vector<WeightedObject>& objects) {
    spec.validate();
    Var total;
    bool first = true;
    for (const WeightedObject& wo : objects) {
        EnumeratedSpace space = enumerate_rows(cfg, wo.object);
        Var log_s = agents::sender_teacher_forced(tape, sb, cfg, space.object_rows, space.messages);
        Var s_prob = tape.exp(log_s);
        agents::DropoutMasks masks = agents::identity_dropout_masks(
            space.messages.size(), rb.ln_e_gain.value().cols(), rb.ln_h_gain.value().cols());
        agents::ReceiverPass rp = receiver_pass(tape, rb, cfg, space.object_rows, space.messages,
                                                masks, spec.uses_learnable_prior());
        Var f = rp.log_r;
        switch (spec.kind) {
            case ObjectiveKind::conv:
                break;
            case ObjectiveKind::conv_alpha: {
                std::vector<double> pen(space.messages.size());
                for (std::size_t i = 0; i < space.messages.size(); ++i)
                    pen[i] = -spec.alpha * space.messages[i].length();
                f = tape.add(f, tape.constant(Tensor::column(pen)));
                break;
            }
            case ObjectiveKind::elbo_alpha: {
                const double log_z = std::log(priors::normalizer(cfg, spec.alpha));
                std::vector<double> lp(space.messages.size());
                for (std::size_t i = 0; i < space.messages.size(); ++i)
                    lp[i] = -spec.alpha * space.messages[i].length() - log_z;
                Var prior_minus_s = tape.sub(tape.constant(Tensor::column(lp)), log_s);
                f = tape.add(f, tape.affine(prior_minus_s, beta, 0.0));
                break;
            }
            case ObjectiveKind::ours: {
                Var prior_total;
                for (std::size_t t = 0; t < rp.prior_step_lp.size(); ++t)
                    prior_total = t == 0 ? rp.prior_step_lp[t] : tape.add(prior_total, rp.prior_step_lp[t]);
                if (rp.prior_step_lp.empty())
                    prior_total = tape.constant(Tensor::zeros(space.messages.size(), 1));
                f = tape.add(f, tape.affine(tape.sub(prior_total, log_s), beta, 0.0));
                break;
            }
        }
        Var j_x = tape.reduce_sum(tape.mul(s_prob, f));
        Var weighted = tape.affine(j_x, wo.prob, 0.0);
        total = first ? weighted : tape.add(total, weighted);
        first = false;
    }
    return total;
}

Var exact_expected_entropy(Tape& tape, const agents::SenderBound& sb, const game::GameConfig& cfg,
                           const std::vector<WeightedObject>& objects) {
    Var total;
    bool first = true;
    for (const WeightedObject& wo : objects) {
        EnumeratedSpace space = enumerate_rows(cfg, wo.object);
        Var log_s = agents::sender_teacher_forced(tape, sb, cfg, space.object_rows, space.messages);
        Var s_prob = tape.exp(log_s);
        Var h_x = tape.affine(tape.reduce_sum(tape.mul(s_prob, log_s)), -1.0, 0.0);
        Var weighted = tape.affine(h_x, wo.prob, 0.0);
        total = first ? weighted : tape.add(total, weighted);
        first = false;
    }
    return total;
}

Var exact_expected_log_joint(Tape& tape, const agents::SenderBound& sb,
                             const agents::ReceiverBound& rb, const game::GameConfig& cfg,
                             const std::vector<WeightedObject>& objects,
                             const std::vector<double>& log_prior_by_message) {
    Var total;
    bool first = true;
    for (const WeightedObject& wo : objects) {
        EnumeratedSpace space = enumerate_rows(cfg, wo.object);
        if (log_prior_by_message.size() != space.messages.size())
            throw std::invalid_argument("exact_expected_log_joint: prior vector length mismatch");
        Var log_s = agents::sender_teacher_forced(tape, sb, cfg, space.object_rows, space.messages);
        Var s_prob = tape.exp(log_s);
        agents::DropoutMasks masks = agents::identity_dropout_masks(
            space.messages.size(), rb.ln_e_gain.value().cols(), rb.ln_h_gain.value().cols());
        agents::ReceiverPass rp = receiver_pass(tape, rb, cfg, space.object_rows, space.messages,
                                                masks, false);
        Var f = tape.add(rp.log_r, tape.constant(Tensor::column(log_prior_by_message)));
        Var j_x = tape.reduce_sum(tape.mul(s_prob, f));
        Var weighted = tape.affine(j_x, wo.prob, 0.0);
        total = first ? weighted : tape.add(total, weighted);
        first = false;
    }
    return total;
}

Var exact_surprisal_form(Tape& tape, const agents::SenderBound& sb, const agents::ReceiverBound& rb,
                         const game::GameConfig& cfg, const std::vector<WeightedObject>& objects,
                         double beta) {
    Var total;
    bool first = true;
    for (const WeightedObject& wo : objects) {
        EnumeratedSpace space = enumerate_rows(cfg, wo.object);
        Var log_s = agents::sender_teacher_forced(tape, sb, cfg, space.object_rows, space.messages);
        Var s_prob = tape.exp(log_s);
        agents::DropoutMasks masks = agents::identity_dropout_masks(
            space.messages.size(), rb.ln_e_gain.value().cols(), rb.ln_h_gain.value().cols());
        agents::ReceiverPass rp = receiver_pass(tape, rb, cfg, space.object_rows, space.messages,
                                                masks, true);
        Var prior_total;
        for (std::size_t t = 0; t < rp.prior_step_lp.size(); ++t)
            prior_total = t == 0 ? rp.prior_step_lp[t] : tape.add(prior_total, rp.prior_step_lp[t]);
        if (rp.prior_step_lp.empty()) prior_total = tape.constant(Tensor::zeros(space.messages.size(), 1));
        // E[log R + beta log P_prior] + beta H(S)
        Var f = tape.add(rp.log_r, tape.affine(prior_total, beta, 0.0));
        Var e_term = tape.reduce_sum(tape.mul(s_prob, f));
        Var h_term = tape.affine(tape.reduce_sum(tape.mul(s_prob, log_s)), -beta, 0.0);
        Var weighted = tape.affine(tape.add(e_term, h_term), wo.prob, 0.0);
        total = first ? weighted : tape.add(total, weighted);
        first = false;
    }
    return total;
}

}  // namespace sigvae::objectives
