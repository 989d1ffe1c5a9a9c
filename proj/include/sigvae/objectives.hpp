// Game objectives and their estimators: the conventional REINFORCE objective
// (with optional length penalty and entropy regularizer), the ELBO with an
// analytic exponential prior, and the ELBO with the receiver's learnable
// prior; plus per-step returns, the baseline regression loss, constrained
// beta annealing, and exact enumeration counterparts for small spaces.
#pragma once

#include <optional>
#include <vector>

#include "sigvae/agents.hpp"
#include "sigvae/game.hpp"

namespace sigvae::objectives {

using ad::Tape;
using ad::Tensor;
using ad::Var;

enum class ObjectiveKind { conv, conv_alpha, elbo_alpha, ours };

const char* objective_kind_name(ObjectiveKind k);
ObjectiveKind objective_kind_from_name(const std::string& name);

struct BetaSchedule {
    enum class Mode { fixed, rewo };
    Mode mode = Mode::fixed;
    double fixed_value = 1.0;
    // rewo: grow beta geometrically while the reconstruction-error EMA stays
    // under the constraint.
    double kappa = 0.3;
    double beta0 = 1e-3;
    double growth_rate = 0.01;
    double ema_decay = 0.99;
};

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::ours;
    double entropy_coeff = 1.0;  // lambda, conv kinds only
    double alpha = 0.0;          // length-pressure, alpha kinds only
    BetaSchedule beta;           // elbo_alpha and ours

    bool uses_entropy_regularizer() const {
        return kind == ObjectiveKind::conv || kind == ObjectiveKind::conv_alpha;
    }
    bool uses_alpha() const {
        return kind == ObjectiveKind::conv_alpha || kind == ObjectiveKind::elbo_alpha;
    }
    bool uses_learnable_prior() const { return kind == ObjectiveKind::ours; }
    bool uses_beta() const { return kind == ObjectiveKind::elbo_alpha || kind == ObjectiveKind::ours; }
    void validate() const;
};

struct TrainState {
    double beta = 1.0;
    std::optional<double> recon_error_ema;  // set on the first update
    std::int64_t step = 0;
};

TrainState init_train_state(const ObjectiveSpec& spec);

// One annealing update: fold the batch reconstruction error (-log R mean)
// into the EMA, then grow beta geometrically (capped at 1) while the EMA is
// below kappa. beta never decreases.
void rewo_update(TrainState& state, const BetaSchedule& schedule, double batch_recon_error);

// Sum-of-squares regression of per-step baseline values onto the (constant)
// returns; gradients reach only the baseline parameters.
Var baseline_loss(Tape& tape, const std::vector<std::vector<double>>& returns,
                  const std::vector<Var>& baseline_step,
                  const std::vector<std::vector<double>>& step_mask);

struct StepLosses {
    Var total_loss;     // scalar to minimize: -surrogate + baseline loss
    Var surrogate;      // scalar, maximization form
    Var baseline_term;  // scalar (zero when no baseline is used)
    std::vector<std::vector<double>> returns;  // [step][row], scored steps only
    double recon_error = 0.0;                  // batch mean of -log R
    double mean_entropy = 0.0;                 // mean per-step policy entropy
};

// Assembles the surrogate whose gradient is the Monte Carlo estimator:
// pathwise reconstruction (and, for the learnable prior, beta-weighted prior
// log-likelihood) plus score-function terms weighted by the detached
// advantage C_t - B_t. Analytic-prior and length-penalty variants reshape the
// returns; conv kinds add the per-message-averaged entropy regularizer.
StepLosses build_step_losses(Tape& tape, const ObjectiveSpec& spec, double beta,
                             const game::GameConfig& cfg, const agents::BatchRollout& rollout,
                             const agents::ReceiverPass& receiver,
                             const std::vector<Var>& baseline_step);

// ---- exact enumeration oracles (guarded small spaces) ----

struct WeightedObject {
    game::AttValObject object;
    double prob = 1.0;
};

// Exact objective value as a tape scalar: expectation over the enumerated
// message space under the teacher-forced sender, so backward() yields the
// exact parameter gradient.
Var exact_objective(Tape& tape, const ObjectiveSpec& spec, double beta,
                    const agents::SenderBound& sb, const agents::ReceiverBound& rb,
                    const game::GameConfig& cfg, const std::vector<WeightedObject>& objects);

// Exact E_x[ H(S(M|x)) ] over the enumerated space.
Var exact_expected_entropy(Tape& tape, const agents::SenderBound& sb, const game::GameConfig& cfg,
                           const std::vector<WeightedObject>& objects);

// Exact E[ log R(x|m) + log_prior(m) ] with a fixed per-message log-prior.
Var exact_expected_log_joint(Tape& tape, const agents::SenderBound& sb,
                             const agents::ReceiverBound& rb, const game::GameConfig& cfg,
                             const std::vector<WeightedObject>& objects,
                             const std::vector<double>& log_prior_by_message);

// Exact E[ log R + beta log P_prior ] + beta E[H(S)]; the surprisal form of
// the learnable-prior objective.
Var exact_surprisal_form(Tape& tape, const agents::SenderBound& sb, const agents::ReceiverBound& rb,
                         const game::GameConfig& cfg, const std::vector<WeightedObject>& objects,
                         double beta);

}  // namespace sigvae::objectives
