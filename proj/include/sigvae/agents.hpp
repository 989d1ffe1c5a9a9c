// Sender, receiver, and baseline networks.
//
// Both agents are layer-normalized GRUs over symbol embeddings. The sender
// encodes an object as the initial hidden state (summed per-attribute
// embeddings) and reads next-symbol logits from each normalized hidden state.
// The receiver starts from a zero hidden state, consumes bos followed by the
// message, applies Gaussian dropout with time-fixed masks, and exposes two
// readouts over the shared GRU: a next-symbol head that defines the learnable
// prior language model, and per-attribute object heads over the state after
// the final symbol. The baseline is a small MLP over the detached sender
// state. Messages that hit the length cap take their terminal eos with
// probability one, so sender and prior are proper distributions over the
// bounded message space.
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "sigvae/game.hpp"
#include "sigvae/nn.hpp"

namespace sigvae::agents {

using ad::Tape;
using ad::Tensor;
using ad::Var;

struct ModelSizes {
    int hidden = 64;
    int embedding = 16;
    int baseline_hidden = 32;
    double dropout_scale = 0.001;  // receiver only
};

class Sender {
public:
    Sender(const game::GameConfig& cfg, const ModelSizes& sizes, Rng& init_rng);

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    const game::GameConfig& config() const { return cfg_; }
    const ModelSizes& sizes() const { return sizes_; }

private:
    game::GameConfig cfg_;
    ModelSizes sizes_;
    nn::ParamStore params_;
};

class Receiver {
public:
    Receiver(const game::GameConfig& cfg, const ModelSizes& sizes, Rng& init_rng);

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    const game::GameConfig& config() const { return cfg_; }
    const ModelSizes& sizes() const { return sizes_; }

private:
    game::GameConfig cfg_;
    ModelSizes sizes_;
    nn::ParamStore params_;
};

class Baseline {
public:
    Baseline(const ModelSizes& sizes, Rng& init_rng);

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }

private:
    nn::ParamStore params_;
};

// ---- tape-side (training) interface ----

struct SenderBound {
    nn::ParamBinding binding;
    std::vector<Var> obj_emb;
    Var bos, sym_emb;
    nn::GruVars gru;
    Var head_w, head_b;
    Var ln_e_gain, ln_e_bias, ln_h_gain, ln_h_bias;
};
SenderBound bind_sender(Tape& tape, const Sender& s);

struct ReceiverBound {
    nn::ParamBinding binding;
    Var bos, sym_emb;
    nn::GruVars gru;
    Var head_w, head_b;                  // prior language-model head
    std::vector<Var> obj_head_w, obj_head_b;
    Var ln_e_gain, ln_e_bias, ln_h_gain, ln_h_bias;
};
ReceiverBound bind_receiver(Tape& tape, const Receiver& r);

struct BaselineBound {
    nn::ParamBinding binding;
    Var w1, b1, w2, b2;
};
BaselineBound bind_baseline(Tape& tape, const Baseline& b);

enum class DecodeMode { sample, greedy };

// Batched autoregressive rollout. Step t is "scored" for a row when its
// symbol was actually sampled from the policy, i.e. t <= min(len, max_len-1);
// the forced eos of a capped message is never scored.
struct BatchRollout {
    std::vector<game::Message> messages;
    std::vector<int> lengths;
    int scored_steps = 0;                    // steps with recorded vars
    std::vector<Var> step_log_prob;          // per step, [B,1], unmasked values
    std::vector<Var> step_entropy;           // per step, [B,1], unmasked values
    std::vector<Var> step_hidden_ln;         // per step, [B,H], pre-logits state
    std::vector<std::vector<double>> step_mask;  // [t][row] 1.0 when scored

    double mean_length() const;
};

BatchRollout sender_rollout(Tape& tape, const SenderBound& sb, const game::GameConfig& cfg,
                            std::span<const game::AttValObject> objects, DecodeMode mode, Rng* rng);

// Per-row total log S(m|x) over scored steps for given (object, message)
// rows; backbone of the enumeration oracles.
Var sender_teacher_forced(Tape& tape, const SenderBound& sb, const game::GameConfig& cfg,
                          std::span<const game::AttValObject> objects,
                          std::span<const game::Message> messages);

struct DropoutMasks {
    Tensor emb;     // [B, embedding]
    Tensor hidden;  // [B, hidden]
};
DropoutMasks sample_dropout_masks(std::size_t batch, const ModelSizes& sizes, Rng& rng);
DropoutMasks identity_dropout_masks(std::size_t batch, const ModelSizes& sizes);
DropoutMasks identity_dropout_masks(std::size_t batch, std::size_t emb_dim, std::size_t hidden_dim);

struct ReceiverPass {
    Var log_r;                        // [B,1] log R(x|m), summed over attributes
    std::vector<Var> prior_step_lp;   // per scored step, [B,1], already masked
    std::vector<Var> obj_log_softmax; // per attribute, [B,n_val]
    bool has_prior = false;
};

// Consumes bos + every message symbol, gathers the prior log-probabilities of
// scored steps when want_prior, and scores the true object from the state
// after the final symbol.
ReceiverPass receiver_pass(Tape& tape, const ReceiverBound& rb, const game::GameConfig& cfg,
                           std::span<const game::AttValObject> objects,
                           std::span<const game::Message> messages, const DropoutMasks& masks,
                           bool want_prior);

// Baseline values from a detached sender state; gradients reach only the
// baseline parameters.
Var baseline_values(Tape& tape, const BaselineBound& bb, Var sender_hidden_ln);

// ---- single-instance operations ----

// Next-symbol distribution given an object and a message prefix (no eos
// allowed inside the prefix).
std::vector<double> sender_step(const Sender& s, const game::AttValObject& x,
                                std::span<const int> prefix);

// Teacher-forced log S(m|x) as a tape scalar, for gradient checks and
// enumeration oracles.
Var sender_log_prob(Tape& tape, const SenderBound& sb, const game::GameConfig& cfg,
                    const game::AttValObject& x, const game::Message& m);

double receiver_logprob_object(const Receiver& r, const game::Message& m,
                               const game::AttValObject& x, const DropoutMasks& masks);
double prior_logprob(const Receiver& r, const game::Message& m, const DropoutMasks& masks);

// ---- evaluation-side (no tape) ----

// Incremental sender policy over plain arrays; used for greedy decoding and
// teacher-forcing checks.
std::unique_ptr<game::Policy> make_sender_policy(const Sender& s, const game::AttValObject& x);

// Receiver's argmax object guess for a message (dropout disabled).
game::AttValObject receiver_guess(const Receiver& r, const game::Message& m);

struct LanguagePair {
    game::AttValObject object;
    game::Message message;
};

// Greedy message for every object in the space, in lexicographic order.
std::vector<LanguagePair> dump_language(const Sender& s);

// Fraction of objects whose greedy message the receiver decodes exactly.
double exact_match_accuracy(const Sender& s, const Receiver& r);

}  // namespace sigvae::agents
