#include "sigvae/agents.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sigvae::agents {

namespace {

using EigenMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const EigenMat>;
using RowVec = Eigen::RowVectorXd;

ConstMatMap as_mat(const Tensor& t) { return ConstMatMap(t.data.data(), t.rows(), t.cols()); }

void add_ln_params(nn::ParamStore& p, const std::string& prefix, int dim) {
    p.add(prefix + ".gain", Tensor(1, dim, 1.0));
    p.add(prefix + ".bias", Tensor(1, dim, 0.0));
}

}  // namespace

Sender::Sender(const game::GameConfig& cfg, const ModelSizes& sizes, Rng& init_rng)
    : cfg_(cfg), sizes_(sizes) {
    cfg.validate();
    for (int a = 0; a < cfg.n_att; ++a)
        params_.add("obj_emb." + std::to_string(a), nn::uniform_fan_in(cfg.n_val, sizes.hidden, init_rng));
    params_.add("bos", nn::gaussian_init(1, sizes.embedding, init_rng));
    params_.add("sym_emb", nn::uniform_fan_in(cfg.alphabet_size, sizes.embedding, init_rng));
    nn::add_gru_params(params_, "gru", sizes.embedding, sizes.hidden, init_rng);
    params_.add("head.w", nn::uniform_fan_in(sizes.hidden, cfg.alphabet_size, init_rng));
    params_.add("head.b", Tensor(1, cfg.alphabet_size));
    add_ln_params(params_, "ln_e", sizes.embedding);
    add_ln_params(params_, "ln_h", sizes.hidden);
}

Receiver::Receiver(const game::GameConfig& cfg, const ModelSizes& sizes, Rng& init_rng)
    : cfg_(cfg), sizes_(sizes) {
    cfg.validate();
    params_.add("bos", nn::gaussian_init(1, sizes.embedding, init_rng));
    params_.add("sym_emb", nn::uniform_fan_in(cfg.alphabet_size, sizes.embedding, init_rng));
    nn::add_gru_params(params_, "gru", sizes.embedding, sizes.hidden, init_rng);
    params_.add("head.w", nn::uniform_fan_in(sizes.hidden, cfg.alphabet_size, init_rng));
    params_.add("head.b", Tensor(1, cfg.alphabet_size));
    for (int a = 0; a < cfg.n_att; ++a) {
        params_.add("obj_head." + std::to_string(a) + ".w",
                    nn::uniform_fan_in(sizes.hidden, cfg.n_val, init_rng));
        params_.add("obj_head." + std::to_string(a) + ".b", Tensor(1, cfg.n_val));
    }
    add_ln_params(params_, "ln_e", sizes.embedding);
    add_ln_params(params_, "ln_h", sizes.hidden);
}

Baseline::Baseline(const ModelSizes& sizes, Rng& init_rng) {
    params_.add("fc1.w", nn::uniform_fan_in(sizes.hidden, sizes.baseline_hidden, init_rng));
    params_.add("fc1.b", Tensor(1, sizes.baseline_hidden));
    params_.add("fc2.w", nn::uniform_fan_in(sizes.baseline_hidden, 1, init_rng));
    params_.add("fc2.b", Tensor(1, 1));
}

SenderBound bind_sender(Tape& tape, const Sender& s) {
    SenderBound b{nn::ParamBinding(tape, s.params()), {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
    for (int a = 0; a < s.config().n_att; ++a) b.obj_emb.push_back(b.binding["obj_emb." + std::to_string(a)]);
    b.bos = b.binding["bos"];
    b.sym_emb = b.binding["sym_emb"];
    b.gru = nn::bind_gru(b.binding, "gru");
    b.head_w = b.binding["head.w"];
    b.head_b = b.binding["head.b"];
    b.ln_e_gain = b.binding["ln_e.gain"];
    b.ln_e_bias = b.binding["ln_e.bias"];
    b.ln_h_gain = b.binding["ln_h.gain"];
    b.ln_h_bias = b.binding["ln_h.bias"];
    return b;
}

ReceiverBound bind_receiver(Tape& tape, const Receiver& r) {
    ReceiverBound b{nn::ParamBinding(tape, r.params()), {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
    b.bos = b.binding["bos"];
    b.sym_emb = b.binding["sym_emb"];
    b.gru = nn::bind_gru(b.binding, "gru");
    b.head_w = b.binding["head.w"];
    b.head_b = b.binding["head.b"];
    for (int a = 0; a < r.config().n_att; ++a) {
        b.obj_head_w.push_back(b.binding["obj_head." + std::to_string(a) + ".w"]);
        b.obj_head_b.push_back(b.binding["obj_head." + std::to_string(a) + ".b"]);
    }
    b.ln_e_gain = b.binding["ln_e.gain"];
    b.ln_e_bias = b.binding["ln_e.bias"];
    b.ln_h_gain = b.binding["ln_h.gain"];
    b.ln_h_bias = b.binding["ln_h.bias"];
    return b;
}

BaselineBound bind_baseline(Tape& tape, const Baseline& bl) {
    BaselineBound b{nn::ParamBinding(tape, bl.params()), {}, {}, {}, {}};
    b.w1 = b.binding["fc1.w"];
    b.b1 = b.binding["fc1.b"];
    b.w2 = b.binding["fc2.w"];
    b.b2 = b.binding["fc2.b"];
    return b;
}

namespace {

// Replicates a [1,D] row over B rows.
Var broadcast_row(Tape& tape, Var row, std::size_t batch) {
    return tape.add(tape.constant(Tensor::zeros(batch, row.value().cols())), row);
}

Var sender_initial_hidden(Tape& tape, const SenderBound& sb, const game::GameConfig& cfg,
                          std::span<const game::AttValObject> objects) {
    std::vector<int> ids(objects.size());
    Var h;
    for (int a = 0; a < cfg.n_att; ++a) {
        for (std::size_t i = 0; i < objects.size(); ++i) ids[i] = objects[i].values[a] - 1;
        Var e = tape.take_rows(sb.obj_emb[a], ids);
        h = a == 0 ? e : tape.add(h, e);
    }
    return h;
}

struct StepOut {
    Var hidden_ln;   // state feeding this step's logits
    Var log_probs;   // [B,|A|] log-softmax
};

// One sender decode step: embed the previous symbol (bos at t=1), LayerNorm,
// GRU, LayerNorm, logits.
StepOut sender_decode_step(Tape& tape, const SenderBound& sb, int t, Var prev_hidden_ln,
                           const std::vector<int>& prev_symbols, std::size_t batch) {
    Var e = t == 1 ? broadcast_row(tape, sb.bos, batch) : tape.take_rows(sb.sym_emb, prev_symbols);
    Var eln = nn::layer_norm(tape, e, sb.ln_e_gain, sb.ln_e_bias);
    Var h = nn::gru_cell(tape, eln, prev_hidden_ln, sb.gru);
    Var hln = nn::layer_norm(tape, h, sb.ln_h_gain, sb.ln_h_bias);
    Var logits = nn::linear(tape, hln, sb.head_w, sb.head_b);
    return {hln, tape.log_softmax(logits)};
}

}  // namespace

double BatchRollout::mean_length() const {
    if (lengths.empty()) return 0.0;
    double s = 0.0;
    for (int l : lengths) s += l;
    return s / static_cast<double>(lengths.size());
}

BatchRollout sender_rollout(Tape& tape, const SenderBound& sb, const game::GameConfig& cfg,
                            std::span<const game::AttValObject> objects, DecodeMode mode, Rng* rng) {
    if (mode == DecodeMode::sample && rng == nullptr)
        throw std::invalid_argument("sender_rollout: sampling needs an rng");
    const std::size_t batch = objects.size();
    BatchRollout ro;
    ro.messages.resize(batch);
    ro.lengths.assign(batch, 0);

    Var hln = nn::layer_norm(tape, sender_initial_hidden(tape, sb, cfg, objects), sb.ln_h_gain,
                             sb.ln_h_bias);
    std::vector<int> prev_symbols(batch, 0);
    std::vector<char> alive(batch, 1);
    std::size_t n_alive = batch;

    for (int t = 1; t <= cfg.max_len - 1 && n_alive > 0; ++t) {
        StepOut step = sender_decode_step(tape, sb, t, hln, prev_symbols, batch);
        hln = step.hidden_ln;
        Var probs = tape.exp(step.log_probs);
        Var ent = tape.affine(tape.row_sum(tape.mul(probs, step.log_probs)), -1.0, 0.0);

        const Tensor& pvals = probs.value();
        std::vector<int> symbols(batch, game::kEosId);
        std::vector<double> mask(batch, 0.0);
        for (std::size_t i = 0; i < batch; ++i) {
            if (!alive[i]) continue;
            int sym;
            if (mode == DecodeMode::sample) {
                std::vector<double> row(pvals.data.begin() + i * pvals.cols(),
                                        pvals.data.begin() + (i + 1) * pvals.cols());
                sym = static_cast<int>(rng->categorical(row));
            } else {
                sym = 0;
                for (int a = 1; a < cfg.alphabet_size; ++a)
                    if (pvals.at(i, a) > pvals.at(i, sym)) sym = a;
            }
            symbols[i] = sym;
            mask[i] = 1.0;
            ro.messages[i].symbols.push_back(sym);
            if (sym == game::kEosId) {
                alive[i] = 0;
                ro.lengths[i] = t;
                --n_alive;
            }
            prev_symbols[i] = sym;
        }
        ro.step_log_prob.push_back(tape.select_cols(step.log_probs, symbols));
        ro.step_entropy.push_back(ent);
        ro.step_hidden_ln.push_back(step.hidden_ln);
        ro.step_mask.push_back(std::move(mask));
        ++ro.scored_steps;
    }
    // Rows that never emitted eos take it at the cap with probability one.
    for (std::size_t i = 0; i < batch; ++i) {
        if (!alive[i]) continue;
        ro.messages[i].symbols.push_back(game::kEosId);
        ro.lengths[i] = cfg.max_len;
    }
    return ro;
}

Var sender_teacher_forced(Tape& tape, const SenderBound& sb, const game::GameConfig& cfg,
                          std::span<const game::AttValObject> objects,
                          std::span<const game::Message> messages) {
    const std::size_t batch = objects.size();
    if (messages.size() != batch)
        throw std::invalid_argument("sender_teacher_forced: object/message count mismatch");
    int max_scored = 0;
    for (const auto& m : messages)
        max_scored = std::max(max_scored, std::min(m.length(), cfg.max_len - 1));

    Var hln = nn::layer_norm(tape, sender_initial_hidden(tape, sb, cfg, objects), sb.ln_h_gain,
                             sb.ln_h_bias);
    std::vector<int> prev_symbols(batch, 0);
    Var total;
    for (int t = 1; t <= max_scored; ++t) {
        StepOut step = sender_decode_step(tape, sb, t, hln, prev_symbols, batch);
        hln = step.hidden_ln;
        std::vector<int> symbols(batch, game::kEosId);
        std::vector<double> mask(batch, 0.0);
        for (std::size_t i = 0; i < batch; ++i) {
            const int scored = std::min(messages[i].length(), cfg.max_len - 1);
            if (t <= scored) {
                symbols[i] = messages[i].symbols[t - 1];
                mask[i] = 1.0;
            }
            prev_symbols[i] = symbols[i];
        }
        Var lp = tape.mul(tape.select_cols(step.log_probs, symbols),
                          tape.constant(Tensor::column(mask)));
        total = t == 1 ? lp : tape.add(total, lp);
    }
    if (max_scored == 0) total = tape.constant(Tensor::zeros(batch, 1));
    return total;
}

Var sender_log_prob(Tape& tape, const SenderBound& sb, const game::GameConfig& cfg,
                    const game::AttValObject& x, const game::Message& m) {
    game::validate_message(cfg, m);
    const game::AttValObject objs[1] = {x};
    const game::Message msgs[1] = {m};
    return tape.reduce_sum(sender_teacher_forced(tape, sb, cfg, objs, msgs));
}

DropoutMasks sample_dropout_masks(std::size_t batch, const ModelSizes& sizes, Rng& rng) {
    return {nn::gaussian_dropout_mask(batch, sizes.embedding, sizes.dropout_scale, rng),
            nn::gaussian_dropout_mask(batch, sizes.hidden, sizes.dropout_scale, rng)};
}

DropoutMasks identity_dropout_masks(std::size_t batch, const ModelSizes& sizes) {
    return {Tensor(batch, sizes.embedding, 1.0), Tensor(batch, sizes.hidden, 1.0)};
}

DropoutMasks identity_dropout_masks(std::size_t batch, std::size_t emb_dim, std::size_t hidden_dim) {
    return {Tensor(batch, emb_dim, 1.0), Tensor(batch, hidden_dim, 1.0)};
}

ReceiverPass receiver_pass(Tape& tape, const ReceiverBound& rb, const game::GameConfig& cfg,
                           std::span<const game::AttValObject> objects,
                           std::span<const game::Message> messages, const DropoutMasks& masks,
                           bool want_prior) {
    const std::size_t batch = objects.size();
    if (messages.size() != batch)
        throw std::invalid_argument("receiver_pass: object/message count mismatch");
    int max_len = 0;
    for (const auto& m : messages) max_len = std::max(max_len, m.length());

    Var d_e = tape.constant(masks.emb);
    Var d_h = tape.constant(masks.hidden);
    const std::size_t hidden = masks.hidden.cols();
    Var hln = nn::layer_norm(tape, tape.mul(tape.constant(Tensor::zeros(batch, hidden)), d_h),
                             rb.ln_h_gain, rb.ln_h_bias);
    Var final_h = tape.constant(Tensor::zeros(batch, hidden));

    ReceiverPass out;
    out.has_prior = want_prior;
    std::vector<int> prev_symbols(batch, 0);
    // Step j consumes input j (bos at j=1, symbol m_{j-1} otherwise); the
    // resulting state predicts symbol m_j and, once past a row's eos, scores
    // that row's object.
    const int total_steps = max_len + 1;
    for (int j = 1; j <= total_steps; ++j) {
        Var e = j == 1 ? broadcast_row(tape, rb.bos, batch) : tape.take_rows(rb.sym_emb, prev_symbols);
        Var eln = nn::layer_norm(tape, tape.mul(e, d_e), rb.ln_e_gain, rb.ln_e_bias);
        Var h = nn::gru_cell(tape, eln, hln, rb.gru);
        hln = nn::layer_norm(tape, tape.mul(h, d_h), rb.ln_h_gain, rb.ln_h_bias);

        if (want_prior) {
            std::vector<int> target(batch, game::kEosId);
            std::vector<double> mask(batch, 0.0);
            bool any = false;
            for (std::size_t i = 0; i < batch; ++i) {
                const int scored = std::min(messages[i].length(), cfg.max_len - 1);
                if (j <= scored) {
                    target[i] = messages[i].symbols[j - 1];
                    mask[i] = 1.0;
                    any = true;
                }
            }
            if (any) {
                Var lsm = tape.log_softmax(nn::linear(tape, hln, rb.head_w, rb.head_b));
                Var lp = tape.mul(tape.select_cols(lsm, target), tape.constant(Tensor::column(mask)));
                out.prior_step_lp.push_back(lp);
            }
        }

        std::vector<double> sel(batch, 0.0);
        bool any_final = false;
        for (std::size_t i = 0; i < batch; ++i) {
            if (messages[i].length() + 1 == j) {
                sel[i] = 1.0;
                any_final = true;
            }
        }
        if (any_final)
            final_h = tape.add(final_h, tape.mul(hln, tape.constant(Tensor::column(sel))));

        for (std::size_t i = 0; i < batch; ++i) {
            const int idx = j - 1;  // symbol consumed at step j+1
            prev_symbols[i] = idx < messages[i].length() ? messages[i].symbols[idx] : 0;
        }
    }

    std::vector<int> ids(batch);
    for (int a = 0; a < cfg.n_att; ++a) {
        Var lsm = tape.log_softmax(nn::linear(tape, final_h, rb.obj_head_w[a], rb.obj_head_b[a]));
        out.obj_log_softmax.push_back(lsm);
        for (std::size_t i = 0; i < batch; ++i) ids[i] = objects[i].values[a] - 1;
        Var lp = tape.select_cols(lsm, ids);
        out.log_r = a == 0 ? lp : tape.add(out.log_r, lp);
    }
    return out;
}

Var baseline_values(Tape& tape, const BaselineBound& bb, Var sender_hidden_ln) {
    Var h1 = tape.leaky_relu(nn::linear(tape, sender_hidden_ln, bb.w1, bb.b1), 0.01);
    return nn::linear(tape, h1, bb.w2, bb.b2);
}

// ---- single-instance and evaluation-side paths ----

namespace {

RowVec eval_layer_norm(const RowVec& x, const Tensor& gain, const Tensor& bias) {
    const double mean = x.sum() / static_cast<double>(x.size());
    RowVec c = x.array() - mean;
    const double var = c.array().square().sum() / static_cast<double>(x.size());
    const double inv = 1.0 / std::sqrt(var + nn::kLayerNormEps);
    RowVec out = c * inv;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out[i] = out[i] * gain.data[static_cast<std::size_t>(i)] + bias.data[static_cast<std::size_t>(i)];
    return out;
}

struct EvalGru {
    ConstMatMap w_xz, w_hz, b_z, w_xr, w_hr, b_r, w_xn, b_xn, w_hn, b_hn;

    explicit EvalGru(const nn::ParamStore& p, const std::string& prefix)
        : w_xz(as_mat(p.at(prefix + ".w_xz"))),
          w_hz(as_mat(p.at(prefix + ".w_hz"))),
          b_z(as_mat(p.at(prefix + ".b_z"))),
          w_xr(as_mat(p.at(prefix + ".w_xr"))),
          w_hr(as_mat(p.at(prefix + ".w_hr"))),
          b_r(as_mat(p.at(prefix + ".b_r"))),
          w_xn(as_mat(p.at(prefix + ".w_xn"))),
          b_xn(as_mat(p.at(prefix + ".b_xn"))),
          w_hn(as_mat(p.at(prefix + ".w_hn"))),
          b_hn(as_mat(p.at(prefix + ".b_hn"))) {}

    RowVec step(const RowVec& x, const RowVec& h) const {
        const RowVec z = (((x * w_xz + h * w_hz) + b_z).array().unaryExpr(
            [](double v) { return 1.0 / (1.0 + std::exp(-v)); }));
        const RowVec r = (((x * w_xr + h * w_hr) + b_r).array().unaryExpr(
            [](double v) { return 1.0 / (1.0 + std::exp(-v)); }));
        const RowVec hn = (h * w_hn + b_hn);
        const RowVec n = (((x * w_xn + b_xn).array() + r.array() * hn.array()).tanh());
        return ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
    }
};

std::vector<double> softmax_row(const RowVec& logits) {
    double mx = logits.maxCoeff();
    std::vector<double> p(static_cast<std::size_t>(logits.size()));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        p[static_cast<std::size_t>(i)] = std::exp(logits[i] - mx);
        sum += p[static_cast<std::size_t>(i)];
    }
    for (double& v : p) v /= sum;
    return p;
}

class SenderEvalPolicy : public game::Policy {
public:
    SenderEvalPolicy(const Sender& s, game::AttValObject x)
        : model_(&s), x_(std::move(x)), gru_(s.params(), "gru") {
        game::validate_object(s.config(), x_);
    }

    void reset() override {
        const nn::ParamStore& p = model_->params();
        const ModelSizes& sz = model_->sizes();
        RowVec h = RowVec::Zero(sz.hidden);
        for (int a = 0; a < model_->config().n_att; ++a) {
            const Tensor& table = p.at("obj_emb." + std::to_string(a));
            const int row = x_.values[a] - 1;
            h += as_mat(table).row(row);
        }
        hln_ = eval_layer_norm(h, p.at("ln_h.gain"), p.at("ln_h.bias"));
        step_input_bos_();
    }

    std::vector<double> next_probs() override {
        const nn::ParamStore& p = model_->params();
        RowVec logits = hln_ * as_mat(p.at("head.w")) + as_mat(p.at("head.b"));
        return softmax_row(logits);
    }

    void advance(int symbol) override {
        if (symbol == game::kEosId) throw std::invalid_argument("SenderEvalPolicy: cannot advance past eos");
        const nn::ParamStore& p = model_->params();
        RowVec e = as_mat(p.at("sym_emb")).row(symbol);
        consume_(e);
    }

private:
    void step_input_bos_() {
        const nn::ParamStore& p = model_->params();
        RowVec e = as_mat(p.at("bos")).row(0);
        consume_(e);
    }
    void consume_(const RowVec& e) {
        const nn::ParamStore& p = model_->params();
        RowVec eln = eval_layer_norm(e, p.at("ln_e.gain"), p.at("ln_e.bias"));
        RowVec h = gru_.step(eln, hln_);
        hln_ = eval_layer_norm(h, p.at("ln_h.gain"), p.at("ln_h.bias"));
    }

    const Sender* model_;
    game::AttValObject x_;
    EvalGru gru_;
    RowVec hln_;
};

}  // namespace

std::vector<double> sender_step(const Sender& s, const game::AttValObject& x,
                                std::span<const int> prefix) {
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (prefix[i] == game::kEosId)
            throw std::invalid_argument("sender_step: prefix contains eos");
    SenderEvalPolicy policy(s, x);
    policy.reset();
    for (int sym : prefix) policy.advance(sym);
    return policy.next_probs();
}

std::unique_ptr<game::Policy> make_sender_policy(const Sender& s, const game::AttValObject& x) {
    return std::make_unique<SenderEvalPolicy>(s, x);
}

double receiver_logprob_object(const Receiver& r, const game::Message& m,
                               const game::AttValObject& x, const DropoutMasks& masks) {
    Tape tape;
    ReceiverBound rb = bind_receiver(tape, r);
    const game::AttValObject objs[1] = {x};
    const game::Message msgs[1] = {m};
    ReceiverPass pass = receiver_pass(tape, rb, r.config(), objs, msgs, masks, false);
    return pass.log_r.value().scalar_value();
}

double prior_logprob(const Receiver& r, const game::Message& m, const DropoutMasks& masks) {
    Tape tape;
    ReceiverBound rb = bind_receiver(tape, r);
    const game::AttValObject objs[1] = {game::object_from_index(r.config(), 0)};
    const game::Message msgs[1] = {m};
    ReceiverPass pass = receiver_pass(tape, rb, r.config(), objs, msgs, masks, true);
    double lp = 0.0;
    for (const Var& v : pass.prior_step_lp) lp += v.value().scalar_value();
    return lp;
}

game::AttValObject receiver_guess(const Receiver& r, const game::Message& m) {
    Tape tape;
    ReceiverBound rb = bind_receiver(tape, r);
    const game::AttValObject objs[1] = {game::object_from_index(r.config(), 0)};
    const game::Message msgs[1] = {m};
    DropoutMasks masks = identity_dropout_masks(1, r.sizes());
    ReceiverPass pass = receiver_pass(tape, rb, r.config(), objs, msgs, masks, false);
    game::AttValObject guess;
    for (int a = 0; a < r.config().n_att; ++a) {
        const Tensor& lsm = pass.obj_log_softmax[a].value();
        int best = 0;
        for (int v = 1; v < r.config().n_val; ++v)
            if (lsm.at(0, v) > lsm.at(0, best)) best = v;
        guess.values.push_back(best + 1);
    }
    return guess;
}

std::vector<LanguagePair> dump_language(const Sender& s) {
    const game::GameConfig& cfg = s.config();
    std::vector<LanguagePair> out;
    const std::int64_t n = cfg.object_space_size();
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        game::AttValObject x = game::object_from_index(cfg, i);
        auto policy = make_sender_policy(s, x);
        out.push_back({x, game::rollout_greedy(*policy, cfg)});
    }
    return out;
}

double exact_match_accuracy(const Sender& s, const Receiver& r) {
    const std::vector<LanguagePair> lang = dump_language(s);
    std::vector<game::AttValObject> objects;
    std::vector<game::Message> messages;
    objects.reserve(lang.size());
    messages.reserve(lang.size());
    for (const auto& pair : lang) {
        objects.push_back(pair.object);
        messages.push_back(pair.message);
    }
    Tape tape;
    ReceiverBound rb = bind_receiver(tape, r);
    DropoutMasks masks = identity_dropout_masks(objects.size(), r.sizes());
    ReceiverPass pass = receiver_pass(tape, rb, r.config(), objects, messages, masks, false);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        bool all = true;
        for (int a = 0; a < r.config().n_att; ++a) {
            const Tensor& lsm = pass.obj_log_softmax[a].value();
            int best = 0;
            for (int v = 1; v < r.config().n_val; ++v)
                if (lsm.at(i, v) > lsm.at(i, best)) best = v;
            if (best + 1 != objects[i].values[a]) {
                all = false;
                break;
            }
        }
        if (all) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(objects.size());
}

}  // namespace sigvae::agents
