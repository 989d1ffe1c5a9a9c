// Neural building blocks on top of the tape: named parameter storage, the
// layers used by the agents (embedding lookup, linear, LayerNorm, GRU cell,
// Gaussian dropout with time-fixed masks), Adam, and checkpoint IO.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sigvae/rng.hpp"
#include "sigvae/tape.hpp"

namespace sigvae::nn {

using ad::Tape;
using ad::Tensor;
using ad::Var;

// Insertion-ordered named tensors; iteration order is deterministic.
class ParamStore {
public:
    Tensor& add(const std::string& name, Tensor init);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_[i]; }
    Tensor& tensor(std::size_t i) { return tensors_[i]; }
    const Tensor& tensor(std::size_t i) const { return tensors_[i]; }

    std::size_t total_elements() const;

private:
    std::vector<std::string> names_;
    std::vector<Tensor> tensors_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Leaves for every parameter of a store on one tape, queryable by name.
class ParamBinding {
public:
    ParamBinding(Tape& tape, const ParamStore& store);
    Var operator[](const std::string& name) const;
    Var by_index(std::size_t i) const { return vars_[i]; }
    std::size_t size() const { return vars_.size(); }

private:
    const ParamStore* store_;
    std::vector<Var> vars_;
};

// Gradients pulled out of a tape after backward(), aligned with a store.
std::vector<Tensor> collect_grads(const Tape& tape, const ParamBinding& binding);

// Initializers. Matrices draw uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) with
// fan_in = rows (tables and weight matrices are applied as x * W).
Tensor uniform_fan_in(std::size_t rows, std::size_t cols, Rng& rng);
Tensor gaussian_init(std::size_t rows, std::size_t cols, Rng& rng);

// x * W + b with x:[B,in], W:[in,out], b:[1,out].
Var linear(Tape& tape, Var x, Var w, Var b);

// Row-wise LayerNorm with epsilon 1e-5; gain and bias are [1,D].
Var layer_norm(Tape& tape, Var x, Var gain, Var bias);
inline constexpr double kLayerNormEps = 1e-5;

// Gate parameter set for one GRU cell.
struct GruVars {
    Var w_xz, w_hz, b_z;
    Var w_xr, w_hr, b_r;
    Var w_xn, b_xn, w_hn, b_hn;
};

// Standard GRU update: z and r gates, candidate n with reset-gated hidden
// contribution, new hidden (1-z)*n + z*h.
Var gru_cell(Tape& tape, Var input, Var hidden, const GruVars& g);

// Registers the ten GRU tensors under `prefix.` in the store.
void add_gru_params(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                    std::size_t hidden_dim, Rng& rng);
GruVars bind_gru(const ParamBinding& binding, const std::string& prefix);

// Multiplicative mask with entries ~ Normal(1, scale^2), sampled once per
// rollout and reused at every timestep. scale 0 gives the identity mask.
Tensor gaussian_dropout_mask(std::size_t rows, std::size_t cols, double scale, Rng& rng);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(const ParamStore& store, AdamConfig cfg);

    // One bias-corrected update; throws naming the parameter on a non-finite
    // gradient. grads must be aligned with the store.
    void step(ParamStore& store, const std::vector<Tensor>& grads);

    std::int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::int64_t step_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

// Flat named-tensor checkpoint: 8-byte little-endian header length, JSON
// header {"version":"1","tensors":{name:{"shape":[r,c],"offset":bytes}}},
// then contiguous float64 payload.
void save_checkpoint(const ParamStore& store, const std::string& path);
void load_checkpoint(ParamStore& store, const std::string& path);

}  // namespace sigvae::nn
