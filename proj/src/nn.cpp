#include "sigvae/nn.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sigvae::nn {

using json = nlohmann::json;

Tensor& ParamStore::add(const std::string& name, Tensor init) {
    if (contains(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
    index_[name] = names_.size();
    names_.push_back(name);
    tensors_.push_back(std::move(init));
    return tensors_.back();
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
    return tensors_[it->second];
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
    return tensors_[it->second];
}

std::size_t ParamStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.numel();
    return n;
}

ParamBinding::ParamBinding(Tape& tape, const ParamStore& store) : store_(&store) {
    vars_.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) vars_.push_back(tape.leaf(store.tensor(i)));
}

Var ParamBinding::operator[](const std::string& name) const {
    for (std::size_t i = 0; i < store_->size(); ++i)
        if (store_->name(i) == name) return vars_[i];
    throw std::out_of_range("ParamBinding: unknown parameter " + name);
}

std::vector<Tensor> collect_grads(const Tape& tape, const ParamBinding& binding) {
    std::vector<Tensor> out;
    out.reserve(binding.size());
    for (std::size_t i = 0; i < binding.size(); ++i) out.push_back(tape.grad(binding.by_index(i)));
    return out;
}

Tensor uniform_fan_in(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor t(rows, cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    for (double& v : t.data) v = rng.uniform(-bound, bound);
    return t;
}

Tensor gaussian_init(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor t(rows, cols);
    for (double& v : t.data) v = rng.gaussian();
    return t;
}

Var linear(Tape& tape, Var x, Var w, Var b) { return tape.add(tape.matmul(x, w), b); }

Var layer_norm(Tape& tape, Var x, Var gain, Var bias) {
    if (x.value().cols() != gain.value().cols() || x.value().cols() != bias.value().cols())
        throw ad::ShapeError("layer_norm: gain/bias width must match features " + x.value().shape_str());
    Var mean = tape.row_mean(x);                    // [B,1]
    Var centered = tape.sub(x, mean);               // column broadcast
    Var var = tape.row_mean(tape.mul(centered, centered));
    Var inv_std = tape.rsqrt(tape.affine(var, 1.0, kLayerNormEps));
    Var normed = tape.mul(centered, inv_std);       // column broadcast
    return tape.add(tape.mul(normed, gain), bias);  // row broadcasts
}

Var gru_cell(Tape& tape, Var input, Var hidden, const GruVars& g) {
    const auto& xi = input.value();
    const auto& hi = hidden.value();
    if (xi.rows() != hi.rows())
        throw ad::ShapeError("gru_cell: batch mismatch " + xi.shape_str() + " vs " + hi.shape_str());
    if (xi.cols() != g.w_xz.value().rows() || hi.cols() != g.w_hz.value().rows())
        throw ad::ShapeError("gru_cell: dims " + xi.shape_str() + " vs W_xz " + g.w_xz.value().shape_str());
    Var z = tape.sigmoid(tape.add(tape.add(tape.matmul(input, g.w_xz), tape.matmul(hidden, g.w_hz)), g.b_z));
    Var r = tape.sigmoid(tape.add(tape.add(tape.matmul(input, g.w_xr), tape.matmul(hidden, g.w_hr)), g.b_r));
    Var hn = tape.add(tape.matmul(hidden, g.w_hn), g.b_hn);
    Var n = tape.tanh(tape.add(tape.add(tape.matmul(input, g.w_xn), g.b_xn), tape.mul(r, hn)));
    Var one_minus_z = tape.affine(z, -1.0, 1.0);
    return tape.add(tape.mul(one_minus_z, n), tape.mul(z, hidden));
}

void add_gru_params(ParamStore& store, const std::string& prefix, std::size_t input_dim,
                    std::size_t hidden_dim, Rng& rng) {
    store.add(prefix + ".w_xz", uniform_fan_in(input_dim, hidden_dim, rng));
    store.add(prefix + ".w_hz", uniform_fan_in(hidden_dim, hidden_dim, rng));
    store.add(prefix + ".b_z", Tensor(1, hidden_dim));
    store.add(prefix + ".w_xr", uniform_fan_in(input_dim, hidden_dim, rng));
    store.add(prefix + ".w_hr", uniform_fan_in(hidden_dim, hidden_dim, rng));
    store.add(prefix + ".b_r", Tensor(1, hidden_dim));
    store.add(prefix + ".w_xn", uniform_fan_in(input_dim, hidden_dim, rng));
    store.add(prefix + ".b_xn", Tensor(1, hidden_dim));
    store.add(prefix + ".w_hn", uniform_fan_in(hidden_dim, hidden_dim, rng));
    store.add(prefix + ".b_hn", Tensor(1, hidden_dim));
}

GruVars bind_gru(const ParamBinding& binding, const std::string& prefix) {
    GruVars g;
    g.w_xz = binding[prefix + ".w_xz"];
    g.w_hz = binding[prefix + ".w_hz"];
    g.b_z = binding[prefix + ".b_z"];
    g.w_xr = binding[prefix + ".w_xr"];
    g.w_hr = binding[prefix + ".w_hr"];
    g.b_r = binding[prefix + ".b_r"];
    g.w_xn = binding[prefix + ".w_xn"];
    g.b_xn = binding[prefix + ".b_xn"];
    g.w_hn = binding[prefix + ".w_hn"];
    g.b_hn = binding[prefix + ".b_hn"];
    return g;
}

Tensor gaussian_dropout_mask(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
    if (scale < 0.0) throw std::invalid_argument("gaussian_dropout_mask: negative scale");
    Tensor mask(rows, cols, 1.0);
    if (scale == 0.0) return mask;
    for (double& v : mask.data) v = rng.gaussian(1.0, scale);
    return mask;
}

Adam::Adam(const ParamStore& store, AdamConfig cfg) : cfg_(cfg) {
    m_.reserve(store.size());
    v_.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        m_.emplace_back(store.tensor(i).rows(), store.tensor(i).cols());
        v_.emplace_back(store.tensor(i).rows(), store.tensor(i).cols());
    }
}

void Adam::step(ParamStore& store, const std::vector<Tensor>& grads) {
    if (grads.size() != store.size()) throw std::invalid_argument("Adam::step: gradient count mismatch");
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < store.size(); ++i) {
        Tensor& p = store.tensor(i);
        const Tensor& g = grads[i];
        if (!g.same_shape(p))
            throw std::invalid_argument("Adam::step: shape mismatch for " + store.name(i));
        if (!g.all_finite())
            throw std::runtime_error("Adam::step: non-finite gradient for " + store.name(i));
        for (std::size_t k = 0; k < p.data.size(); ++k) {
            const double gv = g.data[k];
            m_[i].data[k] = cfg_.beta1 * m_[i].data[k] + (1.0 - cfg_.beta1) * gv;
            v_[i].data[k] = cfg_.beta2 * v_[i].data[k] + (1.0 - cfg_.beta2) * gv * gv;
            const double mhat = m_[i].data[k] / bc1;
            const double vhat = v_[i].data[k] / bc2;
            p.data[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void save_checkpoint(const ParamStore& store, const std::string& path) {
    json header;
    header["version"] = "1";
    json tensors = json::object();
    std::uint64_t offset = 0;
    for (std::size_t i = 0; i < store.size(); ++i) {
        const Tensor& t = store.tensor(i);
        tensors[store.name(i)] = {{"shape", {t.rows(), t.cols()}}, {"offset", offset}};
        offset += t.numel() * sizeof(double);
    }
    header["tensors"] = tensors;
    const std::string head = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    std::uint64_t head_len = head.size();
    unsigned char len_bytes[8];
    for (int b = 0; b < 8; ++b) len_bytes[b] = static_cast<unsigned char>((head_len >> (8 * b)) & 0xff);
    out.write(reinterpret_cast<const char*>(len_bytes), 8);
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (std::size_t i = 0; i < store.size(); ++i) {
        const Tensor& t = store.tensor(i);
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

void load_checkpoint(ParamStore& store, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    unsigned char len_bytes[8];
    in.read(reinterpret_cast<char*>(len_bytes), 8);
    if (!in) throw std::runtime_error("load_checkpoint: truncated header length in " + path);
    std::uint64_t head_len = 0;
    for (int b = 0; b < 8; ++b) head_len |= static_cast<std::uint64_t>(len_bytes[b]) << (8 * b);
    std::string head(head_len, '\0');
    in.read(head.data(), static_cast<std::streamsize>(head_len));
    if (!in) throw std::runtime_error("load_checkpoint: truncated header in " + path);
    json header = json::parse(head);
    if (header.at("version").get<std::string>() != "1")
        throw std::runtime_error("load_checkpoint: unsupported version in " + path);
    const std::streampos data_start = in.tellg();
    for (std::size_t i = 0; i < store.size(); ++i) {
        const std::string& name = store.name(i);
        if (!header.at("tensors").contains(name))
            throw std::runtime_error("load_checkpoint: missing tensor " + name + " in " + path);
        const json& meta = header["tensors"][name];
        const auto shape = meta.at("shape").get<std::vector<std::size_t>>();
        Tensor& t = store.tensor(i);
        if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.cols())
            throw std::runtime_error("load_checkpoint: shape mismatch for " + name);
        in.seekg(data_start + static_cast<std::streamoff>(meta.at("offset").get<std::uint64_t>()));
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(double)));
        if (!in) throw std::runtime_error("load_checkpoint: truncated payload for " + name);
    }
}

}  // namespace sigvae::nn
