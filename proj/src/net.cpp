// Copyright (C) 2026 d2f authors
// SPDX-License-Identifier: Apache-2.0
//

#include "d2f/net.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace d2f {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

Mat silu(const Mat& z) {
    return z.unaryExpr([](double v) { return v * sigmoid(v); });
}

Mat silu_grad(const Mat& z) {
    return z.unaryExpr([](double v) {
        double s = sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
    });
}

}  // namespace

Vec TimeEmbedding::operator()(double t) const {
    int half = dim / 2;
    Vec out(dim);
    for (int i = 0; i < half; ++i) {
        double freq = std::exp(-std::log(max_period) * i / half);
        out[i] = std::sin(t * freq);
        out[half + i] = std::cos(t * freq);
    }
    return out;
}

ToyModel::ToyModel(int data_dim, const std::vector<int>& hidden, int embed_dim,
                   Parameterization p, std::uint64_t init_seed,
                   double max_period) {
    if (data_dim < 1) throw std::invalid_argument("net: data_dim must be >= 1");
    if (embed_dim < 2 || embed_dim % 2 != 0)
        throw std::invalid_argument("net: embed_dim must be even and >= 2");
    data_dim_ = data_dim;
    embed_ = TimeEmbedding{embed_dim, max_period};
    param_ = p;

    std::vector<int> widths;
    widths.push_back(data_dim + embed_dim);
    for (int h : hidden) {
        if (h < 1) throw std::invalid_argument("net: hidden width must be >= 1");
        widths.push_back(h);
    }
    widths.push_back(data_dim);

    Rng rng(init_seed, /*stream=*/0x6e6574);  // "net"
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        int in = widths[l], out = widths[l + 1];
        DenseLayer layer;
        layer.W.resize(out, in);
        double std_dev = std::sqrt(2.0 / in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) layer.W(r, c) = std_dev * rng.normal();
        layer.b = Vec::Zero(out);
        layers_.push_back(std::move(layer));
    }
}

Mat ToyModel::assemble_input(const Mat& x, const Vec& t) const {
    if (x.cols() != data_dim_)
        throw std::invalid_argument("net: input has wrong data dimension");
    if (x.rows() != t.size())
        throw std::invalid_argument("net: one time per sample required");
    Mat in(x.rows(), data_dim_ + embed_.dim);
    in.leftCols(data_dim_) = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        in.row(i).tail(embed_.dim) = embed_(t[i]).transpose();
    return in;
}

Vec ToyModel::forward(const Vec& x, double t) const {
    Mat xr(1, x.size());
    xr.row(0) = x.transpose();
    Vec ts(1);
    ts[0] = t;
    return forward(xr, ts).row(0).transpose();
}

Mat ToyModel::forward(const Mat& x, const Vec& t) const {
    ForwardCache scratch;
    return forward(x, t, scratch);
}

Mat ToyModel::forward(const Mat& x, const Vec& t, ForwardCache& cache) const {
    counter_.n.fetch_add(1, std::memory_order_relaxed);
    cache.inputs.clear();
    cache.z.clear();
    Mat h = assemble_input(x, t);
    const size_t L = layers_.size();
    for (size_t l = 0; l < L; ++l) {
        const DenseLayer& layer = layers_[l];
        cache.inputs.push_back(h);
        Mat z = h * layer.W.transpose();
        if (layer.lora) z += (h * layer.lora->A.transpose()) * layer.lora->B.transpose();
        z.rowwise() += layer.b.transpose();
        cache.z.push_back(z);
        h = (l + 1 < L) ? silu(z) : z;
    }
    cache.valid = true;
    return h;
}

Gradients ToyModel::backward(const Mat& dloss_dout,
                             const ForwardCache& cache) const {
    if (!cache.valid || cache.inputs.size() != layers_.size())
        throw std::invalid_argument("net: backward needs the matching forward cache");
    Gradients g;
    g.layers.resize(layers_.size());
    Mat delta = dloss_dout;
    for (size_t l = layers_.size(); l-- > 0;) {
        const DenseLayer& layer = layers_[l];
        const Mat& h = cache.inputs[l];
        LayerGrads& lg = g.layers[l];
        if (layer.lora) {
            lg.dB = delta.transpose() * (h * layer.lora->A.transpose());
            lg.dA = layer.lora->B.transpose() * delta.transpose() * h;
        }
        if (!lora_attached_) {
            lg.dW = delta.transpose() * h;
            lg.db = delta.colwise().sum().transpose();
        }
        if (l > 0) {
            Mat dh = delta * layer.effective_weight();
            delta = dh.cwiseProduct(silu_grad(cache.z[l - 1]));
        }
    }
    return g;
}

void ToyModel::attach_lora(int rank, Rng& rng) {
    if (lora_attached_) throw std::logic_error("net: adapters already attached");
    for (const DenseLayer& layer : layers_) {
        int cap = static_cast<int>(std::min(layer.W.rows(), layer.W.cols()));
        if (rank < 1 || rank > cap)
            throw std::invalid_argument("net: lora rank exceeds min(out, in)");
    }
    for (DenseLayer& layer : layers_) {
        LoraAdapter a;
        a.B = Mat::Zero(layer.W.rows(), rank);
        a.A.resize(rank, layer.W.cols());
        double std_dev = 1.0 / rank;
        for (int r = 0; r < a.A.rows(); ++r)
            for (int c = 0; c < a.A.cols(); ++c) a.A(r, c) = std_dev * rng.normal();
        layer.lora = std::move(a);
    }
    lora_attached_ = true;
}

void ToyModel::attach_lora_fraction(double fraction, Rng& rng) {
    if (lora_attached_) throw std::logic_error("net: adapters already attached");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("net: lora fraction must be in (0, 1]");
    for (DenseLayer& layer : layers_) {
        int cap = static_cast<int>(std::min(layer.W.rows(), layer.W.cols()));
        int rank = static_cast<int>(std::ceil(fraction * cap));
        LoraAdapter a;
        a.B = Mat::Zero(layer.W.rows(), rank);
        a.A.resize(rank, layer.W.cols());
        double std_dev = 1.0 / rank;
        for (int r = 0; r < a.A.rows(); ++r)
            for (int c = 0; c < a.A.cols(); ++c) a.A(r, c) = std_dev * rng.normal();
        layer.lora = std::move(a);
    }
    lora_attached_ = true;
}

void ToyModel::merge_lora() {
    if (!lora_attached_) throw std::logic_error("net: no adapters to merge");
    for (DenseLayer& layer : layers_) {
        if (layer.lora) {
            layer.W += layer.lora->B * layer.lora->A;
            layer.lora.reset();
        }
    }
    lora_attached_ = false;
}

std::size_t ToyModel::param_count() const {
    std::size_t n = 0;
    for (const DenseLayer& layer : layers_) {
        n += static_cast<std::size_t>(layer.W.size()) +
             static_cast<std::size_t>(layer.b.size());
        if (layer.lora)
            n += static_cast<std::size_t>(layer.lora->B.size()) +
                 static_cast<std::size_t>(layer.lora->A.size());
    }
    return n;
}

std::size_t ToyModel::trainable_count() const {
    if (!lora_attached_) return param_count();
    std::size_t n = 0;
    for (const DenseLayer& layer : layers_)
        if (layer.lora)
            n += static_cast<std::size_t>(layer.lora->B.size()) +
                 static_cast<std::size_t>(layer.lora->A.size());
    return n;
}

// ---------------------------------------------------------------------------
// Checkpoint format: "D2F1", version byte, manifest (param kind, dims,
// per-layer shapes and LoRA ranks), then the float64 arrays little-endian in
// manifest order. Round-trips bit-exactly.
// ---------------------------------------------------------------------------

namespace {

static_assert(sizeof(double) == 8, "checkpoint format requires 64-bit doubles");

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) |
           (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

void put_mat(std::ostream& os, const Mat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(os, m(r, c));
}

Mat get_mat(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get_f64(is);
    return m;
}

constexpr char kMagic[4] = {'D', '2', 'F', '1'};
constexpr unsigned char kVersion = 1;

}  // namespace

void ToyModel::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("net: cannot open checkpoint for writing: " + path);
    os.write(kMagic, 4);
    os.put(static_cast<char>(kVersion));
    os.put(static_cast<char>(param_));
    put_u32(os, static_cast<std::uint32_t>(data_dim_));
    put_u32(os, static_cast<std::uint32_t>(embed_.dim));
    put_f64(os, embed_.max_period);
    put_u32(os, static_cast<std::uint32_t>(layers_.size()));
    for (const DenseLayer& layer : layers_) {
        put_u32(os, static_cast<std::uint32_t>(layer.W.rows()));
        put_u32(os, static_cast<std::uint32_t>(layer.W.cols()));
        put_u32(os, layer.lora ? static_cast<std::uint32_t>(layer.lora->rank()) : 0u);
    }
    for (const DenseLayer& layer : layers_) {
        put_mat(os, layer.W);
        for (Eigen::Index i = 0; i < layer.b.size(); ++i) put_f64(os, layer.b[i]);
        if (layer.lora) {
            put_mat(os, layer.lora->B);
            put_mat(os, layer.lora->A);
        }
    }
    if (!os) throw std::runtime_error("net: checkpoint write failed: " + path);
}

ToyModel ToyModel::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("net: cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("net: not a d2f checkpoint: " + path);
    int version = is.get();
    if (version != kVersion)
        throw std::runtime_error("net: unsupported checkpoint version");
    int kind = is.get();
    if (kind < 0 || kind > 3)
        throw std::runtime_error("net: bad parameterization kind in checkpoint");

    ToyModel m;
    m.param_ = static_cast<Parameterization>(kind);
    m.data_dim_ = static_cast<int>(get_u32(is));
    int embed_dim = static_cast<int>(get_u32(is));
    double max_period = get_f64(is);
    m.embed_ = TimeEmbedding{embed_dim, max_period};
    std::uint32_t n_layers = get_u32(is);
    std::vector<std::array<std::uint32_t, 3>> shapes;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        std::uint32_t out = get_u32(is), in = get_u32(is), rank = get_u32(is);
        shapes.push_back({out, in, rank});
    }
    if (!is) throw std::runtime_error("net: truncated checkpoint manifest");
    for (auto [out, in, rank] : shapes) {
        DenseLayer layer;
        layer.W = get_mat(is, out, in);
        layer.b.resize(out);
        for (std::uint32_t i = 0; i < out; ++i) layer.b[i] = get_f64(is);
        if (rank > 0) {
            LoraAdapter a;
            a.B = get_mat(is, out, rank);
            a.A = get_mat(is, rank, in);
            layer.lora = std::move(a);
            m.lora_attached_ = true;
        }
        m.layers_.push_back(std::move(layer));
    }
    if (!is) throw std::runtime_error("net: truncated checkpoint arrays");
    if (m.layers_.empty() ||
        m.layers_.front().W.cols() != m.data_dim_ + m.embed_.dim ||
        m.layers_.back().W.rows() != m.data_dim_)
        throw std::runtime_error("net: checkpoint shape manifest is inconsistent");
    return m;
}

}  // namespace d2f
