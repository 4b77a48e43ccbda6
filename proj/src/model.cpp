#include "fourierfed/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

namespace fourierfed {
namespace {

constexpr double kProbFloor = 1e-12;

std::string weight_key(const LayerSpec& l) { return l.name + ".weight"; }
std::string bias_key(const LayerSpec& l) { return l.name + ".bias"; }

const Tensor& param(const NamedTensorMap& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) throw Error(ErrorCode::kInvalidShape, "missing parameter '" + key + "'");
    return it->second;
}

void check_params(const NamedTensorMap& params, const ModelSpec& spec) {
    std::size_t expected = 0;
    for (const auto& l : spec.layers) {
        std::vector<std::size_t> w_shape;
        std::size_t b_len = 0;
        if (l.kind == LayerKind::kDense) {
            w_shape = {l.out_features, l.in_features};
            b_len = l.out_features;
        } else if (l.kind == LayerKind::kConv2d) {
            w_shape = {l.out_channels, l.in_channels, l.kernel_h, l.kernel_w};
            b_len = l.out_channels;
        } else {
            continue;
        }
        expected += 2;
        if (param(params, weight_key(l)).shape != w_shape) {
            throw Error(ErrorCode::kInvalidShape, "parameter '" + weight_key(l) + "' has the wrong shape");
        }
        if (param(params, bias_key(l)).shape != std::vector<std::size_t>{b_len}) {
            throw Error(ErrorCode::kInvalidShape, "parameter '" + bias_key(l) + "' has the wrong shape");
        }
    }
    if (params.size() != expected) {
        throw Error(ErrorCode::kInvalidShape, "parameter map has unexpected entries");
    }
}

// Valid (no padding) stride-1 convolution, single sample.
void conv_forward(const double* in, std::size_t C, std::size_t H, std::size_t W, const Tensor& w, const Tensor& b,
                  double* out) {
    const std::size_t N = w.shape[0], KH = w.shape[2], KW = w.shape[3];
    const std::size_t OH = H - KH + 1, OW = W - KW + 1;
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t i = 0; i < OH; ++i) {
            for (std::size_t j = 0; j < OW; ++j) {
                double acc = b.data[n];
                for (std::size_t c = 0; c < C; ++c)
                    for (std::size_t u = 0; u < KH; ++u)
                        for (std::size_t v = 0; v < KW; ++v)
                            acc += w.data[((n * C + c) * KH + u) * KW + v] * in[(c * H + i + u) * W + j + v];
                out[(n * OH + i) * OW + j] = acc;
            }
        }
    }
}

}  // namespace

LayerSpec LayerSpec::dense(std::string name, std::size_t in, std::size_t out) {
    LayerSpec l;
    l.kind = LayerKind::kDense;
    l.name = std::move(name);
    l.in_features = in;
    l.out_features = out;
    return l;
}

LayerSpec LayerSpec::conv2d(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kh, std::size_t kw) {
    LayerSpec l;
    l.kind = LayerKind::kConv2d;
    l.name = std::move(name);
    l.in_channels = in_ch;
    l.out_channels = out_ch;
    l.kernel_h = kh;
    l.kernel_w = kw;
    return l;
}

LayerSpec LayerSpec::relu() { return LayerSpec{}; }

LayerSpec LayerSpec::flatten() {
    LayerSpec l;
    l.kind = LayerKind::kFlatten;
    return l;
}

LayerSpec LayerSpec::softmax_output() {
    LayerSpec l;
    l.kind = LayerKind::kSoftmaxOutput;
    return l;
}

std::vector<std::vector<std::size_t>> ModelSpec::layer_shapes() const {
    if (input_shape.empty() || input_size() == 0) throw Error(ErrorCode::kInvalidShape, "empty input shape");
    std::vector<std::vector<std::size_t>> shapes;
    std::vector<std::size_t> cur = input_shape;
    for (const auto& l : layers) {
        switch (l.kind) {
            case LayerKind::kDense:
                if (cur.size() != 1 || cur[0] != l.in_features || l.out_features == 0) {
                    throw Error(ErrorCode::kInvalidShape, "dense layer '" + l.name + "' expects input (" +
                                                              std::to_string(l.in_features) + "), got " +
                                                              shape_to_string(cur));
                }
                cur = {l.out_features};
                break;
            case LayerKind::kConv2d:
                if (cur.size() != 3 || cur[0] != l.in_channels || l.kernel_h == 0 || l.kernel_w == 0 ||
                    cur[1] < l.kernel_h || cur[2] < l.kernel_w || l.out_channels == 0) {
                    throw Error(ErrorCode::kInvalidShape, "conv layer '" + l.name + "' incompatible with input " +
                                                              shape_to_string(cur));
                }
                cur = {l.out_channels, cur[1] - l.kernel_h + 1, cur[2] - l.kernel_w + 1};
                break;
            case LayerKind::kFlatten:
                cur = {shape_numel(cur)};
                break;
            case LayerKind::kRelu:
                break;
            case LayerKind::kSoftmaxOutput:
                if (cur.size() != 1) throw Error(ErrorCode::kInvalidShape, "softmax output needs a flat input");
                break;
        }
        shapes.push_back(cur);
    }
    return shapes;
}

void ModelSpec::validate() const {
    if (layers.empty() || layers.back().kind != LayerKind::kSoftmaxOutput) {
        throw Error(ErrorCode::kInvalidShape, "model must end with a softmax output layer");
    }
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
        if (layers[i].kind == LayerKind::kSoftmaxOutput) {
            throw Error(ErrorCode::kInvalidShape, "softmax output must be the last layer");
        }
    }
    const auto shapes = layer_shapes();
    if (shapes.back() != std::vector<std::size_t>{classes}) {
        throw Error(ErrorCode::kInvalidShape, "final output dimension does not equal the class count");
    }
}

ModelSpec mlp_spec(std::size_t input_dim, std::size_t classes, std::size_t hidden1, std::size_t hidden2) {
    ModelSpec s;
    s.id = "mlp";
    s.input_shape = {input_dim};
    s.classes = classes;
    s.layers = {LayerSpec::flatten(),
                LayerSpec::dense("fc1", input_dim, hidden1),
                LayerSpec::relu(),
                LayerSpec::dense("fc2", hidden1, hidden2),
                LayerSpec::relu(),
                LayerSpec::dense("fc3", hidden2, classes),
                LayerSpec::softmax_output()};
    s.validate();
    return s;
}

ModelSpec conv_spec(std::size_t height, std::size_t width, std::size_t classes, std::size_t channels) {
    if (height < 3 || width < 3) throw Error(ErrorCode::kInvalidShape, "conv model needs an image of at least 3x3");
    ModelSpec s;
    s.id = "conv";
    s.input_shape = {1, height, width};
    s.classes = classes;
    const std::size_t flat = channels * (height - 2) * (width - 2);
    s.layers = {LayerSpec::conv2d("conv1", 1, channels, 3, 3),
                LayerSpec::relu(),
                LayerSpec::flatten(),
                LayerSpec::dense("fc1", flat, classes),
                LayerSpec::softmax_output()};
    s.validate();
    return s;
}

ModelSpec make_model_spec(std::string_view id, std::size_t input_dim, std::size_t classes) {
    if (id == "mlp") return mlp_spec(input_dim, classes);
    if (id == "conv") {
        if (input_dim % 4 != 0 || input_dim < 12) {
            throw Error(ErrorCode::kInvalidShape, "conv model needs a feature dimension that is a multiple of 4, >= 12");
        }
        return conv_spec(4, input_dim / 4, classes);
    }
    throw Error(ErrorCode::kInvalidInput, "unknown model spec id '" + std::string(id) + "'");
}

NamedTensorMap init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x1a17u};
    std::mt19937_64 rng(seq);
    NamedTensorMap params;
    for (const auto& l : spec.layers) {
        std::vector<std::size_t> shape;
        std::size_t fan_in = 0, fan_out = 0, bias_len = 0;
        if (l.kind == LayerKind::kDense) {
            shape = {l.out_features, l.in_features};
            fan_in = l.in_features;
            fan_out = l.out_features;
            bias_len = l.out_features;
        } else if (l.kind == LayerKind::kConv2d) {
            shape = {l.out_channels, l.in_channels, l.kernel_h, l.kernel_w};
            fan_in = l.in_channels * l.kernel_h * l.kernel_w;
            fan_out = l.out_channels * l.kernel_h * l.kernel_w;
            bias_len = l.out_channels;
        } else {
            continue;
        }
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-s, s);
        Tensor w(shape);
        for (auto& v : w.data) v = dist(rng);
        params.emplace(weight_key(l), std::move(w));
        params.emplace(bias_key(l), Tensor({bias_len}, 0.0));
    }
    return params;
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> indices) {
    Batch b;
    b.size = indices.size();
    b.inputs.reserve(indices.size() * data.dim);
    b.labels.reserve(indices.size());
    for (auto i : indices) {
        auto r = data.row(i);
        b.inputs.insert(b.inputs.end(), r.begin(), r.end());
        b.labels.push_back(data.labels[i]);
    }
    return b;
}

Batch make_batch(const Dataset& data) { return Batch{data.size(), data.features, data.labels}; }

std::uint64_t fingerprint(const NamedTensorMap& params) {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& [name, t] : params) {
        for (char c : name) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
        for (double v : t.data) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            h = (h ^ bits) * 1099511628211ull;
            h ^= h >> 29;
        }
    }
    return h;
}

ForwardResult forward(const NamedTensorMap& params, const ModelSpec& spec, const Batch& batch) {
    spec.validate();
    check_params(params, spec);
    if (batch.size == 0) throw Error(ErrorCode::kInvalidShape, "empty batch");
    if (batch.inputs.size() != batch.size * spec.input_size()) {
        throw Error(ErrorCode::kInvalidShape, "batch inputs do not match the model input shape " +
                                                  shape_to_string(spec.input_shape));
    }
    if (batch.labels.size() != batch.size && !batch.labels.empty()) {
        throw Error(ErrorCode::kInvalidShape, "batch label count does not match batch size");
    }

    const auto shapes = spec.layer_shapes();
    const std::size_t B = batch.size;
    ForwardCache cache;
    cache.spec = &spec;
    cache.params = &params;
    cache.fingerprint = fingerprint(params);
    cache.batch_size = B;
    cache.activations.reserve(spec.layers.size() + 1);
    cache.activations.push_back(batch.inputs);

    std::vector<std::size_t> in_shape = spec.input_shape;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const auto& l = spec.layers[li];
        const auto& x = cache.activations.back();
        const std::size_t in_n = shape_numel(in_shape);
        const std::size_t out_n = shape_numel(shapes[li]);
        std::vector<double> y(B * out_n);
        switch (l.kind) {
            case LayerKind::kDense: {
                const auto& w = param(params, weight_key(l)).data;
                const auto& b = param(params, bias_key(l)).data;
                for (std::size_t s = 0; s < B; ++s) {
                    const double* xs = x.data() + s * in_n;
                    double* ys = y.data() + s * out_n;
                    for (std::size_t o = 0; o < out_n; ++o) {
                        const double* wr = w.data() + o * in_n;
                        double acc = b[o];
                        for (std::size_t i = 0; i < in_n; ++i) acc += wr[i] * xs[i];
                        ys[o] = acc;
                    }
                }
                break;
            }
            case LayerKind::kConv2d: {
                const auto& w = param(params, weight_key(l));
                const auto& b = param(params, bias_key(l));
                for (std::size_t s = 0; s < B; ++s) {
                    conv_forward(x.data() + s * in_n, in_shape[0], in_shape[1], in_shape[2], w, b, y.data() + s * out_n);
                }
                break;
            }
            case LayerKind::kRelu:
                for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
                break;
            case LayerKind::kFlatten:
                y = x;
                break;
            case LayerKind::kSoftmaxOutput:
                for (std::size_t s = 0; s < B; ++s) {
                    const double* z = x.data() + s * in_n;
                    double* p = y.data() + s * out_n;
                    const double zmax = *std::max_element(z, z + in_n);
                    double total = 0.0;
                    for (std::size_t c = 0; c < in_n; ++c) {
                        p[c] = std::exp(z[c] - zmax);
                        total += p[c];
                    }
                    for (std::size_t c = 0; c < in_n; ++c) p[c] /= total;
                }
                break;
        }
        cache.activations.push_back(std::move(y));
        in_shape = shapes[li];
    }

    ForwardResult out{RealMatrix(B, spec.classes, cache.activations.back()), std::move(cache)};
    return out;
}

RealMatrix predict_probs(const NamedTensorMap& params, const ModelSpec& spec, const Dataset& data) {
    return forward(params, spec, make_batch(data)).probs;
}

LossValue ce_loss(const RealMatrix& probs, std::span<const int> labels) {
    if (labels.size() != probs.rows()) throw Error(ErrorCode::kInvalidShape, "label count does not match batch");
    const std::size_t B = probs.rows();
    const std::size_t C = probs.cols();
    LossValue out{0.0, RealMatrix(B, C)};
    const double inv_b = 1.0 / static_cast<double>(B);
    for (std::size_t s = 0; s < B; ++s) {
        const int y = labels[s];
        if (y < 0 || static_cast<std::size_t>(y) >= C) throw Error(ErrorCode::kInvalidInput, "label out of range");
        out.value -= std::log(std::max(probs(s, y), kProbFloor));
        for (std::size_t c = 0; c < C; ++c) {
            out.grad_logits(s, c) = (probs(s, c) - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0)) * inv_b;
        }
    }
    out.value *= inv_b;
    return out;
}

KlValue kl_div(const RealMatrix& p, const RealMatrix& q) {
    if (p.rows() != q.rows() || p.cols() != q.cols()) {
        throw Error(ErrorCode::kInvalidShape, "KL arguments differ in shape");
    }
    const std::size_t B = p.rows();
    const std::size_t C = p.cols();
    KlValue out{0.0, RealMatrix(B, C), RealMatrix(B, C)};
    const double inv_b = 1.0 / static_cast<double>(B);
    std::vector<double> log_ratio(C);
    for (std::size_t s = 0; s < B; ++s) {
        double row = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            log_ratio[c] = std::log(std::max(p(s, c), kProbFloor)) - std::log(std::max(q(s, c), kProbFloor));
            row += p(s, c) * log_ratio[c];
        }
        out.value += row;
        for (std::size_t c = 0; c < C; ++c) {
            // Softmax Jacobian applied to d/dp = log(p/q) + 1 and d/dq = -p/q.
            out.grad_first(s, c) = p(s, c) * (log_ratio[c] - row) * inv_b;
            out.grad_second(s, c) = (q(s, c) - p(s, c)) * inv_b;
        }
    }
    out.value *= inv_b;
    return out;
}

NamedTensorMap backward(const ForwardCache& cache, const RealMatrix& grad_logits) {
    if (cache.spec == nullptr || cache.params == nullptr || cache.activations.empty()) {
        throw Error(ErrorCode::kInvalidState, "backward called without a forward cache");
    }
    const ModelSpec& spec = *cache.spec;
    const NamedTensorMap& params = *cache.params;
    if (cache.activations.size() != spec.layers.size() + 1) {
        throw Error(ErrorCode::kInvalidState, "forward cache does not match the model spec");
    }
    if (fingerprint(params) != cache.fingerprint) {
        throw Error(ErrorCode::kInvalidState, "parameters changed since the forward pass (stale cache)");
    }
    const std::size_t B = cache.batch_size;
    if (grad_logits.rows() != B || grad_logits.cols() != spec.classes) {
        throw Error(ErrorCode::kInvalidState, "upstream gradient does not match the cached batch");
    }

    const auto shapes = spec.layer_shapes();
    NamedTensorMap grads = zeros_like(params);

    // Gradient w.r.t. the input of the softmax layer is supplied directly.
    std::vector<double> g(grad_logits.data().begin(), grad_logits.data().end());
    for (std::size_t li = spec.layers.size() - 1; li-- > 0;) {
        const auto& l = spec.layers[li];
        const auto& x = cache.activations[li];
        const auto& in_shape = li == 0 ? spec.input_shape : shapes[li - 1];
        const std::size_t in_n = shape_numel(in_shape);
        const std::size_t out_n = shape_numel(shapes[li]);
        const bool need_input_grad = li > 0;
        std::vector<double> gx(need_input_grad ? B * in_n : 0, 0.0);

        switch (l.kind) {
            case LayerKind::kDense: {
                const auto& w = param(params, weight_key(l)).data;
                auto& dw = grads.at(weight_key(l)).data;
                auto& db = grads.at(bias_key(l)).data;
                for (std::size_t s = 0; s < B; ++s) {
                    const double* xs = x.data() + s * in_n;
                    const double* gs = g.data() + s * out_n;
                    for (std::size_t o = 0; o < out_n; ++o) {
                        const double go = gs[o];
                        if (go == 0.0) continue;
                        db[o] += go;
                        double* dwr = dw.data() + o * in_n;
                        for (std::size_t i = 0; i < in_n; ++i) dwr[i] += go * xs[i];
                        if (need_input_grad) {
                            const double* wr = w.data() + o * in_n;
                            double* gxs = gx.data() + s * in_n;
                            for (std::size_t i = 0; i < in_n; ++i) gxs[i] += go * wr[i];
                        }
                    }
                }
                break;
            }
            case LayerKind::kConv2d: {
                const auto& w = param(params, weight_key(l)).data;
                auto& dw = grads.at(weight_key(l)).data;
                auto& db = grads.at(bias_key(l)).data;
                const std::size_t C = in_shape[0], H = in_shape[1], W = in_shape[2];
                const std::size_t N = l.out_channels, KH = l.kernel_h, KW = l.kernel_w;
                const std::size_t OH = H - KH + 1, OW = W - KW + 1;
                for (std::size_t s = 0; s < B; ++s) {
                    const double* xs = x.data() + s * in_n;
                    const double* gs = g.data() + s * out_n;
                    double* gxs = need_input_grad ? gx.data() + s * in_n : nullptr;
                    for (std::size_t n = 0; n < N; ++n) {
                        for (std::size_t i = 0; i < OH; ++i) {
                            for (std::size_t j = 0; j < OW; ++j) {
                                const double go = gs[(n * OH + i) * OW + j];
                                if (go == 0.0) continue;
                                db[n] += go;
                                for (std::size_t c = 0; c < C; ++c)
                                    for (std::size_t u = 0; u < KH; ++u)
                                        for (std::size_t v = 0; v < KW; ++v) {
                                            const std::size_t wi = ((n * C + c) * KH + u) * KW + v;
                                            const std::size_t xi = (c * H + i + u) * W + j + v;
                                            dw[wi] += go * xs[xi];
                                            if (gxs) gxs[xi] += go * w[wi];
                                        }
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::kRelu:
                if (need_input_grad) {
                    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = x[i] > 0.0 ? g[i] : 0.0;
                }
                break;
            case LayerKind::kFlatten:
                if (need_input_grad) gx = g;
                break;
            case LayerKind::kSoftmaxOutput:
                throw Error(ErrorCode::kInvalidState, "softmax output must be the last layer");
        }
        g = std::move(gx);
    }
    return grads;
}

double OptimizerState::learning_rate() const {
    const int period = halving_period > 0 ? halving_period : 1;
    return std::ldexp(base_lr, -(epoch / period));
}

void sgd_step(NamedTensorMap& params, const NamedTensorMap& grads, const OptimizerState& opt) {
    require_same_structure(params, grads, ErrorCode::kInvalidShape, "sgd_step");
    const double lr = opt.learning_rate();
    auto ig = grads.begin();
    for (auto& [name, t] : params) {
        const auto& g = ig->second.data;
        for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] -= lr * g[i];
        ++ig;
    }
}

}  // namespace fourierfed
