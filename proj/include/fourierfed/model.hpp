#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fourierfed/dataset.hpp"
#include "fourierfed/numerics.hpp"
#include "fourierfed/tensor.hpp"

namespace fourierfed {

enum class LayerKind { kDense, kConv2d, kRelu, kFlatten, kSoftmaxOutput };

struct LayerSpec {
    LayerKind kind = LayerKind::kRelu;
    std::string name;  // parameter prefix for dense/conv2d, e.g. "fc1" -> "fc1.weight"
    std::size_t in_features = 0;
    std::size_t out_features = 0;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;

    static LayerSpec dense(std::string name, std::size_t in, std::size_t out);
    static LayerSpec conv2d(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kh, std::size_t kw);
    static LayerSpec relu();
    static LayerSpec flatten();
    static LayerSpec softmax_output();
};

struct ModelSpec {
    std::string id;
    std::vector<std::size_t> input_shape;  // {D} or {C, H, W}
    std::size_t classes = 3;
    std::vector<LayerSpec> layers;

    std::size_t input_size() const { return shape_numel(input_shape); }
    /// Per-sample output shape of every layer; throws kInvalidShape if layers do not chain.
    std::vector<std::vector<std::size_t>> layer_shapes() const;
    void validate() const;
};

/// flatten -> dense(D, 64) -> relu -> dense(64, 32) -> relu -> dense(32, classes) -> softmax
ModelSpec mlp_spec(std::size_t input_dim, std::size_t classes = 3, std::size_t hidden1 = 64, std::size_t hidden2 = 32);

/// conv2d(1 -> channels, 3x3, valid) -> relu -> flatten -> dense(., classes) -> softmax,
/// input viewed as a single-channel height x width image.
ModelSpec conv_spec(std::size_t height, std::size_t width, std::size_t classes = 3, std::size_t channels = 8);

/// "mlp" or "conv". The conv variant views D features as a 4 x (D/4) image, so D must be
/// a multiple of 4 and at least 12.
ModelSpec make_model_spec(std::string_view id, std::size_t input_dim, std::size_t classes = 3);

/// Glorot-uniform weights, zero biases.
NamedTensorMap init_params(const ModelSpec& spec, std::uint64_t seed);

struct Batch {
    std::size_t size = 0;
    std::vector<double> inputs;  // size x input_size
    std::vector<int> labels;
};

Batch make_batch(const Dataset& data, std::span<const std::size_t> indices);
Batch make_batch(const Dataset& data);

struct ForwardCache {
    const ModelSpec* spec = nullptr;
    const NamedTensorMap* params = nullptr;
    std::uint64_t fingerprint = 0;
    std::size_t batch_size = 0;
    // activations[i] is the input of layer i; the last entry is the softmax output.
    std::vector<std::vector<double>> activations;
};

struct ForwardResult {
    RealMatrix probs;  // batch x classes
    ForwardCache cache;
};

ForwardResult forward(const NamedTensorMap& params, const ModelSpec& spec, const Batch& batch);
RealMatrix predict_probs(const NamedTensorMap& params, const ModelSpec& spec, const Dataset& data);

struct LossValue {
    double value = 0.0;
    RealMatrix grad_logits;
};

/// Mean cross entropy with probabilities clamped at 1e-12; gradient with respect to logits.
LossValue ce_loss(const RealMatrix& probs, std::span<const int> labels);

struct KlValue {
    double value = 0.0;
    RealMatrix grad_first;   // d/d logits of the first argument
    RealMatrix grad_second;  // d/d logits of the second argument
};

/// Batch mean of sum_c p log(p / q). Only the logarithms are clamped, so a zero
/// probability in p contributes exactly zero.
KlValue kl_div(const RealMatrix& p, const RealMatrix& q);

/// Parameter gradients for the model that produced `cache`. Throws kInvalidState when the
/// cache is empty or its parameters were modified after the forward pass.
NamedTensorMap backward(const ForwardCache& cache, const RealMatrix& grad_logits);

struct OptimizerState {
    double base_lr = 1e-2;
    int epoch = 0;
    int halving_period = 25;

    /// base * 0.5^floor(epoch / halving_period)
    double learning_rate() const;
};

void sgd_step(NamedTensorMap& params, const NamedTensorMap& grads, const OptimizerState& opt);

std::uint64_t fingerprint(const NamedTensorMap& params);

}  // namespace fourierfed
