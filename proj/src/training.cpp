#include "fourierfed/training.hpp"

#include <algorithm>
#include <numeric>

namespace fourierfed {

std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t n, std::size_t batch_size, Rng& rng) {
    if (batch_size == 0) throw Error(ErrorCode::kInvalidInput, "batch size must be positive");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

TrainStats train_epoch(NamedTensorMap& params, const ModelSpec& spec, const Dataset& train, std::size_t batch_size,
                       const OptimizerState& opt, Rng& rng, const ProximalTerm* prox) {
    if (train.empty()) throw Error(ErrorCode::kInvalidDataset, "empty training set");
    if (prox && prox->anchor) {
        require_same_structure(params, *prox->anchor, ErrorCode::kInvalidShape, "proximal anchor");
    }
    TrainStats stats;
    for (const auto& idx : shuffled_batches(train.size(), batch_size, rng)) {
        const Batch batch = make_batch(train, idx);
        auto fwd = forward(params, spec, batch);
        auto loss = ce_loss(fwd.probs, batch.labels);
        auto grads = backward(fwd.cache, loss.grad_logits);
        stats.ce_loss += loss.value;
        if (prox && prox->anchor && prox->mu > 0.0) {
            double penalty = 0.0;
            auto ia = prox->anchor->begin();
            for (auto& [name, g] : grads) {
                const auto& w = params.at(name).data;
                const auto& a = ia->second.data;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    const double d = w[i] - a[i];
                    g.data[i] += prox->mu * d;
                    penalty += d * d;
                }
                ++ia;
            }
            stats.prox_loss += 0.5 * prox->mu * penalty;
        }
        sgd_step(params, grads, opt);
        ++stats.batches;
    }
    stats.ce_loss /= static_cast<double>(stats.batches);
    stats.prox_loss /= static_cast<double>(stats.batches);
    return stats;
}

EvalResult evaluate_model(const NamedTensorMap& params, const ModelSpec& spec, const Dataset& data) {
    if (data.empty()) throw Error(ErrorCode::kInvalidDataset, "cannot evaluate on an empty dataset");
    return evaluate(predict_probs(params, spec, data), data.labels, spec.classes);
}

double validation_f1(const NamedTensorMap& params, const ModelSpec& spec, const Dataset& data) {
    if (data.empty()) throw Error(ErrorCode::kInvalidDataset, "cannot evaluate on an empty dataset");
    const auto preds = argmax_rows(predict_probs(params, spec, data));
    return macro_f1(preds, data.labels, spec.classes);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(purpose)};
    return Rng(seq);
}

}  // namespace fourierfed
