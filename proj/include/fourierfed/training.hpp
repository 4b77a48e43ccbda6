#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "fourierfed/dataset.hpp"
#include "fourierfed/metrics.hpp"
#include "fourierfed/model.hpp"

namespace fourierfed {

using Rng = std::mt19937_64;

/// FedProx client penalty (mu / 2) * ||w - anchor||^2.
struct ProximalTerm {
    const NamedTensorMap* anchor = nullptr;
    double mu = 0.0;
};

struct TrainStats {
    double ce_loss = 0.0;  // mean over batches
    double prox_loss = 0.0;
    std::size_t batches = 0;
};

/// Random permutation of [0, n) cut into consecutive batches; the last may be short.
std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t n, std::size_t batch_size, Rng& rng);

/// One SGD pass over `train` with cross entropy (plus the proximal term when given).
TrainStats train_epoch(NamedTensorMap& params, const ModelSpec& spec, const Dataset& train, std::size_t batch_size,
                       const OptimizerState& opt, Rng& rng, const ProximalTerm* prox = nullptr);

EvalResult evaluate_model(const NamedTensorMap& params, const ModelSpec& spec, const Dataset& data);

/// Macro F1 of argmax predictions; used as the validation score.
double validation_f1(const NamedTensorMap& params, const ModelSpec& spec, const Dataset& data);

/// Deterministic RNG for (seed, stream, purpose) triples.
Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose);

}  // namespace fourierfed
