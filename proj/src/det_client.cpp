#include "fourierfed/det_client.hpp"

#include <algorithm>

namespace fourierfed {
namespace {

ObjectiveGrads objective(const NamedTensorMap& student, const NamedTensorMap* teacher, const ModelSpec& spec,
                         const Batch& batch) {
    auto fwd = forward(student, spec, batch);
    auto ce = ce_loss(fwd.probs, batch.labels);
    ObjectiveGrads out;
    out.ce = ce.value;
    RealMatrix grad = std::move(ce.grad_logits);
    if (teacher) {
        // The teacher distribution is a constant here; only the student's logits receive gradient.
        const auto teacher_probs = forward(*teacher, spec, batch).probs;
        const auto kl = kl_div(fwd.probs, teacher_probs);
        out.kl = kl.value;
        for (std::size_t i = 0; i < grad.size(); ++i) grad.data()[i] += kl.grad_first.data()[i];
    }
    out.grads = backward(fwd.cache, grad);
    return out;
}

}  // namespace

const char* to_string(DetPhase phase) noexcept {
    switch (phase) {
        case DetPhase::kRecover: return "RECOVER";
        case DetPhase::kExchange: return "EXCHANGE";
        case DetPhase::kSublimate: return "SUBLIMATE";
    }
    return "UNKNOWN";
}

void DetConfig::validate() const {
    if (!(lambda1 > 0.0 && lambda1 < lambda2 && lambda2 < 1.0)) {
        throw Error(ErrorCode::kInvalidThreshold, "DET thresholds require 0 < lambda1 < lambda2 < 1");
    }
}

ClientState make_client_state(int id, const NamedTensorMap& init, const OptimizerState& opt) {
    ClientState s;
    s.id = id;
    s.personalized = init;
    s.deputy = init;
    s.personal_opt = opt;
    s.deputy_opt = opt;
    return s;
}

void receive_deputy(ClientState& state, const NamedTensorMap& aggregated) {
    require_same_structure(state.deputy, aggregated, ErrorCode::kInvalidCheckpoint, "received deputy");
    state.deputy = aggregated;
    state.phase = DetPhase::kRecover;
    state.phi_deputy_stale = true;
}

// lambda * phi_p is rarely exact in binary (0.9 * 0.8 > 0.72), so scores within this of
// the threshold count as reaching it.
constexpr double kTriggerSlack = 1e-12;

DetPhase det_phase_transition(double phi_d, double phi_p, const DetConfig& cfg, DetPhase current) {
    DetPhase next = DetPhase::kRecover;
    if (phi_d >= cfg.lambda2 * phi_p - kTriggerSlack) {
        next = DetPhase::kSublimate;
    } else if (phi_d >= cfg.lambda1 * phi_p - kTriggerSlack) {
        next = DetPhase::kExchange;
    }
    return std::max(next, current);
}

ObjectiveGrads deputy_gradients(const ClientState& state, const ModelSpec& spec, const Batch& batch) {
    const bool distill = state.phase != DetPhase::kSublimate;
    return objective(state.deputy, distill ? &state.personalized : nullptr, spec, batch);
}

ObjectiveGrads personal_gradients(const ClientState& state, const ModelSpec& spec, const Batch& batch) {
    const bool distill = state.phase != DetPhase::kRecover;
    return objective(state.personalized, distill ? &state.deputy : nullptr, spec, batch);
}

DetStepLosses det_train_step(ClientState& state, const ModelSpec& spec, const Batch& batch) {
    DetStepLosses losses;
    auto d = deputy_gradients(state, spec, batch);
    sgd_step(state.deputy, d.grads, state.deputy_opt);
    losses.deputy_ce = d.ce;
    losses.deputy_kl = d.kl;

    auto p = personal_gradients(state, spec, batch);
    sgd_step(state.personalized, p.grads, state.personal_opt);
    losses.personal_ce = p.ce;
    losses.personal_kl = p.kl;
    return losses;
}

EpochLog local_epoch(ClientState& state, const ModelSpec& spec, const Dataset& train, const Dataset& val,
                     const DetConfig& cfg, std::size_t batch_size, Rng& rng) {
    if (train.empty()) throw Error(ErrorCode::kInvalidDataset, "empty training set");
    if (val.empty()) throw Error(ErrorCode::kInvalidDataset, "empty validation set");
    cfg.validate();

    state.personal_opt.epoch = state.local_epoch;
    state.deputy_opt.epoch = state.local_epoch;

    EpochLog log;
    log.epoch = state.local_epoch;
    log.phase = state.phase;

    const bool deputy_distills = state.phase != DetPhase::kSublimate;
    const bool personal_distills = state.phase != DetPhase::kRecover;
    const double kl_terms = static_cast<double>(deputy_distills) + static_cast<double>(personal_distills);

    std::size_t batches = 0;
    for (const auto& idx : shuffled_batches(train.size(), batch_size, rng)) {
        const auto step = det_train_step(state, spec, make_batch(train, idx));
        if (batches == 0) log.first_batch_kl = step.deputy_kl;
        log.ce_loss += step.personal_ce;
        log.deputy_ce_loss += step.deputy_ce;
        if (kl_terms > 0) log.kl_loss += (step.deputy_kl + step.personal_kl) / kl_terms;
        ++batches;
    }
    const double inv = 1.0 / static_cast<double>(batches);
    log.ce_loss *= inv;
    log.deputy_ce_loss *= inv;
    log.kl_loss *= inv;

    state.phi_deputy = validation_f1(state.deputy, spec, val);
    state.phi_personal = validation_f1(state.personalized, spec, val);
    state.phi_deputy_stale = false;
    log.phi_d = state.phi_deputy;
    log.phi_p = state.phi_personal;

    state.phase = det_phase_transition(state.phi_deputy, state.phi_personal, cfg, state.phase);
    log.next_phase = state.phase;
    ++state.local_epoch;
    return log;
}

NamedTensorMap upload_model(const ClientState& state) { return state.personalized; }

}  // namespace fourierfed
