#pragma once

#include <cstddef>
#include <string_view>

#include "fourierfed/dataset.hpp"
#include "fourierfed/model.hpp"
#include "fourierfed/training.hpp"

namespace fourierfed {

// Ordered: a window only ever moves forward through these.
enum class DetPhase { kRecover = 0, kExchange = 1, kSublimate = 2 };

const char* to_string(DetPhase phase) noexcept;

struct DetConfig {
    double lambda1 = 0.7;
    double lambda2 = 0.9;

    void validate() const;  // 0 < lambda1 < lambda2 < 1
};

/// A client holding a personalized model p (deployed, uploaded, never overwritten by the
/// server) and a deputy d (replaced by every aggregate it receives).
struct ClientState {
    int id = 0;
    NamedTensorMap personalized;
    NamedTensorMap deputy;
    DetPhase phase = DetPhase::kRecover;
    double phi_deputy = 0.0;
    double phi_personal = 0.0;
    bool phi_deputy_stale = true;
    OptimizerState personal_opt;
    OptimizerState deputy_opt;
    int local_epoch = 0;
};

/// Both models start from `init`.
ClientState make_client_state(int id, const NamedTensorMap& init, const OptimizerState& opt);

/// d <- aggregated, phase <- RECOVER, phi(d) marked stale. p is untouched.
void receive_deputy(ClientState& state, const NamedTensorMap& aggregated);

/// SUBLIMATE if phi_d >= lambda2 * phi_p, else EXCHANGE if phi_d >= lambda1 * phi_p, else
/// RECOVER; never lower than `current`.
DetPhase det_phase_transition(double phi_d, double phi_p, const DetConfig& cfg, DetPhase current);

struct ObjectiveGrads {
    NamedTensorMap grads;
    double ce = 0.0;
    double kl = 0.0;  // 0 when the phase applies no distillation term
};

/// Deputy objective for the current phase: CE + KL(d || p) with p frozen in RECOVER and
/// EXCHANGE, plain CE in SUBLIMATE.
ObjectiveGrads deputy_gradients(const ClientState& state, const ModelSpec& spec, const Batch& batch);

/// Personalized objective for the current phase: CE in RECOVER, CE + KL(p || d) with d
/// frozen in EXCHANGE and SUBLIMATE.
ObjectiveGrads personal_gradients(const ClientState& state, const ModelSpec& spec, const Batch& batch);

struct DetStepLosses {
    double personal_ce = 0.0;
    double deputy_ce = 0.0;
    double deputy_kl = 0.0;
    double personal_kl = 0.0;
};

/// One batch: the deputy is updated first, then p sees the updated deputy.
DetStepLosses det_train_step(ClientState& state, const ModelSpec& spec, const Batch& batch);

struct EpochLog {
    int epoch = 0;                          // global local-epoch index that was trained
    DetPhase phase = DetPhase::kRecover;    // phase used for training
    DetPhase next_phase = DetPhase::kRecover;
    double ce_loss = 0.0;                   // personalized model, mean over batches
    double deputy_ce_loss = 0.0;
    double kl_loss = 0.0;                   // mean of the KL terms that were applied
    double first_batch_kl = 0.0;            // deputy KL term on the first batch
    double phi_d = 0.0;
    double phi_p = 0.0;
};

/// One pass over `train`, then both models are scored (macro F1) on `val` and the phase
/// transition is applied.
EpochLog local_epoch(ClientState& state, const ModelSpec& spec, const Dataset& train, const Dataset& val,
                     const DetConfig& cfg, std::size_t batch_size, Rng& rng);

/// Deep copy of p.
NamedTensorMap upload_model(const ClientState& state);

}  // namespace fourierfed
