#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fourierfed/config.hpp"
#include "fourierfed/data_synth.hpp"
#include "fourierfed/det_client.hpp"
#include "fourierfed/metrics.hpp"
#include "fourierfed/training.hpp"

namespace fourierfed {

/// One row per (client, local epoch). Non-deputy strategies have no phase and NaN phi_d;
/// r is NaN unless the strategy aggregates with PFA.
struct RoundLogRow {
    int epoch = 0;  // 1-based count of local epochs completed
    int client = 0;
    std::optional<DetPhase> phase;
    double ce_loss = 0.0;
    double kl_loss = 0.0;
    double phi_d = 0.0;
    double phi_p = 0.0;
    double r = 0.0;
    bool comm_event = false;
};

/// Validation F1 of the client's evaluated model just before upload and just after the
/// download at one communication.
struct BoundaryRecord {
    int epoch = 0;
    int client = 0;
    double before = 0.0;
    double after = 0.0;
    double deputy_after = 0.0;  // NaN without a deputy
};

struct ClientResult {
    int client = 0;
    std::string name;
    int best_epoch = 0;
    double best_val_f1 = 0.0;
    EvalResult test;
    EvalResult ood;
    double mean_boundary_delta = 0.0;    // mean(after - before); NaN without communication
    double mean_next_epoch_delta = 0.0;  // mean(phi after the next epoch - before)
    double mean_deputy_drop = 0.0;       // mean(deputy_after - before); NaN without a deputy
};

struct ExperimentResult {
    ExperimentConfig config;
    int epochs_completed = 0;
    int aggregation_events = 0;
    bool completed = false;
    std::vector<RoundLogRow> log;
    std::vector<BoundaryRecord> boundaries;
    std::vector<ClientResult> clients;
    double macro_f1 = 0.0;
    double macro_auc = 0.0;
    double ood_macro_f1 = 0.0;
    double ood_macro_auc = 0.0;
};

struct RunOptions {
    int workers = 1;
    bool write_outputs = true;  // only when config.output_dir is non-empty
};

/// Every client starts from this initialization (the server's broadcast model).
std::uint64_t model_init_seed(std::uint64_t experiment_seed);

/// Shuffling stream of one client; depends only on the experiment seed and the client's
/// profile seed.
Rng client_train_rng(std::uint64_t experiment_seed, std::uint64_t client_seed);

/// Default synthetic profiles (first K) at config.data_scale.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

ExperimentResult run_experiment(const ExperimentConfig& cfg, const FederatedDataset& data, const ClientData& ood,
                                const RunOptions& opts = {});

}  // namespace fourierfed
