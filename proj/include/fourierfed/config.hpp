#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fourierfed {

// PFA and FEDAVG_DET are the two ablations: PFA aggregation with plain local training, and
// deputy-based clients fed by a FedAvg global model.
enum class Strategy { kPfaDet, kFedAvg, kFedProx, kLocalOnly, kPfa, kFedAvgDet };

const char* to_string(Strategy s) noexcept;
Strategy parse_strategy(std::string_view name);
bool uses_deputy(Strategy s) noexcept;
bool uses_pfa(Strategy s) noexcept;

struct ExperimentConfig {
    Strategy strategy = Strategy::kPfaDet;
    int K = 4;
    int E = 5;
    int T = 250;
    std::string model_spec = "mlp";
    double r0 = 0.35;
    double r1 = 0.48;
    double lambda1 = 0.7;
    double lambda2 = 0.9;
    double fedprox_mu = 0.01;
    int batch_size = 16;
    double base_lr = 1e-2;
    int lr_halving_period = 25;
    double data_scale = 0.1;
    std::uint64_t seed = 0;
    std::string output_dir;

    /// Throws Error(kConfig) on any violated constraint.
    void validate() const;
};

/// Flat "key = value" lines; '#' starts a comment. Unknown or repeated keys are errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Every key in canonical order, in the same format parse_config accepts.
std::string to_config_text(const ExperimentConfig& cfg);

}  // namespace fourierfed
