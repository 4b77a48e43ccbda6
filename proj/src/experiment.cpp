#include "fourierfed/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <limits>
#include <thread>

#include "fourierfed/checkpoint.hpp"
#include "fourierfed/freq_agg.hpp"
#include "fourierfed/report.hpp"

namespace fourierfed {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kPurposeInit = 21;
constexpr std::uint64_t kPurposeTrain = 22;

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double nan_mean(const std::vector<double>& v) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double x : v) {
        if (std::isnan(x)) continue;
        sum += x;
        ++n;
    }
    return n ? sum / static_cast<double>(n) : kNaN;
}

struct ClientRuntime {
    const ClientData* data = nullptr;
    Rng rng;
    ClientState det;
    NamedTensorMap model;   // non-deputy strategies
    NamedTensorMap anchor;  // FedProx reference: the last received global model
    double last_phi = 0.0;
    double best_val = -1.0;
    int best_epoch = 0;
    NamedTensorMap best;
    std::vector<RoundLogRow> rows;
};

class Runner {
public:
    Runner(const ExperimentConfig& cfg, const FederatedDataset& data, const ClientData& ood, const RunOptions& opts)
        : cfg_(cfg), data_(data), ood_(ood), opts_(opts), spec_(make_model_spec(cfg.model_spec, data.dim, data.classes)) {
        det_cfg_ = DetConfig{cfg.lambda1, cfg.lambda2};
        schedule_ = ScheduleParams{cfg.r0, cfg.r1, cfg.T};
        persist_ = opts.write_outputs && !cfg.output_dir.empty();
        if (persist_) {
            checkpoint_dir_ = std::filesystem::path(cfg.output_dir) / "checkpoints";
            std::error_code ec;
            std::filesystem::create_directories(checkpoint_dir_, ec);
            if (ec) throw Error(ErrorCode::kIo, "cannot create '" + checkpoint_dir_.string() + "': " + ec.message());
        }
    }

    ExperimentResult run() {
        result_.config = cfg_;
        const auto init = init_params(spec_, model_init_seed(cfg_.seed));
        const OptimizerState opt{cfg_.base_lr, 0, cfg_.lr_halving_period};
        clients_.resize(data_.clients.size());
        for (std::size_t k = 0; k < clients_.size(); ++k) {
            auto& c = clients_[k];
            c.data = &data_.clients[k];
            c.rng = client_train_rng(cfg_.seed, c.data->profile.seed);
            if (uses_deputy(cfg_.strategy)) {
                c.det = make_client_state(static_cast<int>(k), init, opt);
            } else {
                c.model = init;
                c.anchor = init;
            }
        }

        try {
            const int rounds = cfg_.T / cfg_.E;
            for (int round = 0; round < rounds; ++round) {
                parallel_for(clients_.size(), opts_.workers, [&](std::size_t k) { train_round(k, round); });
                result_.epochs_completed = (round + 1) * cfg_.E;
                if (cfg_.strategy != Strategy::kLocalOnly) communicate(round);
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::kIo && persist_) flush_partial();
            throw;
        }
        finish();
        return std::move(result_);
    }

private:
    void consider_best(ClientRuntime& c, std::size_t k, const NamedTensorMap& params, double phi, int epoch) {
        if (phi <= c.best_val) return;
        c.best_val = phi;
        c.best = params;
        c.best_epoch = epoch;
        if (persist_) {
            save_checkpoint(params, (checkpoint_dir_ / ("client_" + std::to_string(k) + "_best.ckpt")).string(), spec_.id);
        }
    }

    void train_round(std::size_t k, int round) {
        auto& c = clients_[k];
        const bool pfa = uses_pfa(cfg_.strategy);
        for (int e = 0; e < cfg_.E; ++e) {
            const int t = round * cfg_.E + e;
            RoundLogRow row;
            row.epoch = t + 1;
            row.client = static_cast<int>(k);
            row.r = pfa ? schedule_r(t + 1, schedule_) : kNaN;
            row.comm_event = cfg_.strategy != Strategy::kLocalOnly && e == cfg_.E - 1;
            if (uses_deputy(cfg_.strategy)) {
                const auto log = local_epoch(c.det, spec_, c.data->train, c.data->val, det_cfg_,
                                             static_cast<std::size_t>(cfg_.batch_size), c.rng);
                row.phase = log.phase;
                row.ce_loss = log.ce_loss;
                row.kl_loss = log.kl_loss;
                row.phi_d = log.phi_d;
                row.phi_p = log.phi_p;
                consider_best(c, k, c.det.personalized, log.phi_p, t + 1);
            } else {
                const OptimizerState opt{cfg_.base_lr, t, cfg_.lr_halving_period};
                const ProximalTerm prox{&c.anchor, cfg_.fedprox_mu};
                const auto stats = train_epoch(c.model, spec_, c.data->train, static_cast<std::size_t>(cfg_.batch_size),
                                               opt, c.rng, cfg_.strategy == Strategy::kFedProx ? &prox : nullptr);
                row.ce_loss = stats.ce_loss;
                row.phi_d = kNaN;
                row.phi_p = validation_f1(c.model, spec_, c.data->val);
                // FedAvg/FedProx are scored with the global model, see communicate().
                if (cfg_.strategy == Strategy::kLocalOnly || cfg_.strategy == Strategy::kPfa) {
                    consider_best(c, k, c.model, row.phi_p, t + 1);
                }
            }
            c.last_phi = row.phi_p;
            c.rows.push_back(row);
        }
    }

    void communicate(int round) {
        const int t = (round + 1) * cfg_.E;
        AggregationRequest req;
        for (auto& c : clients_) {
            req.client_params.push_back(uses_deputy(cfg_.strategy) ? upload_model(c.det) : c.model);
        }
        std::vector<NamedTensorMap> delivered;
        if (uses_pfa(cfg_.strategy)) {
            req.kind = AggregationKind::kPfa;
            req.r = schedule_r(t, schedule_);
            delivered = pfa_aggregate(req);
        } else {
            req.kind = AggregationKind::kFedAvg;
            delivered.assign(clients_.size(), fedavg_aggregate(req));
        }
        ++result_.aggregation_events;

        std::vector<BoundaryRecord> records(clients_.size());
        parallel_for(clients_.size(), opts_.workers, [&](std::size_t k) {
            auto& c = clients_[k];
            BoundaryRecord rec{t, static_cast<int>(k), c.last_phi, 0.0, kNaN};
            if (uses_deputy(cfg_.strategy)) {
                receive_deputy(c.det, delivered[k]);
                rec.after = validation_f1(c.det.personalized, spec_, c.data->val);
                rec.deputy_after = validation_f1(c.det.deputy, spec_, c.data->val);
            } else {
                c.model = std::move(delivered[k]);
                c.anchor = c.model;
                rec.after = validation_f1(c.model, spec_, c.data->val);
                if (cfg_.strategy == Strategy::kFedAvg || cfg_.strategy == Strategy::kFedProx) {
                    consider_best(c, k, c.model, rec.after, t);
                }
            }
            records[k] = rec;
        });
        result_.boundaries.insert(result_.boundaries.end(), records.begin(), records.end());
    }

    void collect_log() {
        result_.log.clear();
        std::size_t max_rows = 0;
        for (const auto& c : clients_) max_rows = std::max(max_rows, c.rows.size());
        for (std::size_t i = 0; i < max_rows; ++i)
            for (const auto& c : clients_)
                if (i < c.rows.size()) result_.log.push_back(c.rows[i]);
    }

    void flush_partial() {
        try {
            collect_log();
            emit_report(result_, cfg_.output_dir);
        } catch (...) {
            // The original IO error is the one reported.
        }
    }

    void finish() {
        collect_log();
        const Dataset ood_all = ood_.samples;
        result_.clients.resize(clients_.size());
        parallel_for(clients_.size(), opts_.workers, [&](std::size_t k) {
            auto& c = clients_[k];
            auto& out = result_.clients[k];
            out.client = static_cast<int>(k);
            out.name = c.data->profile.name;
            out.best_epoch = c.best_epoch;
            out.best_val_f1 = c.best_val;
            out.test = evaluate_model(c.best, spec_, c.data->test);
            out.ood = evaluate_model(c.best, spec_, ood_all);

            std::vector<double> deltas, next, deputy;
            for (const auto& b : result_.boundaries) {
                if (b.client != static_cast<int>(k)) continue;
                deltas.push_back(b.after - b.before);
                deputy.push_back(b.deputy_after - b.before);
                if (b.epoch < static_cast<int>(c.rows.size())) next.push_back(c.rows[b.epoch].phi_p - b.before);
            }
            out.mean_boundary_delta = nan_mean(deltas);
            out.mean_next_epoch_delta = nan_mean(next);
            out.mean_deputy_drop = nan_mean(deputy);
        });

        std::vector<double> f1, auc, ood_f1, ood_auc;
        for (const auto& c : result_.clients) {
            f1.push_back(c.test.macro_f1);
            auc.push_back(c.test.macro_auc);
            ood_f1.push_back(c.ood.macro_f1);
            ood_auc.push_back(c.ood.macro_auc);
        }
        result_.macro_f1 = nan_mean(f1);
        result_.macro_auc = nan_mean(auc);
        result_.ood_macro_f1 = nan_mean(ood_f1);
        result_.ood_macro_auc = nan_mean(ood_auc);
        result_.completed = true;
    }

    const ExperimentConfig& cfg_;
    const FederatedDataset& data_;
    const ClientData& ood_;
    RunOptions opts_;
    ModelSpec spec_;
    DetConfig det_cfg_;
    ScheduleParams schedule_;
    bool persist_ = false;
    std::filesystem::path checkpoint_dir_;
    std::vector<ClientRuntime> clients_;
    ExperimentResult result_;
};

}  // namespace

std::uint64_t model_init_seed(std::uint64_t experiment_seed) {
    Rng rng = make_rng(experiment_seed, 0, kPurposeInit);
    return rng();
}

Rng client_train_rng(std::uint64_t experiment_seed, std::uint64_t client_seed) {
    return make_rng(experiment_seed, client_seed, kPurposeTrain);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const FederatedDataset& data, const ClientData& ood,
                                const RunOptions& opts) {
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, e.what());
    }
    if (data.clients.empty()) throw Error(ErrorCode::kInvalidDataset, "no clients");
    if (data.clients.size() != static_cast<std::size_t>(cfg.K)) {
        throw Error(ErrorCode::kConfig, "K does not match the number of client datasets");
    }
    if (ood.samples.dim != data.dim) throw Error(ErrorCode::kInvalidDataset, "held-out client has a different dimension");
    for (const auto& c : data.clients) {
        if (c.train.empty() || c.val.empty() || c.test.empty()) {
            throw Error(ErrorCode::kInvalidDataset, "client '" + c.profile.name + "' has an empty split");
        }
        if (c.train.dim != data.dim) throw Error(ErrorCode::kInvalidDataset, "client dimension mismatch");
    }
    Runner runner(cfg, data, ood, opts);
    auto result = runner.run();
    if (opts.write_outputs && !cfg.output_dir.empty()) emit_report(result, cfg.output_dir);
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, e.what());
    }
    std::vector<ClientProfile> profiles;
    try {
        profiles = default_profiles(cfg.data_scale);
    } catch (const Error& e) {
        throw Error(ErrorCode::kConfig, e.what());
    }
    profiles.resize(static_cast<std::size_t>(cfg.K));
    const auto data = synth(profiles, cfg.seed);
    const auto ood = ood_client(profiles, cfg.seed);
    return run_experiment(cfg, data, ood, opts);
}

}  // namespace fourierfed
