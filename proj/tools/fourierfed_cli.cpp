// fourierfed: synthetic data generation, experiment runs, offline aggregation and evaluation.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 IO error, 1 anything else.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fourierfed/checkpoint.hpp"
#include "fourierfed/config.hpp"
#include "fourierfed/data_synth.hpp"
#include "fourierfed/dataset_io.hpp"
#include "fourierfed/experiment.hpp"
#include "fourierfed/freq_agg.hpp"
#include "fourierfed/report.hpp"
#include "fourierfed/training.hpp"

namespace ff = fourierfed;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

int exit_code_for(ff::ErrorCode code) {
    switch (code) {
        case ff::ErrorCode::kConfig:
        case ff::ErrorCode::kInvalidThreshold:
        case ff::ErrorCode::kInvalidScale:
        case ff::ErrorCode::kInvalidEpoch:
            return kExitConfig;
        case ff::ErrorCode::kIo:
            return kExitIo;
        default:
            return kExitData;
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ff::Error(ff::ErrorCode::kIo, "cannot create '" + dir + "': " + ec.message());
}

nlohmann::json eval_to_json(const ff::EvalResult& e) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& s : e.per_class) per_class.push_back(s.f1);
    return {{"macro_f1", e.macro_f1},
            {"macro_auc", std::isnan(e.macro_auc) ? nlohmann::json(nullptr) : nlohmann::json(e.macro_auc)},
            {"per_class_f1", per_class},
            {"confusion", e.confusion}};
}

struct SynthArgs {
    double scale = 0.1;
    std::uint64_t seed = 0;
    std::size_t dim = 32;
    int clients = 4;
    std::string out_dir = "data";
};

void cmd_synth(const SynthArgs& a) {
    if (a.clients < 1 || a.clients > 4) throw ff::Error(ff::ErrorCode::kConfig, "--clients must be in [1, 4]");
    auto profiles = ff::default_profiles(a.scale);
    profiles.resize(static_cast<std::size_t>(a.clients));
    ff::SynthOptions opts;
    opts.dim = a.dim;
    const auto fd = ff::synth(profiles, a.seed, opts);
    ensure_dir(a.out_dir);
    for (std::size_t k = 0; k < fd.clients.size(); ++k) {
        const auto& c = fd.clients[k];
        const auto path = (std::filesystem::path(a.out_dir) / ("client_" + std::to_string(k) + ".fsd")).string();
        ff::write_dataset_file(path, c);
        std::cout << path << "  " << c.profile.name << "  train " << c.train.size() << "  val " << c.val.size()
                  << "  test " << c.test.size() << "\n";
    }
    const auto ood = ff::ood_client(profiles, a.seed, opts);
    const auto path = (std::filesystem::path(a.out_dir) / "ood.fsd").string();
    ff::write_dataset_file(path, ood);
    std::cout << path << "  " << ood.profile.name << "  samples " << ood.samples.size() << "\n";
}

struct RunArgs {
    std::string config;
    int workers = 1;
    std::string out_dir;
};

void cmd_run(const RunArgs& a) {
    auto cfg = ff::load_config(a.config);
    if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
    if (cfg.output_dir.empty()) cfg.output_dir = "run";
    const auto result = ff::run_experiment(cfg, ff::RunOptions{a.workers, true});
    std::cout << ff::summarize_run(cfg.output_dir);
}

struct AggregateArgs {
    std::string strategy = "pfa";
    double r = 0.35;
    std::vector<std::string> inputs;
    std::string out_dir = "aggregated";
};

void cmd_aggregate(const AggregateArgs& a) {
    ff::AggregationRequest req;
    req.r = a.r;
    if (a.strategy == "pfa") {
        req.kind = ff::AggregationKind::kPfa;
    } else if (a.strategy == "fedavg") {
        req.kind = ff::AggregationKind::kFedAvg;
    } else {
        throw ff::Error(ff::ErrorCode::kConfig, "--strategy must be 'pfa' or 'fedavg'");
    }
    if (req.kind == ff::AggregationKind::kPfa && !(a.r > 0.0 && a.r < 0.5)) {
        throw ff::Error(ff::ErrorCode::kConfig, "--r must lie in (0, 0.5)");
    }
    std::string spec_id;
    for (const auto& path : a.inputs) {
        auto ck = ff::load_checkpoint(path);
        if (!spec_id.empty() && ck.spec_id != spec_id) {
            throw ff::Error(ff::ErrorCode::kInvalidRequest, "checkpoints come from different model specs");
        }
        spec_id = ck.spec_id;
        req.client_params.push_back(std::move(ck.params));
    }
    ensure_dir(a.out_dir);
    if (req.kind == ff::AggregationKind::kPfa) {
        const auto out = ff::pfa_aggregate(req);
        for (std::size_t k = 0; k < out.size(); ++k) {
            const auto path = (std::filesystem::path(a.out_dir) / ("client_" + std::to_string(k) + ".ckpt")).string();
            ff::save_checkpoint(out[k], path, spec_id);
            std::cout << path << "\n";
        }
    } else {
        const auto path = (std::filesystem::path(a.out_dir) / "global.ckpt").string();
        ff::save_checkpoint(ff::fedavg_aggregate(req), path, spec_id);
        std::cout << path << "\n";
    }
}

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string split = "test";
};

void cmd_eval(const EvalArgs& a) {
    const auto ck = ff::load_checkpoint(a.checkpoint);
    const auto data = ff::read_dataset_file(a.data);
    ff::Dataset subset;
    if (a.split == "train") subset = data.train;
    else if (a.split == "val") subset = data.val;
    else if (a.split == "test") subset = data.test;
    else if (a.split == "all") subset = data.all();
    else throw ff::Error(ff::ErrorCode::kConfig, "--split must be train, val, test or all");

    const auto spec = ff::make_model_spec(ck.spec_id, data.train.dim, data.train.classes);
    ff::require_same_structure(ff::init_params(spec, 0), ck.params, ff::ErrorCode::kInvalidCheckpoint,
                               "checkpoint vs model spec '" + ck.spec_id + "'");
    const auto result = ff::evaluate_model(ck.params, spec, subset);
    nlohmann::json j = eval_to_json(result);
    j["split"] = a.split;
    j["samples"] = subset.size();
    std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated learning simulator with frequency-domain aggregation and deputy transfer"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth-data", "Generate synthetic heterogeneous client datasets");
    synth->add_option("--scale", synth_args.scale, "Fraction of the reference client sizes")->capture_default_str();
    synth->add_option("--seed", synth_args.seed, "Global seed")->capture_default_str();
    synth->add_option("--dim", synth_args.dim, "Feature dimension")->capture_default_str();
    synth->add_option("--clients", synth_args.clients, "Number of clients (1-4)")->capture_default_str();
    synth->add_option("--out-dir", synth_args.out_dir, "Output directory")->capture_default_str();

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run an experiment from a key = value config file");
    run->add_option("--config", run_args.config, "Config file")->required();
    run->add_option("--workers", run_args.workers, "Client worker threads")->capture_default_str();
    run->add_option("--out-dir", run_args.out_dir, "Override output_dir");

    AggregateArgs agg_args;
    auto* agg = app.add_subcommand("aggregate", "Aggregate client checkpoints offline");
    agg->add_option("--strategy", agg_args.strategy, "pfa or fedavg")->capture_default_str();
    agg->add_option("--r", agg_args.r, "Low-frequency threshold for pfa")->capture_default_str();
    agg->add_option("--out-dir", agg_args.out_dir, "Output directory")->capture_default_str();
    agg->add_option("inputs", agg_args.inputs, "Client checkpoint files")->required();

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset file");
    eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")->required();
    eval->add_option("--data", eval_args.data, "Dataset file (FSD1)")->required();
    eval->add_option("--split", eval_args.split, "train, val, test or all")->capture_default_str();

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarize a run directory");
    report->add_option("--dir", report_dir, "Run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*synth) cmd_synth(synth_args);
        if (*run) cmd_run(run_args);
        if (*agg) cmd_aggregate(agg_args);
        if (*eval) cmd_eval(eval_args);
        if (*report) std::cout << ff::summarize_run(report_dir);
    } catch (const ff::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
