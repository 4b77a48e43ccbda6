#include "fourierfed/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace fourierfed {
namespace {

using nlohmann::json;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json num_json(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json eval_json(const EvalResult& e) {
    json per_class = json::array();
    for (const auto& s : e.per_class) {
        per_class.push_back({{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}});
    }
    return {{"macro_f1", e.macro_f1},
            {"macro_auc", num_json(e.macro_auc)},
            {"per_class", per_class},
            {"confusion", e.confusion}};
}

json config_json(const ExperimentConfig& c) {
    return {{"strategy", to_string(c.strategy)},
            {"K", c.K},
            {"E", c.E},
            {"T", c.T},
            {"model_spec", c.model_spec},
            {"r0", c.r0},
            {"r1", c.r1},
            {"lambda1", c.lambda1},
            {"lambda2", c.lambda2},
            {"fedprox_mu", c.fedprox_mu},
            {"batch_size", c.batch_size},
            {"base_lr", c.base_lr},
            {"lr_halving_period", c.lr_halving_period},
            {"data_scale", c.data_scale},
            {"seed", c.seed}};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace

std::string curves_csv(const ExperimentResult& result) {
    std::ostringstream os;
    os << kCurvesHeader << '\n';
    for (const auto& r : result.log) {
        os << r.epoch << ',' << r.client << ',' << (r.phase ? to_string(*r.phase) : "NONE") << ',' << num(r.ce_loss)
           << ',' << num(r.kl_loss) << ',' << num(r.phi_d) << ',' << num(r.phi_p) << ',' << num(r.r) << ','
           << (r.comm_event ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string results_json(const ExperimentResult& result, bool include_timestamp) {
    json clients = json::array();
    for (const auto& c : result.clients) {
        clients.push_back({{"client", c.client},
                           {"name", c.name},
                           {"best_epoch", c.best_epoch},
                           {"best_val_f1", c.best_val_f1},
                           {"test", eval_json(c.test)},
                           {"ood", eval_json(c.ood)},
                           {"mean_boundary_delta", num_json(c.mean_boundary_delta)},
                           {"mean_next_epoch_delta", num_json(c.mean_next_epoch_delta)},
                           {"mean_deputy_drop", num_json(c.mean_deputy_drop)}});
    }
    json j{{"config", config_json(result.config)},
           {"seed", result.config.seed},
           {"strategy", to_string(result.config.strategy)},
           {"completed", result.completed},
           {"epochs_completed", result.epochs_completed},
           {"aggregation_events", result.aggregation_events},
           {"clients", clients},
           {"macro", {{"f1", num_json(result.macro_f1)},
                      {"auc", num_json(result.macro_auc)},
                      {"ood_f1", num_json(result.ood_macro_f1)},
                      {"ood_auc", num_json(result.ood_macro_auc)}}}};
    if (include_timestamp) j["generated_at"] = utc_timestamp();
    return j.dump(2) + "\n";
}

void emit_report(const ExperimentResult& result, const std::string& dir) {
    const std::filesystem::path root(dir);
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create '" + root.string() + "': " + ec.message());
    write_text(root / "curves.csv", curves_csv(result));
    write_text(root / "results.json", results_json(result));
    write_text(root / "config.echo", to_config_text(result.config));
}

std::string summarize_run(const std::string& dir) {
    const auto path = std::filesystem::path(dir) / "results.json";
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kInvalidDataset, "malformed results.json: " + std::string(e.what()));
    }

    auto pct = [](const json& v) -> std::string {
        if (v.is_null()) return "    -";
        char buf[16];
        std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v.get<double>());
        return buf;
    };
    std::ostringstream os;
    os << "strategy " << j.value("strategy", "?") << ", seed " << j.value("seed", 0) << ", epochs "
       << j.value("epochs_completed", 0) << ", aggregations " << j.value("aggregation_events", 0) << "\n\n";
    os << "client   test F1  test AUC   OOD F1  OOD AUC  boundary dF1\n";
    for (const auto& c : j.at("clients")) {
        os << std::left << std::setw(8) << c.value("name", "?") << std::right << "  " << pct(c["test"]["macro_f1"])
           << "    " << pct(c["test"]["macro_auc"]) << "   " << pct(c["ood"]["macro_f1"]) << "   "
           << pct(c["ood"]["macro_auc"]) << "        " << pct(c["mean_boundary_delta"]) << "\n";
    }
    const auto& m = j.at("macro");
    os << std::left << std::setw(8) << "Avg" << std::right << "  " << pct(m["f1"]) << "    " << pct(m["auc"]) << "   "
       << pct(m["ood_f1"]) << "   " << pct(m["ood_auc"]) << "\n";
    return os.str();
}

}  // namespace fourierfed
