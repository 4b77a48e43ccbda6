#include "fourierfed/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fourierfed/error.hpp"

namespace fourierfed {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    std::from_chars_result res{};
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars for double is incomplete in older libstdc++; strtod is locale-sensitive but fine here.
        char* end = nullptr;
        out = std::strtod(first, &end);
        res.ptr = end;
        res.ec = (end == first) ? std::errc::invalid_argument : std::errc{};
    } else {
        res = std::from_chars(first, last, out);
    }
    if (res.ec != std::errc{} || res.ptr != last) {
        throw Error(ErrorCode::kConfig, "key '" + key + "': cannot parse '" + value + "'");
    }
    return out;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

const char* to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::kPfaDet: return "PFA_DET";
        case Strategy::kFedAvg: return "FEDAVG";
        case Strategy::kFedProx: return "FEDPROX";
        case Strategy::kLocalOnly: return "LOCAL_ONLY";
        case Strategy::kPfa: return "PFA";
        case Strategy::kFedAvgDet: return "FEDAVG_DET";
    }
    return "UNKNOWN";
}

Strategy parse_strategy(std::string_view name) {
    for (auto s : {Strategy::kPfaDet, Strategy::kFedAvg, Strategy::kFedProx, Strategy::kLocalOnly, Strategy::kPfa,
                   Strategy::kFedAvgDet}) {
        if (name == to_string(s)) return s;
    }
    throw Error(ErrorCode::kConfig, "unknown strategy '" + std::string(name) + "'");
}

bool uses_deputy(Strategy s) noexcept { return s == Strategy::kPfaDet || s == Strategy::kFedAvgDet; }
bool uses_pfa(Strategy s) noexcept { return s == Strategy::kPfaDet || s == Strategy::kPfa; }

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
    if (K < 1 || K > 4) fail("K must be in [1, 4] (one per default client profile)");
    if (E < 1) fail("E must be >= 1");
    if (T < 1) fail("T must be >= 1");
    if (T % E != 0) fail("T must be divisible by E");
    if (model_spec != "mlp" && model_spec != "conv") fail("model_spec must be 'mlp' or 'conv'");
    if (!(r0 > 0.0 && r0 <= r1 && r1 < 0.5)) fail("require 0 < r0 <= r1 < 0.5");
    if (!(lambda1 > 0.0 && lambda1 < lambda2 && lambda2 < 1.0)) fail("require 0 < lambda1 < lambda2 < 1");
    if (!(fedprox_mu >= 0.0) || !std::isfinite(fedprox_mu)) fail("fedprox_mu must be finite and >= 0");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (!(base_lr > 0.0) || !std::isfinite(base_lr)) fail("base_lr must be > 0");
    if (lr_halving_period < 1) fail("lr_halving_period must be >= 1");
    if (!(data_scale > 0.0 && data_scale <= 1.0)) fail("data_scale must be in (0, 1]");
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"strategy", [&](auto&, auto& v) { cfg.strategy = parse_strategy(v); }},
        {"K", [&](auto& k, auto& v) { cfg.K = parse_number<int>(k, v); }},
        {"E", [&](auto& k, auto& v) { cfg.E = parse_number<int>(k, v); }},
        {"T", [&](auto& k, auto& v) { cfg.T = parse_number<int>(k, v); }},
        {"model_spec", [&](auto&, auto& v) { cfg.model_spec = v; }},
        {"r0", [&](auto& k, auto& v) { cfg.r0 = parse_number<double>(k, v); }},
        {"r1", [&](auto& k, auto& v) { cfg.r1 = parse_number<double>(k, v); }},
        {"lambda1", [&](auto& k, auto& v) { cfg.lambda1 = parse_number<double>(k, v); }},
        {"lambda2", [&](auto& k, auto& v) { cfg.lambda2 = parse_number<double>(k, v); }},
        {"fedprox_mu", [&](auto& k, auto& v) { cfg.fedprox_mu = parse_number<double>(k, v); }},
        {"batch_size", [&](auto& k, auto& v) { cfg.batch_size = parse_number<int>(k, v); }},
        {"base_lr", [&](auto& k, auto& v) { cfg.base_lr = parse_number<double>(k, v); }},
        {"lr_halving_period", [&](auto& k, auto& v) { cfg.lr_halving_period = parse_number<int>(k, v); }},
        {"data_scale", [&](auto& k, auto& v) { cfg.data_scale = parse_number<double>(k, v); }},
        {"seed", [&](auto& k, auto& v) { cfg.seed = parse_number<std::uint64_t>(k, v); }},
        {"output_dir", [&](auto&, auto& v) { cfg.output_dir = v; }},
    };

    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) {
            throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        if (!seen.insert(key).second) {
            throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        it->second(key, value);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string to_config_text(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "strategy = " << to_string(cfg.strategy) << '\n'
       << "K = " << cfg.K << '\n'
       << "E = " << cfg.E << '\n'
       << "T = " << cfg.T << '\n'
       << "model_spec = " << cfg.model_spec << '\n'
       << "r0 = " << format_double(cfg.r0) << '\n'
       << "r1 = " << format_double(cfg.r1) << '\n'
       << "lambda1 = " << format_double(cfg.lambda1) << '\n'
       << "lambda2 = " << format_double(cfg.lambda2) << '\n'
       << "fedprox_mu = " << format_double(cfg.fedprox_mu) << '\n'
       << "batch_size = " << cfg.batch_size << '\n'
       << "base_lr = " << format_double(cfg.base_lr) << '\n'
       << "lr_halving_period = " << cfg.lr_halving_period << '\n'
       << "data_scale = " << format_double(cfg.data_scale) << '\n'
       << "seed = " << cfg.seed << '\n';
    if (!cfg.output_dir.empty()) os << "output_dir = " << cfg.output_dir << '\n';
    return os.str();
}

}  // namespace fourierfed
