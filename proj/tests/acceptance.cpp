// Acceptance runner. `acceptance <n>` checks criterion n (1-10), `acceptance all` runs every
// criterion. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fourierfed/checkpoint.hpp"
#include "fourierfed/det_client.hpp"
#include "fourierfed/experiment.hpp"
#include "fourierfed/freq_agg.hpp"
#include "fourierfed/metrics.hpp"
#include "fourierfed/numerics.hpp"
#include "fourierfed/report.hpp"
#include "gradcheck.hpp"
#include "metric_oracles.hpp"
#include "oracles.hpp"

using namespace fourierfed;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
    }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

RealMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::normal_distribution<double> n(0.0, 1.0);
    RealMatrix m(r, c);
    for (auto& v : m.data()) v = n(rng);
    return m;
}

// 1: transform invariants on 200 random matrices.
Outcome transforms() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> dim(1, 32);
    double round = 0, herm = 0, pars = 0, lin = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t R = dim(rng), C = dim(rng);
        const auto a = random_matrix(rng, R, C), b = random_matrix(rng, R, C);
        const auto fa = dft2(a), fb = dft2(b);
        const auto back = idft2(fa).values;
        for (std::size_t k = 0; k < a.size(); ++k) round = std::max(round, std::abs(back.data()[k] - a.data()[k]));
        for (std::size_t u = 0; u < R; ++u)
            for (std::size_t v = 0; v < C; ++v)
                herm = std::max(herm, std::abs(fa(u, v) - std::conj(fa((R - u) % R, (C - v) % C))));
        double es = 0, ef = 0;
        for (double v : a.data()) es += v * v;
        for (const auto& z : fa.data()) ef += std::norm(z);
        pars = std::max(pars, std::abs(es - ef / static_cast<double>(R * C)) / es);
        RealMatrix mix(R, C);
        for (std::size_t k = 0; k < mix.size(); ++k) mix.data()[k] = 2.5 * a.data()[k] - 0.75 * b.data()[k];
        const auto fm = dft2(mix);
        for (std::size_t k = 0; k < fm.size(); ++k)
            lin = std::max(lin, std::abs(fm.data()[k] - (2.5 * fa.data()[k] - 0.75 * fb.data()[k])));
    }
    const double secs = seconds_since(t0);
    o.require(round < 1e-9, fmt("round trip max error %.3g < 1e-9", round));
    o.require(herm < 1e-10, fmt("Hermitian symmetry max error %.3g < 1e-10", herm));
    o.require(pars < 1e-6, fmt("Parseval max relative error %.3g < 1e-6", pars));
    o.require(lin < 1e-9, fmt("linearity max error %.3g < 1e-9", lin));
    o.require(secs < 30.0, fmt("runtime %.2f s < 30 s", secs));
    return o;
}

// 2: aggregation against the direct-sum oracle.
Outcome pfa_oracle() {
    Outcome o;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> small(1, 4), k5(1, 5), fc(1, 64);
    std::uniform_real_distribution<double> rr(0.02, 0.49);
    double worst = 0.0;
    int cases = 0;
    auto check = [&](std::vector<std::size_t> conv, std::vector<std::size_t> mat, int K, double r) {
        std::vector<NamedTensorMap> maps;
        for (int k = 0; k < K; ++k)
            maps.push_back({{"conv.weight", oracle::random_tensor(rng, conv)},
                            {"conv.bias", oracle::random_tensor(rng, {conv[0]})},
                            {"fc.weight", oracle::random_tensor(rng, mat)}});
        const auto got = pfa_aggregate({maps, r, AggregationKind::kPfa});
        const auto want = oracle::pfa_maps(maps, r);
        for (int k = 0; k < K; ++k) worst = std::max(worst, max_abs_diff(got[k], want[k]));
        ++cases;
    };
    for (int K : {2, 3}) {
        check({4, 4, 5, 5}, {64, 64}, K, 0.35);
        check({4, 4, 5, 5}, {64, 64}, K, 0.48);
        for (int i = 0; i < 6; ++i) check({small(rng), small(rng), k5(rng), k5(rng)}, {fc(rng), fc(rng)}, K, rr(rng));
    }
    const double secs = seconds_since(t0);
    o.require(worst < 1e-8, fmt("max error vs oracle %.3g < 1e-8", worst) + " over " + std::to_string(cases) + " cases");
    o.require(secs < 120.0, fmt("runtime %.2f s < 120 s", secs));
    return o;
}

// 3: identical clients are a fixed point.
Outcome consensus() {
    Outcome o;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> kd(1, 5);
    std::uniform_real_distribution<double> rr(0.01, 0.49);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const auto spec = i % 2 ? make_model_spec("conv", 32) : make_model_spec("mlp", 32);
        auto p = init_params(spec, static_cast<std::uint64_t>(i));
        for (auto& [n, t] : p)
            for (auto& v : t.data) v += std::normal_distribution<double>(0.0, 0.1)(rng);
        const int K = kd(rng);
        const auto out = pfa_aggregate({std::vector<NamedTensorMap>(static_cast<std::size_t>(K), p), rr(rng),
                                        AggregationKind::kPfa});
        for (const auto& m : out) worst = std::max(worst, max_abs_diff(m, p));
    }
    o.require(worst < 1e-8, fmt("max deviation from the shared input %.3g < 1e-8 (20 parameter sets)", worst));
    return o;
}

// 4: finite-difference checks under CE and both client objectives.
Outcome gradients() {
    Outcome o;
    const auto t0 = Clock::now();
    ModelSpec deep{"deepconv", {2, 5, 5}, 3,
                   {LayerSpec::conv2d("c1", 2, 3, 2, 2), LayerSpec::relu(), LayerSpec::conv2d("c2", 3, 2, 2, 2),
                    LayerSpec::flatten(), LayerSpec::dense("fc", 18, 3), LayerSpec::softmax_output()}};
    const std::vector<ModelSpec> specs{mlp_spec(4, 3, 8, 6), conv_spec(4, 5, 3, 2), deep};
    std::map<std::string, double> worst;
    for (const auto& spec : specs) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            std::mt19937_64 rng(seed);
            const auto b = gradcheck::random_batch(rng, 5, spec.input_size(), 3);
            auto s = make_client_state(0, gradcheck::scaled_init(spec, seed, 1.0), OptimizerState{});
            s.deputy = gradcheck::scaled_init(spec, seed + 77, 1.0);
            auto& ce = worst["CE"];
            ce = std::max(ce, gradcheck::worst_error(s.personalized, gradcheck::ce_objective(spec, b)));
            for (auto ph : {DetPhase::kRecover, DetPhase::kExchange, DetPhase::kSublimate}) {
                s.phase = ph;
                auto& ld = worst["deputy objective"];
                ld = std::max(ld, gradcheck::worst_error(s.deputy, gradcheck::det_objective(spec, b, s, true)));
                auto& lp = worst["personalized objective"];
                lp = std::max(lp, gradcheck::worst_error(s.personalized, gradcheck::det_objective(spec, b, s, false)));
            }
        }
    }
    const double secs = seconds_since(t0);
    for (const auto& [name, e] : worst) o.require(e < 1e-4, name + fmt(": worst relative error %.3g < 1e-4", e));
    o.require(secs < 120.0, fmt("runtime %.2f s < 120 s", secs));
    return o;
}

// 5: phase machine.
Outcome state_machine() {
    Outcome o;
    const DetConfig cfg{0.7, 0.9};
    std::size_t mismatches = 0, checked = 0;
    for (int cur = 0; cur < 3; ++cur)
        for (int d = 0; d <= 200; ++d)
            for (int p = 0; p <= 200; ++p) {
                // integer reading of phi_d >= lambda * phi_p
                DetPhase want = 20 * d >= 18 * p   ? DetPhase::kSublimate
                                : 20 * d >= 14 * p ? DetPhase::kExchange
                                                   : DetPhase::kRecover;
                if (want < static_cast<DetPhase>(cur)) want = static_cast<DetPhase>(cur);
                mismatches += det_phase_transition(d / 200.0, p / 200.0, cfg, static_cast<DetPhase>(cur)) != want;
                ++checked;
            }
    o.require(mismatches == 0, std::to_string(checked) + " grid points, " + std::to_string(mismatches) + " mismatches");

    DetPhase ph = DetPhase::kRecover;
    std::vector<DetPhase> trace;
    for (double f : {0.5, 0.75, 0.95, 0.6}) trace.push_back(ph = det_phase_transition(f * 0.8, 0.8, cfg, ph));
    o.require(trace == std::vector<DetPhase>{DetPhase::kRecover, DetPhase::kExchange, DetPhase::kSublimate,
                                             DetPhase::kSublimate},
              "scripted sequence RECOVER -> EXCHANGE -> SUBLIMATE, no regression");
    o.require(det_phase_transition(0.7, 1.0, cfg, DetPhase::kRecover) == DetPhase::kExchange &&
                  det_phase_transition(0.9, 1.0, cfg, DetPhase::kRecover) == DetPhase::kSublimate,
              "boundary-inclusive triggers");
    o.require(det_phase_transition(0.0, 0.0, cfg, DetPhase::kRecover) == DetPhase::kSublimate,
              "zero personal score jumps to SUBLIMATE");

    const auto spec = mlp_spec(4, 3, 8, 6);
    auto s = make_client_state(0, init_params(spec, 1), OptimizerState{});
    s.phase = DetPhase::kSublimate;
    const auto p_before = s.personalized;
    receive_deputy(s, init_params(spec, 2));
    o.require(s.phase == DetPhase::kRecover && bit_equal(s.personalized, p_before),
              "deputy receipt resets to RECOVER and leaves p bit-identical");
    return o;
}

// 6: metric oracles.
Outcome metrics() {
    Outcome o;
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> cls(0, 2), len(1, 80), coarse(0, 9);
    std::size_t f1_bad = 0, auc_cases = 0;
    double auc_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto n = static_cast<std::size_t>(len(rng));
        std::vector<int> y(n), p(n);
        for (auto& v : y) v = cls(rng);
        for (auto& v : p) v = cls(rng);
        f1_bad += macro_f1(p, y, 3) != oracle::f1_by_counting(p, y, 3);
        RealMatrix s(n, 3);
        for (auto& v : s.data()) v = coarse(rng) / 9.0;
        const double want = oracle::auc_by_pairs(s, y, 3);
        if (std::isnan(want)) continue;
        auc_err = std::max(auc_err, std::abs(macro_auc(s, y, 3) - want));
        ++auc_cases;
    }
    o.require(f1_bad == 0, "macro F1 exact on 1000 cases (" + std::to_string(f1_bad) + " mismatches)");
    o.require(auc_err <= 1e-12, fmt("macro AUC max error %.3g <= 1e-12", auc_err) + " on " +
                                    std::to_string(auc_cases) + " defined cases");
    return o;
}

struct Sweep {
    std::vector<ExperimentResult> runs;
    double mean_f1() const {
        double s = 0;
        for (const auto& r : runs) s += r.macro_f1;
        return s / static_cast<double>(runs.size());
    }
    // per-client boundary change averaged over seeds
    std::vector<double> boundary() const {
        std::vector<double> out(runs.front().clients.size(), 0.0);
        for (const auto& r : runs)
            for (std::size_t k = 0; k < out.size(); ++k)
                out[k] += r.clients[k].mean_boundary_delta / static_cast<double>(runs.size());
        return out;
    }
};

constexpr int kSeeds = 5;

Sweep sweep(Strategy s) {
    Sweep out;
    for (int seed = 0; seed < kSeeds; ++seed) {
        ExperimentConfig cfg;
        cfg.strategy = s;
        cfg.K = 4;
        cfg.E = 5;
        cfg.T = 100;
        cfg.data_scale = 0.1;
        cfg.seed = static_cast<std::uint64_t>(seed);
        out.runs.push_back(run_experiment(cfg, RunOptions{4, false}));
    }
    return out;
}

std::string list(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += fmt(" %+.4f", x);
    return s;
}

// 7: drops at communication boundaries.
Outcome retrogress() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto fedavg = sweep(Strategy::kFedAvg).boundary();
    const auto ours = sweep(Strategy::kPfaDet).boundary();
    int negative = 0;
    for (double d : fedavg) negative += d < 0.0;
    bool nonneg = true;
    for (double d : ours) nonneg = nonneg && d >= 0.0;
    const double secs = seconds_since(t0);
    o.require(negative >= 3, "FEDAVG mean boundary change per client:" + list(fedavg) + " (" +
                                 std::to_string(negative) + "/4 negative, need >= 3)");
    o.require(nonneg, "PFA_DET personalized mean boundary change per client:" + list(ours) + " (need all >= 0)");
    o.require(secs < 600.0, fmt("runtime %.1f s < 600 s", secs));
    return o;
}

// 8: ordering of the final macro F1.
Outcome trends() {
    Outcome o;
    const auto t0 = Clock::now();
    std::map<Strategy, double> f1;
    for (auto s : {Strategy::kPfaDet, Strategy::kFedAvg, Strategy::kLocalOnly, Strategy::kPfa, Strategy::kFedAvgDet}) {
        f1[s] = sweep(s).mean_f1();
        o.notes.push_back(std::string("       ") + to_string(s) + fmt(" mean macro F1 %.4f", f1[s]));
    }
    const double ours = f1[Strategy::kPfaDet];
    o.require(ours >= f1[Strategy::kFedAvg] + 0.02,
              fmt("PFA_DET - FEDAVG = %+.4f (need >= +0.02)", ours - f1[Strategy::kFedAvg]));
    o.require(ours >= f1[Strategy::kLocalOnly],
              fmt("PFA_DET - LOCAL_ONLY = %+.4f (need >= 0)", ours - f1[Strategy::kLocalOnly]));
    const double ablation = std::max(f1[Strategy::kPfa], f1[Strategy::kFedAvgDet]);
    o.require(ours >= ablation, fmt("PFA_DET - max(PFA, FEDAVG_DET) = %+.4f (need >= 0)", ours - ablation));
    const double secs = seconds_since(t0);
    o.require(secs < 1800.0, fmt("runtime %.1f s < 1800 s", secs));
    return o;
}

// 9: determinism and persistence.
Outcome persistence() {
    Outcome o;
    for (auto s : {Strategy::kPfaDet, Strategy::kFedAvg}) {
        ExperimentConfig cfg;
        cfg.strategy = s;
        cfg.E = 5;
        cfg.T = 20;
        cfg.seed = 9;
        const auto a = results_json(run_experiment(cfg, RunOptions{1, false}), false);
        const auto b = results_json(run_experiment(cfg, RunOptions{1, false}), false);
        const auto c = results_json(run_experiment(cfg, RunOptions{4, false}), false);
        o.require(a == b, std::string(to_string(s)) + ": identical results.json metrics across two runs");
        o.require(a == c, std::string(to_string(s)) + ": identical results.json metrics with 1 and 4 workers");
    }
    const auto dir = std::filesystem::temp_directory_path() / "fourierfed_acceptance";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "model.ckpt").string();
    auto params = init_params(make_model_spec("conv", 32), 4);
    params.at("fc1.bias").data[0] = -0.0;
    save_checkpoint(params, path, "conv");
    const auto back = load_checkpoint(path);
    o.require(bit_equal(back.params, params) && back.spec_id == "conv", "checkpoint save/load is bit exact");

    auto bytes = encode_checkpoint(params, "conv");
    auto code = [](const std::vector<std::uint8_t>& b) {
        try {
            (void)decode_checkpoint(b);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::kInvalidInput;
    };
    auto flipped = bytes;
    flipped[flipped.size() / 2] ^= 0x10;
    const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 5);
    o.require(code(flipped) == ErrorCode::kCorruptCheckpoint && code(truncated) == ErrorCode::kCorruptCheckpoint,
              "flipped and truncated checkpoints are rejected");
    return o;
}

// 10: schedule endpoints.
Outcome schedules() {
    Outcome o;
    const ScheduleParams p{0.35, 0.48, 250};
    o.require(schedule_r(0, p) == 0.35, fmt("r(0) = %.17g", schedule_r(0, p)));
    o.require(schedule_r(250, p) == 0.48, fmt("r(T) = %.17g", schedule_r(250, p)));
    o.require(schedule_r(100, ScheduleParams{0.35, 0.48, 100}) == 0.48, "r(T) = 0.48 for T = 100");
    OptimizerState opt;
    std::string lrs;
    bool ok = true;
    for (auto [epoch, want] : {std::pair{0, 0.01}, {25, 0.005}, {50, 0.0025}}) {
        opt.epoch = epoch;
        ok = ok && opt.learning_rate() == want;
        lrs += fmt(" %.17g", opt.learning_rate());
    }
    o.require(ok, "lr at epochs 0/25/50:" + lrs);
    return o;
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria() {
    static const std::map<int, std::pair<const char*, std::function<Outcome()>>> table{
        {1, {"transform invariants", transforms}},
        {2, {"aggregation oracle equivalence", pfa_oracle}},
        {3, {"aggregation consensus identity", consensus}},
        {4, {"gradient checks", gradients}},
        {5, {"deputy phase machine", state_machine}},
        {6, {"metric oracles", metrics}},
        {7, {"boundary drops", retrogress}},
        {8, {"strategy ordering", trends}},
        {9, {"determinism and persistence", persistence}},
        {10, {"schedule endpoints", schedules}},
    };
    return table;
}

bool run_one(int n) {
    const auto& [name, fn] = criteria().at(n);
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o.require(false, std::string("threw: ") + e.what());
    }
    std::printf("criterion %d (%s): %s\n", n, name, o.pass ? "PASS" : "FAIL");
    for (const auto& line : o.notes) std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <1-10|all>\n", argv[0]);
        return 2;
    }
    const std::string arg = argv[1];
    if (arg == "all") {
        bool ok = true;
        for (const auto& [n, _] : criteria()) ok = run_one(n) && ok;
        return ok ? 0 : 1;
    }
    const int n = std::atoi(arg.c_str());
    if (!criteria().contains(n)) {
        std::fprintf(stderr, "unknown criterion '%s'\n", argv[1]);
        return 2;
    }
    return run_one(n) ? 0 : 1;
}
