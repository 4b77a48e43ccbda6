#include "fourierfed/data_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "fourierfed/error.hpp"
#include "fourierfed/training.hpp"

namespace fourierfed {
namespace {

constexpr std::size_t kClasses = 3;
constexpr std::array<double, 3> kSplitRatio{0.7, 0.1, 0.2};
constexpr std::uint64_t kPurposeClassMeans = 11;
constexpr std::uint64_t kPurposeSamples = 12;

std::vector<std::vector<double>> class_means(std::uint64_t global_seed, const SynthOptions& opts) {
    Rng rng = make_rng(global_seed, 0, kPurposeClassMeans);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> means(kClasses, std::vector<double>(opts.dim));
    for (auto& m : means) {
        double norm = 0.0;
        for (auto& v : m) {
            v = normal(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : m) v *= opts.class_separation / norm;
    }
    return means;
}

void apply_transform(const ClientProfile& p, std::span<double> x) {
    const std::size_t dim = x.size();
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dim));
    for (std::size_t d = 0; d < dim; ++d) {
        x[d] *= 1.0 + p.scale_spread * std::cos(2.0 * std::numbers::pi * static_cast<double>(d) / static_cast<double>(dim));
    }
    const double theta = p.rotation_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t d = 0; d + 1 < dim; d += 2) {
        const double a = x[d], b = x[d + 1];
        x[d] = c * a - s * b;
        x[d + 1] = s * a + c * b;
    }
    for (std::size_t d = 0; d < dim; ++d) x[d] += p.shift * ((d % 2 == 0) ? inv_sqrt : -inv_sqrt);
}

}  // namespace

void ClientProfile::validate() const {
    if (proportions.size() != kClasses) {
        throw Error(ErrorCode::kInvalidDataset, "profile '" + name + "' needs one proportion per class");
    }
    double sum = 0.0;
    for (double v : proportions) {
        if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidDataset, "profile '" + name + "' has a negative proportion");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::kInvalidDataset, "profile '" + name + "' proportions do not sum to 1");
    }
    if (samples < 30) throw Error(ErrorCode::kInvalidDataset, "profile '" + name + "' has fewer than 30 samples");
}

std::vector<ClientProfile> default_profiles(double scale) {
    if (!(scale > 0.0 && scale <= 1.0)) throw Error(ErrorCode::kInvalidScale, "scale must lie in (0, 1]");
    static constexpr std::array<const char*, 4> names{"A", "B", "C", "D"};
    static constexpr std::array<double, 4> rotation{0.0, 25.0, 50.0, 75.0};
    static constexpr std::array<double, 4> spread{0.0, 0.1, 0.2, 0.3};
    static constexpr std::array<double, 4> shift{0.0, 0.4, 0.8, 1.2};

    std::vector<ClientProfile> out;
    for (std::size_t k = 0; k < kReferenceClassCounts.size(); ++k) {
        const auto& counts = kReferenceClassCounts[k];
        const auto total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
        ClientProfile p;
        p.name = names[k];
        p.samples = static_cast<std::size_t>(std::floor(scale * total + 0.5));
        for (auto c : counts) p.proportions.push_back(static_cast<double>(c) / total);
        p.rotation_deg = rotation[k];
        p.scale_spread = spread[k];
        p.shift = shift[k];
        p.seed = k + 1;
        if (p.samples < 30) {
            throw Error(ErrorCode::kInvalidScale, "scale " + std::to_string(scale) + " leaves client " + p.name +
                                                      " with " + std::to_string(p.samples) + " samples (< 30)");
        }
        out.push_back(std::move(p));
    }
    return out;
}

ClientProfile ood_profile(const std::vector<ClientProfile>& profiles) {
    if (profiles.empty()) throw Error(ErrorCode::kInvalidDataset, "no profiles to derive the held-out client from");
    ClientProfile p;
    p.name = "OOD";
    p.proportions.assign(kClasses, 0.0);
    double total = 0.0;
    std::uint64_t max_seed = 0;
    for (const auto& q : profiles) {
        q.validate();
        for (std::size_t c = 0; c < kClasses; ++c) p.proportions[c] += q.proportions[c] * static_cast<double>(q.samples);
        total += static_cast<double>(q.samples);
        max_seed = std::max(max_seed, q.seed);
    }
    for (auto& v : p.proportions) v /= total;
    p.samples = static_cast<std::size_t>(std::floor(total / static_cast<double>(profiles.size()) + 0.5));
    p.rotation_deg = 110.0;
    p.scale_spread = 0.4;
    p.shift = 1.6;
    p.seed = max_seed + 1000;
    return p;
}

std::vector<std::size_t> largest_remainder(const std::vector<double>& weights, std::size_t total) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (weights.empty() || !(sum > 0.0)) throw Error(ErrorCode::kInvalidInput, "largest_remainder needs positive weights");
    std::vector<std::size_t> out(weights.size());
    std::vector<double> rem(weights.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double quota = static_cast<double>(total) * weights[i] / sum;
        out[i] = static_cast<std::size_t>(std::floor(quota));
        rem[i] = quota - static_cast<double>(out[i]);
        assigned += out[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++out[order[i % order.size()]];
    return out;
}

std::array<std::size_t, 3> split_sizes(std::size_t n) {
    const auto v = largest_remainder({kSplitRatio.begin(), kSplitRatio.end()}, n);
    return {v[0], v[1], v[2]};
}

std::vector<std::array<std::size_t, 3>> stratified_split_counts(const std::vector<std::size_t>& class_counts) {
    const std::size_t total = std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0});
    const auto target = split_sizes(total);

    std::vector<std::array<std::size_t, 3>> cells(class_counts.size());
    std::vector<std::array<double, 3>> ideal(class_counts.size());
    std::array<long, 3> col{0, 0, 0};
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        for (std::size_t s = 0; s < 3; ++s) ideal[c][s] = static_cast<double>(class_counts[c]) * kSplitRatio[s];
        if (class_counts[c] > 0) {
            const auto v = largest_remainder({kSplitRatio.begin(), kSplitRatio.end()}, class_counts[c]);
            for (std::size_t s = 0; s < 3; ++s) cells[c][s] = v[s];
        } else {
            cells[c] = {0, 0, 0};
        }
        for (std::size_t s = 0; s < 3; ++s) col[s] += static_cast<long>(cells[c][s]);
    }

    // Per-class rounding can miss the split totals; move single samples between splits
    // inside a class while every cell stays within 1 of its ideal value.
    auto can_take = [&](std::size_t c, std::size_t s) {
        return cells[c][s] > 0 && static_cast<double>(cells[c][s]) - 1.0 >= ideal[c][s] - 1.0;
    };
    auto can_give = [&](std::size_t c, std::size_t s) {
        return static_cast<double>(cells[c][s]) + 1.0 <= ideal[c][s] + 1.0;
    };
    for (int guard = 0; guard < 1000; ++guard) {
        std::size_t from = 3, to = 3;
        for (std::size_t s = 0; s < 3; ++s) {
            if (col[s] > static_cast<long>(target[s]) && from == 3) from = s;
            if (col[s] < static_cast<long>(target[s]) && to == 3) to = s;
        }
        if (from == 3) break;
        bool moved = false;
        for (std::size_t c = 0; c < cells.size() && !moved; ++c) {
            if (can_take(c, from) && can_give(c, to)) {
                --cells[c][from];
                ++cells[c][to];
                moved = true;
            }
        }
        // Two-hop move through the remaining split.
        const std::size_t mid = 3 - from - to;
        for (std::size_t c1 = 0; c1 < cells.size() && !moved; ++c1) {
            if (!(can_take(c1, from) && can_give(c1, mid))) continue;
            for (std::size_t c2 = 0; c2 < cells.size() && !moved; ++c2) {
                if (c2 == c1 || !(can_take(c2, mid) && can_give(c2, to))) continue;
                --cells[c1][from];
                ++cells[c1][mid];
                --cells[c2][mid];
                ++cells[c2][to];
                moved = true;
            }
        }
        if (!moved) throw Error(ErrorCode::kInvalidDataset, "could not balance the stratified split");
        --col[from];
        ++col[to];
    }
    return cells;
}

ClientData synth_client(const ClientProfile& profile, std::uint64_t global_seed, const SynthOptions& opts) {
    profile.validate();
    if (opts.dim < 2) throw Error(ErrorCode::kInvalidDataset, "feature dimension must be at least 2");
    const auto means = class_means(global_seed, opts);
    Rng rng = make_rng(global_seed, profile.seed, kPurposeSamples);
    std::normal_distribution<double> normal(0.0, 1.0);

    const auto counts = largest_remainder(profile.proportions, profile.samples);
    std::vector<int> labels;
    labels.reserve(profile.samples);
    for (std::size_t c = 0; c < kClasses; ++c) labels.insert(labels.end(), counts[c], static_cast<int>(c));
    std::shuffle(labels.begin(), labels.end(), rng);

    ClientData out;
    out.profile = profile;
    out.samples.dim = opts.dim;
    out.samples.classes = kClasses;
    out.samples.labels = labels;
    out.samples.features.resize(labels.size() * opts.dim);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::span<double> x(out.samples.features.data() + i * opts.dim, opts.dim);
        const auto& mu = means[static_cast<std::size_t>(labels[i])];
        for (std::size_t d = 0; d < opts.dim; ++d) x[d] = mu[d] + opts.noise * normal(rng);
        apply_transform(profile, x);
    }

    const auto split = stratified_split_counts(counts);
    for (std::size_t c = 0; c < kClasses; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (static_cast<std::size_t>(labels[i]) == c) members.push_back(i);
        std::shuffle(members.begin(), members.end(), rng);
        auto it = members.begin();
        out.train_idx.insert(out.train_idx.end(), it, it + static_cast<std::ptrdiff_t>(split[c][0]));
        it += static_cast<std::ptrdiff_t>(split[c][0]);
        out.val_idx.insert(out.val_idx.end(), it, it + static_cast<std::ptrdiff_t>(split[c][1]));
        it += static_cast<std::ptrdiff_t>(split[c][1]);
        out.test_idx.insert(out.test_idx.end(), it, it + static_cast<std::ptrdiff_t>(split[c][2]));
    }
    for (auto* idx : {&out.train_idx, &out.val_idx, &out.test_idx}) std::sort(idx->begin(), idx->end());
    out.train = out.samples.subset(out.train_idx);
    out.val = out.samples.subset(out.val_idx);
    out.test = out.samples.subset(out.test_idx);
    return out;
}

FederatedDataset synth(const std::vector<ClientProfile>& profiles, std::uint64_t global_seed, const SynthOptions& opts) {
    if (profiles.empty()) throw Error(ErrorCode::kInvalidDataset, "no client profiles");
    FederatedDataset fd;
    fd.dim = opts.dim;
    fd.classes = kClasses;
    for (const auto& p : profiles) fd.clients.push_back(synth_client(p, global_seed, opts));
    return fd;
}

ClientData ood_client(const std::vector<ClientProfile>& profiles, std::uint64_t global_seed, const SynthOptions& opts) {
    return synth_client(ood_profile(profiles), global_seed, opts);
}

}  // namespace fourierfed
