#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fourierfed/dataset.hpp"

namespace fourierfed {

/// Generator settings for one client. Samples are class-conditional Gaussians
/// x0 = mu_y + noise * z, mapped through the client transform
///   x = R(rotation) (s * x0) + b,
/// where R rotates every coordinate plane (2i, 2i+1) by the same angle,
/// s_d = 1 + scale_spread * cos(2 pi d / D) and b_d = shift * (-1)^d / sqrt(D).
struct ClientProfile {
    std::string name;
    std::size_t samples = 0;
    std::vector<double> proportions;  // one entry per class, sums to 1
    double rotation_deg = 0.0;
    double scale_spread = 0.0;
    double shift = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthOptions {
    std::size_t dim = 32;
    double class_separation = 3.0;  // norm of every class mean
    double noise = 1.0;
};

struct ClientData {
    ClientProfile profile;
    Dataset samples;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    std::vector<std::size_t> test_idx;
    Dataset train;
    Dataset val;
    Dataset test;
};

struct FederatedDataset {
    std::size_t dim = 0;
    std::size_t classes = 0;
    std::vector<ClientData> clients;
};

/// Per-class sample counts of the four-site dermoscopic benchmark (nevus, benign keratosis,
/// melanoma), which the default profiles mirror.
inline constexpr std::array<std::array<std::size_t, 3>, 4> kReferenceClassCounts{{
    {1832, 475, 680},
    {3720, 124, 24},
    {803, 490, 342},
    {1372, 254, 374},
}};

/// Four clients with sample counts round(scale * reference total) (half up), reference class
/// ratios, and rotations 0/25/50/75 degrees. Throws kInvalidScale outside (0, 1] or when a
/// client would get fewer than 30 samples.
std::vector<ClientProfile> default_profiles(double scale);

/// Held-out profile: rotation 110 degrees, pooled class ratios, mean sample count.
ClientProfile ood_profile(const std::vector<ClientProfile>& profiles);

/// Floor of each quota plus one unit to the largest remainders (ties to the lower index).
std::vector<std::size_t> largest_remainder(const std::vector<double>& weights, std::size_t total);

/// 7:1:2 sizes for n samples.
std::array<std::size_t, 3> split_sizes(std::size_t n);

/// Class x split counts: rows sum to the class counts, columns to split_sizes(total), and
/// every cell is within 1 of class_count * ratio.
std::vector<std::array<std::size_t, 3>> stratified_split_counts(const std::vector<std::size_t>& class_counts);

ClientData synth_client(const ClientProfile& profile, std::uint64_t global_seed, const SynthOptions& opts = {});

/// Deterministic in (profiles, global_seed). Class means depend only on global_seed; each
/// client's draws depend only on (global_seed, profile.seed).
FederatedDataset synth(const std::vector<ClientProfile>& profiles, std::uint64_t global_seed,
                       const SynthOptions& opts = {});

ClientData ood_client(const std::vector<ClientProfile>& profiles, std::uint64_t global_seed,
                      const SynthOptions& opts = {});

}  // namespace fourierfed
