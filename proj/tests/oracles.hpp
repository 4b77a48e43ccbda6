// Brute-force reference implementations shared by the unit tests and the acceptance runner.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include "fourierfed/tensor.hpp"

namespace oracle {

using cd = std::complex<double>;

struct Grid {
    std::size_t rows = 0, cols = 0;
    std::vector<double> v;  // row-major
};

inline std::vector<cd> dft(const std::vector<cd>& x, std::size_t R, std::size_t C, bool inverse) {
    std::vector<cd> out(R * C);
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t u = 0; u < R; ++u)
        for (std::size_t v = 0; v < C; ++v) {
            cd acc{0.0, 0.0};
            for (std::size_t a = 0; a < R; ++a)
                for (std::size_t b = 0; b < C; ++b) {
                    // reduce the exponent mod the length first so large products stay exact
                    const double ang = sign * 2.0 * std::numbers::pi *
                                       (static_cast<double>((u * a) % R) / static_cast<double>(R) +
                                        static_cast<double>((v * b) % C) / static_cast<double>(C));
                    acc += x[a * C + b] * cd(std::cos(ang), std::sin(ang));
                }
            out[u * C + v] = inverse ? acc / static_cast<double>(R * C) : acc;
        }
    return out;
}

// Centered frequency of unshifted index u along an axis of length n.
inline long centered(std::size_t u, std::size_t n) {
    return u <= n / 2 ? static_cast<long>(u) : static_cast<long>(u) - static_cast<long>(n);
}

inline bool in_band(std::size_t u, std::size_t v, std::size_t R, std::size_t C, double r) {
    const long hr = static_cast<long>(std::floor(r * static_cast<double>(R)));
    const long hc = static_cast<long>(std::floor(r * static_cast<double>(C)));
    return std::labs(centered(u, R)) <= hr && std::labs(centered(v, C)) <= hc;
}

// Low-band amplitude averaging on plain grids, one output per client.
inline std::vector<Grid> pfa(const std::vector<Grid>& clients, double r) {
    const std::size_t R = clients[0].rows, C = clients[0].cols, K = clients.size();
    std::vector<std::vector<cd>> spectra;
    for (const auto& g : clients) {
        std::vector<cd> x(g.v.begin(), g.v.end());
        spectra.push_back(dft(x, R, C, false));
    }
    std::vector<double> mean_amp(R * C, 0.0);
    for (const auto& s : spectra)
        for (std::size_t i = 0; i < R * C; ++i) mean_amp[i] += std::abs(s[i]) / static_cast<double>(K);
    std::vector<Grid> out;
    for (const auto& s : spectra) {
        std::vector<cd> mixed(R * C);
        for (std::size_t u = 0; u < R; ++u)
            for (std::size_t v = 0; v < C; ++v) {
                const std::size_t i = u * C + v;
                const double amp = in_band(u, v, R, C, r) ? mean_amp[i] : std::abs(s[i]);
                const double ph = std::abs(s[i]) == 0.0 ? 0.0 : std::arg(s[i]);
                mixed[i] = std::polar(amp, ph);
            }
        const auto back = dft(mixed, R, C, true);
        Grid g{R, C, std::vector<double>(R * C)};
        for (std::size_t i = 0; i < R * C; ++i) g.v[i] = back[i].real();
        out.push_back(std::move(g));
    }
    return out;
}

// (n, c, x, y) -> row n*kh + x, column c*kw + y
inline Grid conv_to_grid(const fourierfed::Tensor& t) {
    const auto N = t.shape[0], Cc = t.shape[1], H = t.shape[2], W = t.shape[3];
    Grid g{N * H, Cc * W, std::vector<double>(t.data.size())};
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < Cc; ++c)
            for (std::size_t x = 0; x < H; ++x)
                for (std::size_t y = 0; y < W; ++y)
                    g.v[(n * H + x) * g.cols + c * W + y] = t.data[((n * Cc + c) * H + x) * W + y];
    return g;
}

inline fourierfed::Tensor grid_to_conv(const Grid& g, const std::vector<std::size_t>& shape) {
    fourierfed::Tensor t(shape);
    const auto Cc = shape[1], H = shape[2], W = shape[3];
    for (std::size_t n = 0; n < shape[0]; ++n)
        for (std::size_t c = 0; c < Cc; ++c)
            for (std::size_t x = 0; x < H; ++x)
                for (std::size_t y = 0; y < W; ++y)
                    t.data[((n * Cc + c) * H + x) * W + y] = g.v[(n * H + x) * g.cols + c * W + y];
    return t;
}

// Per-tensor reference for pfa_aggregate: conv kernels and matrices go through the band
// averaging, everything else is averaged element-wise.
inline std::vector<fourierfed::NamedTensorMap> pfa_maps(const std::vector<fourierfed::NamedTensorMap>& maps,
                                                        double r) {
    std::vector<fourierfed::NamedTensorMap> out(maps.size());
    for (const auto& [name, proto] : maps[0]) {
        if (proto.rank() == 4 || proto.rank() == 2) {
            std::vector<Grid> grids;
            for (const auto& m : maps) {
                const auto& t = m.at(name);
                grids.push_back(t.rank() == 4 ? conv_to_grid(t) : Grid{t.shape[0], t.shape[1], t.data});
            }
            const auto res = pfa(grids, r);
            for (std::size_t k = 0; k < maps.size(); ++k)
                out[k][name] = proto.rank() == 4 ? grid_to_conv(res[k], proto.shape)
                                                 : fourierfed::Tensor(proto.shape, res[k].v);
        } else {
            fourierfed::Tensor mean(proto.shape);
            for (const auto& m : maps)
                for (std::size_t i = 0; i < mean.data.size(); ++i)
                    mean.data[i] += m.at(name).data[i] / static_cast<double>(maps.size());
            for (auto& o : out) o[name] = mean;
        }
    }
    return out;
}

inline fourierfed::Tensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape) {
    std::normal_distribution<double> n(0.0, 1.0);
    fourierfed::Tensor t(std::move(shape));
    for (auto& v : t.data) v = n(rng);
    return t;
}

}  // namespace oracle
