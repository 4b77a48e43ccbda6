#include "fourierfed/freq_agg.hpp"

#include <algorithm>
#include <cmath>

namespace fourierfed {
namespace {

void validate_request(const AggregationRequest& req, AggregationKind expected) {
    if (req.kind != expected) {
        throw Error(ErrorCode::kInvalidRequest, "aggregation request has the wrong strategy");
    }
    if (req.client_params.empty()) {
        throw Error(ErrorCode::kInvalidRequest, "aggregation needs at least one client");
    }
    for (std::size_t k = 1; k < req.client_params.size(); ++k) {
        require_same_structure(req.client_params[0], req.client_params[k], ErrorCode::kInvalidRequest,
                               "client " + std::to_string(k));
    }
}

std::vector<double> mean_over_clients(const std::vector<NamedTensorMap>& clients, const std::string& name) {
    const auto& first = clients.front().at(name).data;
    std::vector<double> mean(first.size(), 0.0);
    for (const auto& c : clients) {
        const auto& v = c.at(name).data;
        for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
    }
    const double inv = 1.0 / static_cast<double>(clients.size());
    for (auto& m : mean) m *= inv;
    return mean;
}

}  // namespace

ConvShape ConvShape::from_tensor(const Tensor& t) {
    if (t.rank() != 4) {
        throw Error(ErrorCode::kInvalidShape, "conv kernel must be rank 4, got " + shape_to_string(t.shape));
    }
    return {t.shape[0], t.shape[1], t.shape[2], t.shape[3]};
}

RealMatrix reshape_conv(std::span<const double> w, const ConvShape& s) {
    if (s.out_channels == 0 || s.in_channels == 0 || s.kernel_h == 0 || s.kernel_w == 0) {
        throw Error(ErrorCode::kInvalidShape, "conv shape dimensions must be positive");
    }
    if (w.size() != s.numel()) {
        throw Error(ErrorCode::kInvalidShape, "conv tensor has " + std::to_string(w.size()) +
                                                  " elements, shape requires " + std::to_string(s.numel()));
    }
    RealMatrix m(s.kernel_h * s.out_channels, s.kernel_w * s.in_channels);
    std::size_t i = 0;
    for (std::size_t n = 0; n < s.out_channels; ++n)
        for (std::size_t c = 0; c < s.in_channels; ++c)
            for (std::size_t x = 0; x < s.kernel_h; ++x)
                for (std::size_t y = 0; y < s.kernel_w; ++y) m(n * s.kernel_h + x, c * s.kernel_w + y) = w[i++];
    return m;
}

RealMatrix reshape_conv(const Tensor& weights) {
    return reshape_conv(weights.data, ConvShape::from_tensor(weights));
}

Tensor unreshape_conv(const RealMatrix& m, const ConvShape& s) {
    if (m.rows() != s.kernel_h * s.out_channels || m.cols() != s.kernel_w * s.in_channels) {
        throw Error(ErrorCode::kInvalidShape, "matrix dimensions do not match conv shape");
    }
    Tensor t({s.out_channels, s.in_channels, s.kernel_h, s.kernel_w});
    std::size_t i = 0;
    for (std::size_t n = 0; n < s.out_channels; ++n)
        for (std::size_t c = 0; c < s.in_channels; ++c)
            for (std::size_t x = 0; x < s.kernel_h; ++x)
                for (std::size_t y = 0; y < s.kernel_w; ++y) t.data[i++] = m(n * s.kernel_h + x, c * s.kernel_w + y);
    return t;
}

FreqMask::FreqMask(std::size_t rows, std::size_t cols, double r) : rows_(rows), cols_(cols), r_(r) {
    if (!(r > 0.0 && r < 0.5)) {
        throw Error(ErrorCode::kInvalidThreshold, "low-frequency threshold must lie in (0, 0.5), got " +
                                                      std::to_string(r));
    }
    if (rows == 0 || cols == 0) throw Error(ErrorCode::kInvalidShape, "mask dimensions must be positive");
    half_rows_ = static_cast<std::size_t>(std::floor(r * static_cast<double>(rows)));
    half_cols_ = static_cast<std::size_t>(std::floor(r * static_cast<double>(cols)));

    centered_ = Matrix<unsigned char>(rows, cols, 0);
    const long row_origin = static_cast<long>(rows / 2);
    const long col_origin = static_cast<long>(cols / 2);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            centered_(i, j) = contains_centered(static_cast<long>(i) - row_origin, static_cast<long>(j) - col_origin);

    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (contains(i, j)) unshifted_.emplace_back(i, j);
}

bool FreqMask::contains_centered(long m, long n) const noexcept {
    return static_cast<std::size_t>(std::labs(m)) <= half_rows_ && static_cast<std::size_t>(std::labs(n)) <= half_cols_;
}

bool FreqMask::contains(std::size_t row, std::size_t col) const noexcept {
    // Distance to DC on the circular frequency axis.
    const std::size_t fm = std::min(row, rows_ - row);
    const std::size_t fn = std::min(col, cols_ - col);
    return fm <= half_rows_ && fn <= half_cols_;
}

FreqMask low_freq_mask(std::size_t rows, std::size_t cols, double r) { return FreqMask(rows, cols, r); }

void ScheduleParams::validate() const {
    if (!(r0 > 0.0 && r0 <= r1 && r1 < 0.5)) {
        throw Error(ErrorCode::kInvalidThreshold, "schedule requires 0 < r0 <= r1 < 0.5");
    }
    if (total_epochs < 1) throw Error(ErrorCode::kInvalidEpoch, "schedule requires T >= 1");
}

double schedule_r(int t, const ScheduleParams& p) {
    p.validate();
    if (t < 0 || t > p.total_epochs) {
        throw Error(ErrorCode::kInvalidEpoch,
                    "epoch " + std::to_string(t) + " outside [0, " + std::to_string(p.total_epochs) + "]");
    }
    const double r = p.r0 + (p.r1 - p.r0) * static_cast<double>(t) / static_cast<double>(p.total_epochs);
    constexpr double eps = 1e-6;
    return std::clamp(r, eps, 0.5 - eps);
}

std::vector<RealMatrix> pfa_matrices(std::span<const RealMatrix> clients, double r) {
    if (clients.empty()) throw Error(ErrorCode::kInvalidRequest, "aggregation needs at least one client");
    const std::size_t rows = clients[0].rows();
    const std::size_t cols = clients[0].cols();
    for (const auto& c : clients) {
        if (c.rows() != rows || c.cols() != cols) {
            throw Error(ErrorCode::kInvalidRequest, "client matrices differ in shape");
        }
    }
    const FreqMask mask(rows, cols, r);

    std::vector<AmpPhase> spectra;
    spectra.reserve(clients.size());
    for (const auto& c : clients) spectra.push_back(amp_phase(dft2(c)));

    const double inv_k = 1.0 / static_cast<double>(clients.size());
    for (const auto& [i, j] : mask.unshifted_indices()) {
        double sum = 0.0;
        for (const auto& s : spectra) sum += s.amplitude(i, j);
        const double mean = sum * inv_k;
        for (auto& s : spectra) s.amplitude(i, j) = mean;
    }

    std::vector<RealMatrix> out;
    out.reserve(clients.size());
    for (const auto& s : spectra) out.push_back(idft2(recompose(s)).values);
    return out;
}

std::vector<NamedTensorMap> pfa_aggregate(const AggregationRequest& req) {
    validate_request(req, AggregationKind::kPfa);
    const auto& clients = req.client_params;
    std::vector<NamedTensorMap> out(clients.size());

    for (const auto& [name, proto] : clients.front()) {
        if (proto.rank() == 4 || proto.rank() == 2) {
            std::vector<RealMatrix> mats;
            mats.reserve(clients.size());
            for (const auto& c : clients) {
                const auto& t = c.at(name);
                if (t.rank() == 4) {
                    mats.push_back(reshape_conv(t));
                } else {
                    mats.emplace_back(t.shape[0], t.shape[1], t.data);
                }
            }
            auto fused = pfa_matrices(mats, req.r);
            for (std::size_t k = 0; k < clients.size(); ++k) {
                if (proto.rank() == 4) {
                    out[k].emplace(name, unreshape_conv(fused[k], ConvShape::from_tensor(proto)));
                } else {
                    auto values = fused[k].values();
                    out[k].emplace(name, Tensor(proto.shape, std::move(values)));
                }
            }
        } else {
            const auto mean = mean_over_clients(clients, name);
            for (auto& m : out) m.emplace(name, Tensor(proto.shape, mean));
        }
    }
    return out;
}

NamedTensorMap fedavg_aggregate(const AggregationRequest& req) {
    validate_request(req, AggregationKind::kFedAvg);
    NamedTensorMap out;
    for (const auto& [name, proto] : req.client_params.front()) {
        out.emplace(name, Tensor(proto.shape, mean_over_clients(req.client_params, name)));
    }
    return out;
}

}  // namespace fourierfed
