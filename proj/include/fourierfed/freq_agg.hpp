#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fourierfed/numerics.hpp"
#include "fourierfed/tensor.hpp"

namespace fourierfed {

struct ConvShape {
    std::size_t out_channels = 1;
    std::size_t in_channels = 1;
    std::size_t kernel_h = 1;
    std::size_t kernel_w = 1;

    std::size_t numel() const noexcept { return out_channels * in_channels * kernel_h * kernel_w; }
    static ConvShape from_tensor(const Tensor& t);
};

/// Lays a (N, C, d1, d2) kernel out as a (d1*N) x (d2*C) matrix with
/// (n, c, x, y) -> (n*d1 + x, c*d2 + y).
RealMatrix reshape_conv(std::span<const double> weights, const ConvShape& shape);
RealMatrix reshape_conv(const Tensor& weights);
Tensor unreshape_conv(const RealMatrix& m, const ConvShape& shape);

/// Low-frequency band of a rows x cols spectrum. In centered coordinates
/// (DC at (0,0), frequencies signed) the band is |m| <= half_rows, |n| <= half_cols
/// with half_* = floor(r * dim).
class FreqMask {
public:
    FreqMask(std::size_t rows, std::size_t cols, double r);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double threshold() const noexcept { return r_; }
    std::size_t half_rows() const noexcept { return half_rows_; }
    std::size_t half_cols() const noexcept { return half_cols_; }

    /// Signed (centered) frequency test.
    bool contains_centered(long m, long n) const noexcept;
    /// Test in standard DFT index order (0 = DC, index k <-> frequency k or k - dim).
    bool contains(std::size_t row, std::size_t col) const noexcept;

    /// Indicator in fftshift layout: element (i, j) is frequency (i - rows/2, j - cols/2).
    const Matrix<unsigned char>& centered_indicator() const noexcept { return centered_; }
    /// The same set expressed as standard DFT indices, row-major order.
    const std::vector<std::pair<std::size_t, std::size_t>>& unshifted_indices() const noexcept {
        return unshifted_;
    }
    std::size_t count() const noexcept { return unshifted_.size(); }

private:
    std::size_t rows_;
    std::size_t cols_;
    double r_;
    std::size_t half_rows_;
    std::size_t half_cols_;
    Matrix<unsigned char> centered_;
    std::vector<std::pair<std::size_t, std::size_t>> unshifted_;
};

FreqMask low_freq_mask(std::size_t rows, std::size_t cols, double r);

struct ScheduleParams {
    double r0 = 0.35;
    double r1 = 0.48;
    int total_epochs = 250;

    void validate() const;
};

/// r0 + (r1 - r0) * t / T, kept strictly inside (0, 0.5).
double schedule_r(int t, const ScheduleParams& p);

/// Amplitude fusion for one parameter matrix across clients: inside the mask the
/// amplitude becomes the client mean, outside it is kept; the phase is always kept.
std::vector<RealMatrix> pfa_matrices(std::span<const RealMatrix> clients, double r);

enum class AggregationKind { kPfa, kFedAvg };

struct AggregationRequest {
    std::vector<NamedTensorMap> client_params;
    double r = 0.35;
    AggregationKind kind = AggregationKind::kPfa;
};

/// One personalized aggregate per client. Rank-4 tensors go through reshape_conv,
/// rank-2 tensors are transformed as-is, everything else is averaged element-wise.
std::vector<NamedTensorMap> pfa_aggregate(const AggregationRequest& req);

/// Unweighted element-wise mean of every parameter.
NamedTensorMap fedavg_aggregate(const AggregationRequest& req);

}  // namespace fourierfed
