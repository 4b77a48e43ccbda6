#include "fourierfed/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fourierfed {
namespace {

// exp(sign * 2 pi j k / n) for k in [0, n). Each root is evaluated directly from k
// so that conjugate pairs stay symmetric to rounding.
std::vector<Complex> roots_of_unity(std::size_t n, double sign) {
    std::vector<Complex> w(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        w[k] = Complex(std::cos(angle), std::sin(angle));
    }
    return w;
}

// Transform of a strided 1-D sequence into `out` (contiguous, length n).
void dft1(const Complex* in, std::size_t stride, std::size_t n, const std::vector<Complex>& w,
          Complex* out) {
    for (std::size_t k = 0; k < n; ++k) {
        Complex acc(0.0, 0.0);
        std::size_t idx = 0;
        for (std::size_t x = 0; x < n; ++x) {
            acc += in[x * stride] * w[idx];
            idx += k;
            if (idx >= n) idx -= n;
        }
        out[k] = acc;
    }
}

ComplexMatrix separable_transform(ComplexMatrix m, double sign) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    const auto w_cols = roots_of_unity(cols, sign);
    const auto w_rows = roots_of_unity(rows, sign);

    std::vector<Complex> buf(std::max(rows, cols));
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = m.row(r);
        dft1(row.data(), 1, cols, w_cols, buf.data());
        std::copy_n(buf.begin(), cols, row.begin());
    }
    for (std::size_t c = 0; c < cols; ++c) {
        Complex* col = m.data().data() + c;
        dft1(col, cols, rows, w_rows, buf.data());
        for (std::size_t r = 0; r < rows; ++r) col[r * cols] = buf[r];
    }
    return m;
}

}  // namespace

ComplexMatrix dft2(const RealMatrix& m) {
    if (m.empty()) throw Error(ErrorCode::kInvalidInput, "dft2 of an empty matrix");
    std::vector<Complex> data(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double v = m.data()[i];
        if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidInput, "dft2 input contains a non-finite entry");
        data[i] = Complex(v, 0.0);
    }
    return separable_transform(ComplexMatrix(m.rows(), m.cols(), std::move(data)), -1.0);
}

ComplexMatrix dft2_complex(const ComplexMatrix& m, bool inverse) {
    if (m.empty()) throw Error(ErrorCode::kInvalidInput, "dft2 of an empty matrix");
    auto out = separable_transform(m, inverse ? 1.0 : -1.0);
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(m.size());
        for (auto& v : out.data()) v *= scale;
    }
    return out;
}

InverseTransform idft2(const ComplexMatrix& spectrum) {
    double max_amplitude = 0.0;
    for (const auto& v : spectrum.data()) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw Error(ErrorCode::kInvalidInput, "idft2 input contains a non-finite entry");
        }
        max_amplitude = std::max(max_amplitude, std::abs(v));
    }
    const auto full = dft2_complex(spectrum, true);

    InverseTransform result{RealMatrix(spectrum.rows(), spectrum.cols()), 0.0};
    for (std::size_t i = 0; i < full.size(); ++i) {
        result.values.data()[i] = full.data()[i].real();
        result.max_imag_residue = std::max(result.max_imag_residue, std::abs(full.data()[i].imag()));
    }
    if (result.max_imag_residue > 1e-6 * max_amplitude) {
        throw Error(ErrorCode::kSymmetryViolation,
                    "inverse transform has imaginary residue " + std::to_string(result.max_imag_residue) +
                        " (spectrum is not Hermitian)");
    }
    return result;
}

AmpPhase amp_phase(const ComplexMatrix& m) {
    AmpPhase out{RealMatrix(m.rows(), m.cols()), RealMatrix(m.rows(), m.cols())};
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Complex v = m.data()[i];
        const double amplitude = std::abs(v);
        double phase = 0.0;
        if (amplitude > 0.0) {
            phase = std::atan2(v.imag(), v.real());
            if (phase <= -std::numbers::pi) phase = std::numbers::pi;
        }
        out.amplitude.data()[i] = amplitude;
        out.phase.data()[i] = phase;
    }
    return out;
}

ComplexMatrix recompose(const AmpPhase& a) {
    if (a.amplitude.rows() != a.phase.rows() || a.amplitude.cols() != a.phase.cols()) {
        throw Error(ErrorCode::kInvalidShape, "amplitude and phase maps differ in shape");
    }
    ComplexMatrix out(a.amplitude.rows(), a.amplitude.cols());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = std::polar(a.amplitude.data()[i], a.phase.data()[i]);
    }
    return out;
}

}  // namespace fourierfed
