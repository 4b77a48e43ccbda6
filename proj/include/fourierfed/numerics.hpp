#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fourierfed/error.hpp"

namespace fourierfed {

// Dense row-major matrix. Dimensions are fixed at construction.
template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols) {
        check_dims(rows, cols);
        data_.assign(rows * cols, fill);
    }

    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        check_dims(rows, cols);
        if (data_.size() != rows * cols) {
            throw Error(ErrorCode::kInvalidShape, "matrix data length does not equal rows*cols");
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    const std::vector<T>& values() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    static void check_dims(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0) {
            throw Error(ErrorCode::kInvalidShape, "matrix dimensions must be positive");
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using Complex = std::complex<double>;
using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;

/// Amplitude/phase decomposition of a spectrum: value = amplitude * exp(j * phase).
struct AmpPhase {
    RealMatrix amplitude;  // >= 0
    RealMatrix phase;      // in (-pi, pi]
};

struct InverseTransform {
    RealMatrix values;
    double max_imag_residue = 0.0;
};

/// Unnormalized forward 2-D DFT with negative exponent:
///   F(m, n) = sum_{x,y} w(x, y) exp(-2 pi j (x m / rows + y n / cols)).
/// Throws kInvalidInput on a non-finite entry.
ComplexMatrix dft2(const RealMatrix& m);

/// Inverse 2-D DFT, normalized by 1/(rows*cols). The real part is returned and the
/// largest imaginary magnitude is reported. A residue above 1e-6 of the largest input
/// amplitude means the spectrum was not Hermitian; that raises kSymmetryViolation.
InverseTransform idft2(const ComplexMatrix& spectrum);

/// Complex-to-complex 2-D transform. `inverse` selects the positive exponent and
/// 1/(rows*cols) scaling.
ComplexMatrix dft2_complex(const ComplexMatrix& m, bool inverse);

AmpPhase amp_phase(const ComplexMatrix& m);
ComplexMatrix recompose(const AmpPhase& a);

}  // namespace fourierfed
