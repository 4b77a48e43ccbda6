#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fourierfed/numerics.hpp"

using namespace fourierfed;

namespace {

RealMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    RealMatrix m(rows, cols);
    for (auto& v : m.data()) v = n(rng);
    return m;
}

// Plain double sum, written independently of the library's table-driven transform.
Complex brute_dft(const RealMatrix& m, std::size_t u, std::size_t v) {
    Complex acc{0.0, 0.0};
    const double R = static_cast<double>(m.rows()), C = static_cast<double>(m.cols());
    for (std::size_t x = 0; x < m.rows(); ++x)
        for (std::size_t y = 0; y < m.cols(); ++y) {
            const double ang = -2.0 * std::numbers::pi * (static_cast<double>(u * x) / R + static_cast<double>(v * y) / C);
            acc += m(x, y) * Complex(std::cos(ang), std::sin(ang));
        }
    return acc;
}

double max_abs(const RealMatrix& a, const RealMatrix& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a.data()[i] - b.data()[i]));
    return e;
}

}  // namespace

TEST_CASE("dft2 of a 2x2 delta is all ones") {
    RealMatrix m(2, 2, std::vector<double>{1, 0, 0, 0});
    const auto f = dft2(m);
    for (const auto& z : f.data()) {
        CHECK(z.real() == doctest::Approx(1.0));
        CHECK(std::abs(z.imag()) < 1e-15);
    }
}

TEST_CASE("dft2 of a constant 3x3 matrix keeps only DC") {
    const double c = 1.75;
    const auto f = dft2(RealMatrix(3, 3, c));
    CHECK(std::abs(f(0, 0) - Complex(9 * c, 0)) < 1e-12);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i || j) CHECK(std::abs(f(i, j)) < 1e-12);
}

TEST_CASE("dft2 matches the direct double sum") {
    std::mt19937_64 rng(5);
    const auto m = random_matrix(rng, 5, 7);
    const auto f = dft2(m);
    for (std::size_t u = 0; u < 5; ++u)
        for (std::size_t v = 0; v < 7; ++v) CHECK(std::abs(f(u, v) - brute_dft(m, u, v)) < 1e-10);
}

TEST_CASE("16x12 round trip") {
    std::mt19937_64 rng(1);
    const auto m = random_matrix(rng, 16, 12);
    CHECK(max_abs(idft2(dft2(m)).values, m) < 1e-9);
}

TEST_CASE("idft2 of all ones is the delta") {
    const auto out = idft2(ComplexMatrix(2, 2, Complex(1, 0))).values;
    CHECK(out(0, 0) == doctest::Approx(1.0));
    CHECK(std::abs(out(0, 1)) < 1e-15);
    CHECK(std::abs(out(1, 0)) < 1e-15);
    CHECK(std::abs(out(1, 1)) < 1e-15);
}

TEST_CASE("idft2 of a DC-only spectrum is constant") {
    ComplexMatrix f(4, 3, Complex(0, 0));
    f(0, 0) = Complex(24.0, 0);
    const auto out = idft2(f).values;
    for (double v : out.data()) CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("idft2 rejects an asymmetric spectrum") {
    ComplexMatrix f(4, 4, Complex(0, 0));
    f(1, 2) = Complex(0, 3.0);
    try {
        (void)idft2(f);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kSymmetryViolation);
    }
}

TEST_CASE("non-finite input is rejected") {
    RealMatrix m(2, 2, 0.0);
    m(1, 1) = std::nan("");
    CHECK_THROWS_AS(dft2(m), Error);
    try {
        (void)dft2(m);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kInvalidInput);
    }
}

TEST_CASE("empty matrices cannot be built") {
    CHECK_THROWS_AS(RealMatrix(0, 3), Error);
    CHECK_THROWS_AS(RealMatrix(2, 2, std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("amplitude and phase examples") {
    ComplexMatrix m(1, 4);
    m(0, 0) = {1, 0};
    m(0, 1) = {0, 1};
    m(0, 2) = {3, 4};
    m(0, 3) = {0, 0};
    const auto ap = amp_phase(m);
    CHECK(ap.amplitude(0, 0) == 1.0);
    CHECK(ap.phase(0, 0) == 0.0);
    CHECK(ap.amplitude(0, 1) == doctest::Approx(1.0));
    CHECK(ap.phase(0, 1) == doctest::Approx(std::numbers::pi / 2));
    CHECK(ap.amplitude(0, 2) == doctest::Approx(5.0));
    CHECK(ap.phase(0, 2) == doctest::Approx(0.92730).epsilon(1e-5));
    CHECK(ap.amplitude(0, 3) == 0.0);
    CHECK(ap.phase(0, 3) == 0.0);
}

TEST_CASE("phase of a negative real is +pi") {
    ComplexMatrix m(1, 1, Complex(-2.0, -0.0));
    const auto ap = amp_phase(m);
    CHECK(ap.phase(0, 0) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("recompose inverts amp_phase") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexMatrix m(6, 5);
    for (auto& z : m.data()) z = {n(rng), n(rng)};
    const auto back = recompose(amp_phase(m));
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(std::abs(back.data()[i] - m.data()[i]) <= 1e-12 * std::max(1.0, std::abs(m.data()[i])));
    }
}

TEST_CASE("transform invariants over 200 random matrices") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> dim(1, 16);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t R = dim(rng), C = dim(rng);
        const auto a = random_matrix(rng, R, C);
        const auto b = random_matrix(rng, R, C);
        const auto fa = dft2(a);

        CHECK(max_abs(idft2(fa).values, a) < 1e-9);

        double herm = 0.0;
        for (std::size_t u = 0; u < R; ++u)
            for (std::size_t v = 0; v < C; ++v)
                herm = std::max(herm, std::abs(fa(u, v) - std::conj(fa((R - u) % R, (C - v) % C))));
        CHECK(herm < 1e-10);

        double e_space = 0.0, e_freq = 0.0;
        for (double v : a.data()) e_space += v * v;
        for (const auto& z : fa.data()) e_freq += std::norm(z);
        e_freq /= static_cast<double>(R * C);
        CHECK(std::abs(e_space - e_freq) <= 1e-6 * e_space);

        const double alpha = coef(rng), beta = coef(rng);
        RealMatrix mix(R, C);
        for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = alpha * a.data()[i] + beta * b.data()[i];
        const auto fm = dft2(mix);
        const auto fb = dft2(b);
        double lin = 0.0;
        for (std::size_t i = 0; i < fm.size(); ++i)
            lin = std::max(lin, std::abs(fm.data()[i] - (alpha * fa.data()[i] + beta * fb.data()[i])));
        CHECK(lin < 1e-9);
    }
}

TEST_CASE("complex transform pair is mutually inverse") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexMatrix m(3, 8);
    for (auto& z : m.data()) z = {n(rng), n(rng)};
    const auto back = dft2_complex(dft2_complex(m, false), true);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(back.data()[i] - m.data()[i]) < 1e-12);
}
