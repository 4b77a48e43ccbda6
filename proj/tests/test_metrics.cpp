#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fourierfed/metrics.hpp"
#include "metric_oracles.hpp"

using namespace fourierfed;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::kInvalidInput;
}

}  // namespace

TEST_CASE("perfect predictions give macro F1 of 1") {
    std::vector<int> y{0, 1, 2, 2, 1};
    CHECK(macro_f1(y, y, 3) == 1.0);
}

TEST_CASE("hand-built confusion example") {
    // class 0: tp 2, fp 1; class 1: tp 2, fp 1; class 2: tp 0, fn 2
    const std::vector<int> y{0, 0, 1, 1, 2, 2};
    const std::vector<int> p{0, 0, 1, 1, 0, 1};
    const auto cm = confusion_matrix(p, y, 3);
    CHECK(cm == ConfusionMatrix{{2, 0, 0}, {0, 2, 0}, {1, 1, 0}});
    const auto s = class_scores(cm);
    CHECK(s[0].f1 == doctest::Approx(0.8));
    CHECK(s[1].f1 == doctest::Approx(0.8));
    CHECK(s[2].f1 == 0.0);
    CHECK(macro_f1(p, y, 3) == doctest::Approx(8.0 / 15.0).epsilon(1e-15));
}

TEST_CASE("single predicted class on balanced labels") {
    const std::vector<int> y{0, 1, 2, 0, 1, 2};
    const std::vector<int> p(6, 0);
    CHECK(macro_f1(p, y, 3) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("length mismatch is rejected") {
    const std::vector<int> y{0, 1};
    const std::vector<int> p{0};
    CHECK(code_of([&] { (void)macro_f1(p, y, 3); }) == ErrorCode::kInvalidInput);
    RealMatrix s(3, 3, 0.1);
    CHECK(code_of([&] { (void)macro_auc(s, y, 3); }) == ErrorCode::kInvalidInput);
}

TEST_CASE("confusion rows sum to class counts") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> c(0, 2);
    std::vector<int> y(50), p(50);
    for (auto& v : y) v = c(rng);
    for (auto& v : p) v = c(rng);
    const auto cm = confusion_matrix(p, y, 3);
    for (int k = 0; k < 3; ++k) {
        const auto row = std::accumulate(cm[k].begin(), cm[k].end(), std::size_t{0});
        CHECK(row == static_cast<std::size_t>(std::count(y.begin(), y.end(), k)));
    }
}

TEST_CASE("auc examples") {
    const std::vector<double> scores{0.9, 0.4, 0.6, 0.1};
    const std::vector<int> labels{1, 1, 0, 0};
    CHECK(binary_auc(scores, labels, 1) == doctest::Approx(0.75).epsilon(1e-15));

    RealMatrix sep(4, 3, 0.0);
    const std::vector<int> y{0, 1, 2, 0};
    for (std::size_t i = 0; i < 4; ++i) sep(i, static_cast<std::size_t>(y[i])) = 1.0;
    CHECK(macro_auc(sep, y, 3) == 1.0);

    RealMatrix flat(4, 3, 1.0 / 3.0);
    CHECK(macro_auc(flat, y, 3) == 0.5);

    const std::vector<int> only_zero{0, 0, 0, 0};
    CHECK(std::isnan(binary_auc(scores, only_zero, 0)));
    CHECK(code_of([&] { (void)macro_auc(flat, only_zero, 3); }) == ErrorCode::kUndefinedMetric);
    CHECK(std::isnan(evaluate(flat, only_zero, 3).macro_auc));
}

TEST_CASE("argmax ties go to the lowest index") {
    RealMatrix m(2, 3, std::vector<double>{0.2, 0.4, 0.4, 0.5, 0.5, 0.0});
    CHECK(argmax_rows(m) == std::vector<int>{1, 0});
}

TEST_CASE("1000 random cases against brute-force oracles") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> cls(0, 2);
    std::uniform_int_distribution<int> len(1, 60);
    std::uniform_int_distribution<int> coarse(0, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(len(rng));
        std::vector<int> y(n), p(n);
        for (auto& v : y) v = cls(rng);
        for (auto& v : p) v = cls(rng);
        CHECK(macro_f1(p, y, 3) == oracle::f1_by_counting(p, y, 3));

        // coarse scores so ties are common
        RealMatrix s(n, 3);
        for (auto& v : s.data()) v = coarse(rng) / 5.0;
        const double want = oracle::auc_by_pairs(s, y, 3);
        if (std::isnan(want)) {
            CHECK(code_of([&] { (void)macro_auc(s, y, 3); }) == ErrorCode::kUndefinedMetric);
        } else {
            CHECK(std::abs(macro_auc(s, y, 3) - want) <= 1e-12);
        }
    }
}

TEST_CASE("metrics are invariant to sample order") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> cls(0, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 40;
    std::vector<int> y(n), p(n);
    RealMatrix s(n, 3);
    for (auto& v : y) v = cls(rng);
    for (auto& v : p) v = cls(rng);
    for (auto& v : s.data()) v = u(rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> y2(n), p2(n);
    RealMatrix s2(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        y2[i] = y[perm[i]];
        p2[i] = p[perm[i]];
        for (std::size_t c = 0; c < 3; ++c) s2(i, c) = s(perm[i], c);
    }
    CHECK(macro_f1(p, y, 3) == macro_f1(p2, y2, 3));
    CHECK(std::abs(macro_auc(s, y, 3) - macro_auc(s2, y2, 3)) < 1e-15);
}

TEST_CASE("auc is invariant to strictly increasing score maps") {
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> cls(0, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 30;
    std::vector<int> y(n);
    RealMatrix s(n, 3), t(n, 3);
    for (auto& v : y) v = cls(rng);
    for (std::size_t i = 0; i < s.size(); ++i) {
        s.data()[i] = u(rng);
        t.data()[i] = std::exp(3.0 * s.data()[i]) - 7.0;
    }
    CHECK(macro_auc(s, y, 3) == macro_auc(t, y, 3));
}

TEST_CASE("evaluate bundles the pieces") {
    RealMatrix probs(4, 3, std::vector<double>{0.7, 0.2, 0.1, 0.1, 0.8, 0.1, 0.2, 0.2, 0.6, 0.5, 0.4, 0.1});
    const std::vector<int> y{0, 1, 2, 1};
    const auto r = evaluate(probs, y, 3);
    CHECK(r.macro_f1 == doctest::Approx(oracle::f1_by_counting({0, 1, 2, 0}, y, 3)));
    CHECK(r.macro_auc == doctest::Approx(oracle::auc_by_pairs(probs, y, 3)));
    double mean = 0.0;
    for (const auto& c : r.per_class) mean += c.f1 / 3.0;
    CHECK(r.macro_f1 == doctest::Approx(mean).epsilon(1e-15));
}
