#include "fourierfed/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace fourierfed {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_to_string(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

Tensor::Tensor(std::vector<std::size_t> shape_in, double fill)
    : shape(std::move(shape_in)), data(shape_numel(shape), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
    if (data.size() != shape_numel(shape)) {
        throw Error(ErrorCode::kInvalidShape,
                    "tensor data length " + std::to_string(data.size()) + " does not match shape " +
                        shape_to_string(shape));
    }
}

bool same_structure(const NamedTensorMap& a, const NamedTensorMap& b) {
    if (a.size() != b.size()) return false;
    return std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) {
        return x.first == y.first && x.second.shape == y.second.shape &&
               x.second.data.size() == y.second.data.size();
    });
}

void require_same_structure(const NamedTensorMap& a, const NamedTensorMap& b, ErrorCode code,
                            const std::string& context) {
    if (a.size() != b.size()) {
        throw Error(code, context + ": parameter count " + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()));
    }
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
        if (ia->first != ib->first) {
            throw Error(code, context + ": parameter name '" + ia->first + "' vs '" + ib->first + "'");
        }
        if (ia->second.shape != ib->second.shape || ia->second.data.size() != ib->second.data.size()) {
            throw Error(code, context + ": shape of '" + ia->first + "' " + shape_to_string(ia->second.shape) +
                                  " vs " + shape_to_string(ib->second.shape));
        }
    }
}

bool bit_equal(const NamedTensorMap& a, const NamedTensorMap& b) {
    if (!same_structure(a, b)) return false;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
        const auto& x = ia->second.data;
        const auto& y = ib->second.data;
        if (!x.empty() && std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0) return false;
    }
    return true;
}

NamedTensorMap zeros_like(const NamedTensorMap& m) {
    NamedTensorMap out;
    for (const auto& [name, t] : m) out.emplace(name, Tensor(t.shape, 0.0));
    return out;
}

double max_abs_diff(const NamedTensorMap& a, const NamedTensorMap& b) {
    require_same_structure(a, b, ErrorCode::kInvalidShape, "max_abs_diff");
    double worst = 0.0;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
        for (std::size_t i = 0; i < ia->second.data.size(); ++i) {
            worst = std::max(worst, std::abs(ia->second.data[i] - ib->second.data[i]));
        }
    }
    return worst;
}

std::size_t parameter_count(const NamedTensorMap& m) {
    std::size_t n = 0;
    for (const auto& [name, t] : m) n += t.numel();
    return n;
}

}  // namespace fourierfed
