#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "fourierfed/error.hpp"

namespace fourierfed {

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    std::size_t rank() const noexcept { return shape.size(); }
    std::size_t numel() const noexcept { return data.size(); }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);
std::string shape_to_string(const std::vector<std::size_t>& shape);

// Parameter set of one model. std::map gives lexicographic iteration order.
using NamedTensorMap = std::map<std::string, Tensor>;

bool same_structure(const NamedTensorMap& a, const NamedTensorMap& b);

/// Throws Error(code) naming the first key or shape that differs.
void require_same_structure(const NamedTensorMap& a, const NamedTensorMap& b, ErrorCode code,
                            const std::string& context);

/// Bitwise equality of every value (distinguishes -0.0 from 0.0; NaN equals itself).
bool bit_equal(const NamedTensorMap& a, const NamedTensorMap& b);

NamedTensorMap zeros_like(const NamedTensorMap& m);
double max_abs_diff(const NamedTensorMap& a, const NamedTensorMap& b);
std::size_t parameter_count(const NamedTensorMap& m);

}  // namespace fourierfed
