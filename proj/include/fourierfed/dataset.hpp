#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fourierfed {

// Flat labelled sample set: features are row-major, one row of `dim` values per sample.
struct Dataset {
    std::size_t dim = 0;
    std::size_t classes = 0;
    std::vector<double> features;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    bool empty() const noexcept { return labels.empty(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }

    Dataset subset(std::span<const std::size_t> indices) const {
        Dataset out{dim, classes, {}, {}};
        out.features.reserve(indices.size() * dim);
        out.labels.reserve(indices.size());
        for (auto i : indices) {
            auto r = row(i);
            out.features.insert(out.features.end(), r.begin(), r.end());
            out.labels.push_back(labels[i]);
        }
        return out;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

}  // namespace fourierfed
