#include "tnss/structure.hpp"

#include <algorithm>
#include <utility>

#include "tnss/tensor.hpp"

namespace tnss {

TNStructure::TNStructure(std::size_t order, std::vector<int> ranks)
    : order_(order), ranks_(std::move(ranks)) {
    if (order_ < 2) throw ConfigError("structure order must be at least 2");
    if (ranks_.size() != num_pairs(order_))
        throw ShapeError("structure of order " + std::to_string(order_) + " needs " +
                         std::to_string(num_pairs(order_)) + " ranks, got " +
                         std::to_string(ranks_.size()));
    for (int r : ranks_)
        if (r < 1) throw ConfigError("bond ranks must be at least 1");
}

TNStructure TNStructure::all_ones(std::size_t order) {
    if (order < 2) throw ConfigError("structure order must be at least 2");
    return TNStructure(order, std::vector<int>(num_pairs(order), 1));
}

std::size_t TNStructure::pair_index(std::size_t i, std::size_t j, std::size_t order) {
    if (i == j || i >= order || j >= order)
        throw ShapeError("invalid mode pair");
    if (i > j) std::swap(i, j);
    return i * order - i * (i + 1) / 2 + (j - i - 1);
}

int TNStructure::rank(std::size_t i, std::size_t j) const {
    return ranks_[pair_index(i, j, order_)];
}

void TNStructure::set_rank(std::size_t i, std::size_t j, int r) {
    if (r < 1) throw ConfigError("bond ranks must be at least 1");
    ranks_[pair_index(i, j, order_)] = r;
}

std::vector<int> TNStructure::vertex_ranks(std::size_t vertex) const {
    if (vertex >= order_) throw ShapeError("vertex out of range");
    std::vector<int> out;
    out.reserve(order_ - 1);
    for (std::size_t j = 0; j < order_; ++j)
        if (j != vertex) out.push_back(rank(vertex, j));
    return out;
}

std::string format_ranks(const TNStructure& s) {
    std::string out = "[";
    for (std::size_t k = 0; k < s.ranks().size(); ++k) {
        if (k > 0) out += ", ";
        out += std::to_string(s.ranks()[k]);
    }
    out += "]";
    return out;
}

std::int64_t param_count(const TNStructure& s, std::span<const std::size_t> shape) {
    if (shape.size() != s.order())
        throw ShapeError("shape order does not match structure order");
    shape_numel(shape);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < s.order(); ++i) {
        std::int64_t core = static_cast<std::int64_t>(shape[i]);
        for (std::size_t j = 0; j < s.order(); ++j)
            if (j != i) core *= s.rank(i, j);
        total += core;
    }
    return total;
}

double compression_ratio(const TNStructure& s, std::span<const std::size_t> shape) {
    return static_cast<double>(param_count(s, shape)) /
           static_cast<double>(shape_numel(shape));
}

TNStructure permute_structure(const TNStructure& s, std::span<const std::size_t> perm) {
    const std::size_t n = s.order();
    if (perm.size() != n) throw ShapeError("permutation arity does not match structure order");
    std::vector<bool> seen(n, false);
    for (std::size_t p : perm) {
        if (p >= n || seen[p]) throw ShapeError("invalid mode permutation");
        seen[p] = true;
    }
    TNStructure out = TNStructure::all_ones(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            out.set_rank(a, b, s.rank(perm[a], perm[b]));
    return out;
}

}  // namespace tnss
