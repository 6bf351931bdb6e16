#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tnss/errors.hpp"

namespace tnss {

/// Fully connected tensor-network structure over N modes: one positive bond
/// rank per unordered mode pair, stored as the upper triangle in pair order
/// (0,1),(0,2),...,(0,N-1),(1,2),...,(N-2,N-1). A rank of 1 carries no
/// degrees of freedom, so it doubles as "no edge"; the rank vector therefore
/// encodes the graph topology and the edge weights at once.
class TNStructure {
public:
    /// Empty placeholder; every real structure comes from the checked ctor.
    TNStructure() = default;
    TNStructure(std::size_t order, std::vector<int> ranks);

    static TNStructure all_ones(std::size_t order);
    static std::size_t num_pairs(std::size_t order) { return order * (order - 1) / 2; }

    /// Position of pair (i, j), i < j, in the rank vector.
    static std::size_t pair_index(std::size_t i, std::size_t j, std::size_t order);

    std::size_t order() const { return order_; }
    const std::vector<int>& ranks() const { return ranks_; }

    /// Bond rank between two distinct modes, in either argument order.
    int rank(std::size_t i, std::size_t j) const;
    void set_rank(std::size_t i, std::size_t j, int r);

    /// Bond ranks of one vertex toward every other vertex, ascending partner.
    std::vector<int> vertex_ranks(std::size_t vertex) const;

    bool operator==(const TNStructure& other) const = default;

private:
    std::size_t order_ = 0;
    std::vector<int> ranks_;
};

/// "[3, 2, 1]" -- the rank vector in pair order.
std::string format_ranks(const TNStructure& s);

/// Total parameter count of the core tensors for the given data shape.
std::int64_t param_count(const TNStructure& s, std::span<const std::size_t> shape);

/// Parameter count divided by the number of tensor entries (phi).
double compression_ratio(const TNStructure& s, std::span<const std::size_t> shape);

/// Structure after relabeling modes: new mode a is old mode perm[a], so
/// new_rank(a, b) = old_rank(perm[a], perm[b]). Matches permute_modes on the
/// data side.
TNStructure permute_structure(const TNStructure& s, std::span<const std::size_t> perm);

}  // namespace tnss
