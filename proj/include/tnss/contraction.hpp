#pragma once

#include <span>
#include <vector>

#include "tnss/structure.hpp"
#include "tnss/tensor.hpp"

namespace tnss {

/// One core per mode. Core i holds its physical mode first, then one bond
/// mode toward every other vertex in ascending partner order, so an order-N
/// network has cores of order N each.
struct CoreSet {
    std::vector<DenseTensor> cores;
};

/// Shape core `vertex` must have for the given structure and data shape.
std::vector<std::size_t> core_shape(const TNStructure& s, std::span<const std::size_t> shape,
                                    std::size_t vertex);

/// Throws ShapeError unless the cores' bond extents agree with the structure
/// pairwise (both endpoints of every bond see the same rank).
void validate_cores(const CoreSet& cores, const TNStructure& s);

/// Contract every bond, producing the full tensor with modes in vertex order.
/// Cores are folded pairwise in vertex order; each fold is a single matrix
/// product over the bonds shared so far.
DenseTensor tnc_contract(const CoreSet& cores, const TNStructure& s);

/// Contract `against` (shaped like the full tensor) with every core except
/// `skip`. The result has the shape and mode order of core `skip`; it is the
/// gradient of <against, tnc_contract(cores)> with respect to that core.
DenseTensor contract_environment(const DenseTensor& against, const CoreSet& cores,
                                 const TNStructure& s, std::size_t skip);

}  // namespace tnss
