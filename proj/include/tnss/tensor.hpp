#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tnss/errors.hpp"

namespace tnss {

/// Dense real tensor with row-major storage (last index fastest).
class DenseTensor {
public:
    DenseTensor() = default;

    /// Validates that the shape is non-empty with positive extents, that the
    /// data size matches the shape product, and that every value is finite.
    DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

    /// Zero-filled tensor; skips the finiteness scan.
    static DenseTensor zeros(std::vector<std::size_t> shape);

    std::size_t order() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    /// Element by multi-index, bounds-checked.
    double at(std::span<const std::size_t> indices) const;

    double frobenius_norm() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

/// Product of extents; throws ShapeError on empty shapes, zero extents, or
/// overflow.
std::size_t shape_numel(std::span<const std::size_t> shape);

/// Row-major strides for a shape.
std::vector<std::size_t> row_major_strides(std::span<const std::size_t> shape);

/// ||x - xhat||_F / ||x||_F. Shapes must match and x must be non-zero.
double relative_error(const DenseTensor& x, const DenseTensor& xhat);

/// Reorder modes: output mode k is input mode perm[k].
DenseTensor permute_modes(const DenseTensor& x, std::span<const std::size_t> perm);

enum class SplitTag { Train, Test, Unsplit };

std::string to_string(SplitTag tag);
SplitTag split_tag_from_string(const std::string& text);

/// Collection of equally shaped samples, kept in insertion order.
class TensorDataset {
public:
    explicit TensorDataset(std::vector<DenseTensor> samples, SplitTag tag = SplitTag::Unsplit);

    std::size_t num_samples() const { return samples_.size(); }
    const std::vector<DenseTensor>& samples() const { return samples_; }
    const DenseTensor& sample(std::size_t i) const { return samples_[i]; }
    const std::vector<std::size_t>& shape() const { return samples_.front().shape(); }
    std::size_t order() const { return shape().size(); }
    SplitTag tag() const { return tag_; }

private:
    std::vector<DenseTensor> samples_;
    SplitTag tag_;
};

/// Slice a series tensor into overlapping windows along one axis. Each window
/// drops that axis and appends a trailing mode of length `window`; windows are
/// emitted in series order, so sample k covers positions
/// [k*stride, k*stride + window).
TensorDataset delay_embed(const DenseTensor& series, std::size_t axis, std::size_t window,
                          std::size_t stride);

/// Rescale the whole dataset to [0, 1] with one global min/max. A constant
/// dataset maps to all zeros.
TensorDataset minmax_normalize(const TensorDataset& dataset);

}  // namespace tnss
