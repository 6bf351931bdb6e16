#include "tnss/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tnss {

std::size_t shape_numel(std::span<const std::size_t> shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one mode");
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("tensor extents must be positive");
        if (d > std::numeric_limits<std::size_t>::max() / n)
            throw ShapeError("tensor shape product overflows");
        n *= d;
    }
    return n;
}

std::vector<std::size_t> row_major_strides(std::span<const std::size_t> shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t k = shape.size(); k-- > 1;) strides[k - 1] = strides[k] * shape[k];
    return strides;
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    const std::size_t n = shape_numel(shape_);
    if (data_.size() != n)
        throw ShapeError("tensor data has " + std::to_string(data_.size()) +
                         " values, shape wants " + std::to_string(n));
    for (double v : data_)
        if (!std::isfinite(v)) throw Error("tensor values must be finite");
}

DenseTensor DenseTensor::zeros(std::vector<std::size_t> shape) {
    const std::size_t n = shape_numel(shape);
    DenseTensor t;
    t.shape_ = std::move(shape);
    t.data_.assign(n, 0.0);
    return t;
}

double DenseTensor::at(std::span<const std::size_t> indices) const {
    if (indices.size() != shape_.size())
        throw ShapeError("index arity does not match tensor order");
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (std::size_t k = shape_.size(); k-- > 0;) {
        if (indices[k] >= shape_[k]) throw ShapeError("tensor index out of range");
        flat += indices[k] * stride;
        stride *= shape_[k];
    }
    return data_[flat];
}

double DenseTensor::frobenius_norm() const {
    double sum = 0.0;
    for (double v : data_) sum += v * v;
    return std::sqrt(sum);
}

double relative_error(const DenseTensor& x, const DenseTensor& xhat) {
    if (x.shape() != xhat.shape())
        throw ShapeError("relative_error: shapes do not match");
    double diff = 0.0;
    double ref = 0.0;
    const double* a = x.data();
    const double* b = xhat.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = a[i] - b[i];
        diff += d * d;
        ref += a[i] * a[i];
    }
    if (ref == 0.0) throw Error("relative_error: reference tensor is zero");
    return std::sqrt(diff / ref);
}

DenseTensor permute_modes(const DenseTensor& x, std::span<const std::size_t> perm) {
    const std::size_t n = x.order();
    if (perm.size() != n) throw ShapeError("permutation arity does not match tensor order");
    std::vector<bool> seen(n, false);
    for (std::size_t p : perm) {
        if (p >= n || seen[p]) throw ShapeError("invalid mode permutation");
        seen[p] = true;
    }

    std::vector<std::size_t> out_shape(n);
    for (std::size_t k = 0; k < n; ++k) out_shape[k] = x.shape()[perm[k]];
    DenseTensor y = DenseTensor::zeros(out_shape);

    const auto xstrides = row_major_strides(x.shape());
    // Stride in x contributed by each output digit.
    std::vector<std::size_t> contrib(n);
    for (std::size_t k = 0; k < n; ++k) contrib[k] = xstrides[perm[k]];

    std::vector<std::size_t> idx(n, 0);
    std::size_t xflat = 0;
    const std::size_t total = y.size();
    for (std::size_t of = 0; of < total; ++of) {
        y[of] = x[xflat];
        for (std::size_t k = n; k-- > 0;) {
            ++idx[k];
            xflat += contrib[k];
            if (idx[k] < out_shape[k]) break;
            xflat -= contrib[k] * out_shape[k];
            idx[k] = 0;
        }
    }
    return y;
}

std::string to_string(SplitTag tag) {
    switch (tag) {
        case SplitTag::Train: return "train";
        case SplitTag::Test: return "test";
        case SplitTag::Unsplit: return "unsplit";
    }
    throw Error("unknown split tag");
}

SplitTag split_tag_from_string(const std::string& text) {
    if (text == "train") return SplitTag::Train;
    if (text == "test") return SplitTag::Test;
    if (text == "unsplit") return SplitTag::Unsplit;
    throw Error("unknown split tag: " + text);
}

TensorDataset::TensorDataset(std::vector<DenseTensor> samples, SplitTag tag)
    : samples_(std::move(samples)), tag_(tag) {
    if (samples_.empty()) throw Error("dataset must contain at least one sample");
    const auto& shape = samples_.front().shape();
    for (const auto& s : samples_)
        if (s.shape() != shape) throw ShapeError("dataset samples must share one shape");
}

TensorDataset delay_embed(const DenseTensor& series, std::size_t axis, std::size_t window,
                          std::size_t stride) {
    const std::size_t n = series.order();
    if (axis >= n) throw ShapeError("delay_embed: axis out of range");
    const std::size_t extent = series.shape()[axis];
    if (window == 0 || window > extent)
        throw ConfigError("delay_embed: window must lie in [1, axis extent]");
    if (stride == 0) throw ConfigError("delay_embed: stride must be positive");

    const std::size_t count = (extent - window) / stride + 1;
    const auto sstrides = row_major_strides(series.shape());

    // Sample modes: the series modes minus `axis`, then the window mode last.
    std::vector<std::size_t> out_shape;
    std::vector<std::size_t> contrib;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == axis) continue;
        out_shape.push_back(series.shape()[k]);
        contrib.push_back(sstrides[k]);
    }
    out_shape.push_back(window);
    contrib.push_back(sstrides[axis]);

    std::vector<DenseTensor> samples;
    samples.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        DenseTensor y = DenseTensor::zeros(out_shape);
        std::vector<std::size_t> idx(out_shape.size(), 0);
        std::size_t xflat = s * stride * sstrides[axis];
        const std::size_t total = y.size();
        for (std::size_t of = 0; of < total; ++of) {
            y[of] = series[xflat];
            for (std::size_t k = out_shape.size(); k-- > 0;) {
                ++idx[k];
                xflat += contrib[k];
                if (idx[k] < out_shape[k]) break;
                xflat -= contrib[k] * out_shape[k];
                idx[k] = 0;
            }
        }
        samples.push_back(std::move(y));
    }
    return TensorDataset(std::move(samples), SplitTag::Unsplit);
}

TensorDataset minmax_normalize(const TensorDataset& dataset) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : dataset.samples())
        for (double v : s.values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }

    const double span = hi - lo;
    std::vector<DenseTensor> out;
    out.reserve(dataset.num_samples());
    for (const auto& s : dataset.samples()) {
        DenseTensor y = DenseTensor::zeros(s.shape());
        if (span > 0.0)
            for (std::size_t i = 0; i < s.size(); ++i) y[i] = (s[i] - lo) / span;
        out.push_back(std::move(y));
    }
    return TensorDataset(std::move(out), dataset.tag());
}

}  // namespace tnss
