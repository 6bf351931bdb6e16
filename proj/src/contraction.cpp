#include "tnss/contraction.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <numeric>

namespace tnss {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Mode labels: physical mode i is label i, the bond (i, j) is label
// order + pair_index(i, j). Each label appears on exactly two tensors
// (a bond) or survives to the output (a physical mode).
int bond_label(const TNStructure& s, std::size_t i, std::size_t j) {
    return static_cast<int>(s.order() + TNStructure::pair_index(i, j, s.order()));
}

struct Labeled {
    DenseTensor t;
    std::vector<int> labels;
};

Labeled labeled_core(const CoreSet& cores, const TNStructure& s, std::size_t vertex) {
    std::vector<int> labels;
    labels.reserve(s.order());
    labels.push_back(static_cast<int>(vertex));
    for (std::size_t j = 0; j < s.order(); ++j)
        if (j != vertex) labels.push_back(bond_label(s, vertex, j));
    return {cores.cores[vertex], std::move(labels)};
}

// Permute a labeled tensor so its labels appear in `target` order.
void permute_to(Labeled& a, const std::vector<int>& target) {
    if (a.labels == target) return;
    std::vector<std::size_t> perm(target.size());
    for (std::size_t k = 0; k < target.size(); ++k) {
        auto it = std::find(a.labels.begin(), a.labels.end(), target[k]);
        if (it == a.labels.end()) throw ShapeError("internal: label missing during permute");
        perm[k] = static_cast<std::size_t>(it - a.labels.begin());
    }
    a.t = permute_modes(a.t, perm);
    a.labels = target;
}

// Contract two labeled tensors over all labels they share: permute both so
// the shared labels are adjacent, then multiply (free_a x shared) by
// (shared x free_b).
Labeled contract_pair(Labeled a, Labeled b) {
    std::vector<int> shared;
    for (int la : a.labels)
        if (std::find(b.labels.begin(), b.labels.end(), la) != b.labels.end())
            shared.push_back(la);

    std::vector<int> free_a;
    for (int la : a.labels)
        if (std::find(shared.begin(), shared.end(), la) == shared.end()) free_a.push_back(la);
    std::vector<int> free_b;
    for (int lb : b.labels)
        if (std::find(shared.begin(), shared.end(), lb) == shared.end()) free_b.push_back(lb);

    std::vector<int> order_a = free_a;
    order_a.insert(order_a.end(), shared.begin(), shared.end());
    std::vector<int> order_b = shared;
    order_b.insert(order_b.end(), free_b.begin(), free_b.end());
    permute_to(a, order_a);
    permute_to(b, order_b);

    std::size_t rows = 1, inner = 1, cols = 1;
    std::vector<std::size_t> out_shape;
    for (std::size_t k = 0; k < free_a.size(); ++k) {
        rows *= a.t.shape()[k];
        out_shape.push_back(a.t.shape()[k]);
    }
    for (std::size_t k = 0; k < shared.size(); ++k) {
        const std::size_t da = a.t.shape()[free_a.size() + k];
        const std::size_t db = b.t.shape()[k];
        if (da != db) throw ShapeError("bond extents disagree between cores");
        inner *= da;
    }
    for (std::size_t k = 0; k < free_b.size(); ++k) {
        cols *= b.t.shape()[shared.size() + k];
        out_shape.push_back(b.t.shape()[shared.size() + k]);
    }
    if (out_shape.empty()) out_shape.push_back(1);

    DenseTensor out = DenseTensor::zeros(out_shape);
    Eigen::Map<const RowMat> ma(a.t.data(), static_cast<Eigen::Index>(rows),
                                static_cast<Eigen::Index>(inner));
    Eigen::Map<const RowMat> mb(b.t.data(), static_cast<Eigen::Index>(inner),
                                static_cast<Eigen::Index>(cols));
    Eigen::Map<RowMat> mc(out.data(), static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(cols));
    mc.noalias() = ma * mb;

    std::vector<int> labels = free_a;
    labels.insert(labels.end(), free_b.begin(), free_b.end());
    if (labels.empty()) labels.push_back(-1);  // scalar result, dummy extent-1 mode
    return {std::move(out), std::move(labels)};
}

}  // namespace

std::vector<std::size_t> core_shape(const TNStructure& s, std::span<const std::size_t> shape,
                                    std::size_t vertex) {
    if (shape.size() != s.order())
        throw ShapeError("shape order does not match structure order");
    if (vertex >= s.order()) throw ShapeError("vertex out of range");
    std::vector<std::size_t> out;
    out.reserve(s.order());
    out.push_back(shape[vertex]);
    for (std::size_t j = 0; j < s.order(); ++j)
        if (j != vertex) out.push_back(static_cast<std::size_t>(s.rank(vertex, j)));
    return out;
}

void validate_cores(const CoreSet& cores, const TNStructure& s) {
    const std::size_t n = s.order();
    if (cores.cores.size() != n)
        throw ShapeError("need one core per mode: " + std::to_string(n) + " cores, got " +
                         std::to_string(cores.cores.size()));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& core = cores.cores[i];
        if (core.order() != n)
            throw ShapeError("core " + std::to_string(i) + " must have order " +
                             std::to_string(n));
        std::size_t pos = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto expected = static_cast<std::size_t>(s.rank(i, j));
            if (core.shape()[pos] != expected)
                throw ShapeError("core " + std::to_string(i) + " bond toward mode " +
                                 std::to_string(j) + " has extent " +
                                 std::to_string(core.shape()[pos]) + ", structure wants " +
                                 std::to_string(expected));
            ++pos;
        }
    }
}

DenseTensor tnc_contract(const CoreSet& cores, const TNStructure& s) {
    validate_cores(cores, s);
    Labeled acc = labeled_core(cores, s, 0);
    for (std::size_t v = 1; v < s.order(); ++v)
        acc = contract_pair(std::move(acc), labeled_core(cores, s, v));

    std::vector<int> target(s.order());
    std::iota(target.begin(), target.end(), 0);
    permute_to(acc, target);
    return std::move(acc.t);
}

DenseTensor contract_environment(const DenseTensor& against, const CoreSet& cores,
                                 const TNStructure& s, std::size_t skip) {
    validate_cores(cores, s);
    const std::size_t n = s.order();
    if (skip >= n) throw ShapeError("vertex out of range");
    if (against.order() != n)
        throw ShapeError("environment input must have the full tensor's order");
    for (std::size_t i = 0; i < n; ++i)
        if (against.shape()[i] != cores.cores[i].shape()[0])
            throw ShapeError("environment input shape does not match the cores");

    std::vector<int> full_labels(n);
    std::iota(full_labels.begin(), full_labels.end(), 0);
    Labeled acc{against, full_labels};
    for (std::size_t v = 0; v < n; ++v) {
        if (v == skip) continue;
        acc = contract_pair(std::move(acc), labeled_core(cores, s, v));
    }

    std::vector<int> target;
    target.reserve(n);
    target.push_back(static_cast<int>(skip));
    for (std::size_t j = 0; j < n; ++j)
        if (j != skip) target.push_back(bond_label(s, skip, j));
    permute_to(acc, target);
    return std::move(acc.t);
}

}  // namespace tnss
