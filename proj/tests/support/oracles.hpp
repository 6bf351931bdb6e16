#pragma once

// Independent reference implementations used to check the fast paths.
// Everything here trades speed for obviousness: plain loops, no reuse of the
// contraction engine under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "tnss/contraction.hpp"
#include "tnss/objective.hpp"
#include "tnss/structure.hpp"
#include "tnss/tensor.hpp"

namespace oracle {

/// Contract a core set by looping over every bond-index tuple and every
/// output entry, multiplying one scalar per core. Exponential cost; only for
/// tiny instances.
inline tnss::DenseTensor contract(const tnss::TNStructure& s, const tnss::CoreSet& cores,
                                  std::span<const std::size_t> shape) {
    const std::size_t order = s.order();
    const std::size_t pairs = tnss::TNStructure::num_pairs(order);

    // bond_ranks[p] = extent of pair p's bond; rank-1 bonds stay at index 0.
    std::vector<int> bond_ranks(pairs);
    for (std::size_t i = 0; i < order; ++i)
        for (std::size_t j = i + 1; j < order; ++j)
            bond_ranks[tnss::TNStructure::pair_index(i, j, order)] = s.rank(i, j);

    tnss::DenseTensor out =
        tnss::DenseTensor::zeros(std::vector<std::size_t>(shape.begin(), shape.end()));
    const std::vector<std::size_t> out_strides = tnss::row_major_strides(out.shape());

    std::vector<std::size_t> idx(order, 0);
    bool entries_left = true;
    while (entries_left) {
        double sum = 0.0;
        std::vector<int> bonds(pairs, 0);
        bool tuples_left = true;
        while (tuples_left) {
            double prod = 1.0;
            for (std::size_t v = 0; v < order; ++v) {
                std::vector<std::size_t> core_idx{idx[v]};
                for (std::size_t u = 0; u < order; ++u) {
                    if (u == v) continue;
                    const std::size_t p = u < v ? tnss::TNStructure::pair_index(u, v, order)
                                                : tnss::TNStructure::pair_index(v, u, order);
                    core_idx.push_back(static_cast<std::size_t>(bonds[p]));
                }
                prod *= cores.cores[v].at(core_idx);
            }
            sum += prod;

            tuples_left = false;
            for (std::size_t p = pairs; p-- > 0;) {
                if (bonds[p] + 1 < bond_ranks[p]) {
                    ++bonds[p];
                    std::fill(bonds.begin() + static_cast<std::ptrdiff_t>(p) + 1, bonds.end(), 0);
                    tuples_left = true;
                    break;
                }
            }
        }
        std::size_t flat = 0;
        for (std::size_t m = 0; m < order; ++m) flat += idx[m] * out_strides[m];
        out.data()[flat] = sum;

        entries_left = false;
        for (std::size_t m = order; m-- > 0;) {
            if (idx[m] + 1 < shape[m]) {
                ++idx[m];
                std::fill(idx.begin() + static_cast<std::ptrdiff_t>(m) + 1, idx.end(), 0);
                entries_left = true;
                break;
            }
        }
    }
    return out;
}

/// Central finite differences of the half-squared-residual loss with respect
/// to every entry of every core.
inline std::vector<tnss::DenseTensor> fd_gradients(const tnss::DenseTensor& sample,
                                                   const tnss::CoreSet& cores,
                                                   const tnss::TNStructure& s, double h = 1e-6) {
    auto loss_of = [&](const tnss::CoreSet& c) {
        tnss::DenseTensor full = tnss::tnc_contract(c, s);
        double loss = 0.0;
        for (std::size_t k = 0; k < full.size(); ++k) {
            const double r = full.data()[k] - sample.data()[k];
            loss += 0.5 * r * r;
        }
        return loss;
    };

    std::vector<tnss::DenseTensor> grads;
    tnss::CoreSet work = cores;
    for (std::size_t v = 0; v < cores.cores.size(); ++v) {
        tnss::DenseTensor g = tnss::DenseTensor::zeros(cores.cores[v].shape());
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double saved = work.cores[v].data()[k];
            work.cores[v].data()[k] = saved + h;
            const double up = loss_of(work);
            work.cores[v].data()[k] = saved - h;
            const double down = loss_of(work);
            work.cores[v].data()[k] = saved;
            g.data()[k] = (up - down) / (2.0 * h);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

/// Frobenius distance between two gradient sets relative to the reference.
inline double gradient_gap(const std::vector<tnss::DenseTensor>& analytic,
                           const std::vector<tnss::DenseTensor>& reference) {
    double num = 0.0, den = 0.0;
    for (std::size_t v = 0; v < analytic.size(); ++v) {
        for (std::size_t k = 0; k < analytic[v].size(); ++k) {
            const double d = analytic[v].data()[k] - reference[v].data()[k];
            num += d * d;
            den += reference[v].data()[k] * reference[v].data()[k];
        }
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

struct RandomInstance {
    std::vector<std::size_t> shape;
    tnss::TNStructure structure;
    tnss::CoreSet cores;
};

/// Small random instance: order in [2, max_order], dims in [1, max_extent],
/// ranks in [1, max_rank], Gaussian cores.
inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_order = 4,
                                      std::size_t max_extent = 3, int max_rank = 3) {
    std::uniform_int_distribution<std::size_t> order_pick(2, max_order);
    const std::size_t order = order_pick(rng);

    std::uniform_int_distribution<std::size_t> dim_pick(1, max_extent);
    std::vector<std::size_t> shape(order);
    for (auto& d : shape) d = dim_pick(rng);

    std::uniform_int_distribution<int> rank_pick(1, max_rank);
    std::vector<int> ranks(tnss::TNStructure::num_pairs(order));
    for (auto& r : ranks) r = rank_pick(rng);

    tnss::TNStructure s(order, std::move(ranks));
    tnss::CoreSet cores = tnss::init_cores(s, shape, rng());
    return {std::move(shape), std::move(s), std::move(cores)};
}

}  // namespace oracle
