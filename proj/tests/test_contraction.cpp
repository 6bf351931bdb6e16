#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "tnss/contraction.hpp"
#include "tnss/errors.hpp"
#include "tnss/objective.hpp"
#include "tnss/structure.hpp"
#include "tnss/tensor.hpp"

using tnss::CoreSet;
using tnss::DenseTensor;
using tnss::TNStructure;

TEST_CASE("core shapes put the physical mode first, bonds in partner order") {
    TNStructure s(3, {2, 3, 4});
    std::vector<std::size_t> shape{5, 6, 7};
    CHECK(tnss::core_shape(s, shape, 0) == std::vector<std::size_t>{5, 2, 3});
    CHECK(tnss::core_shape(s, shape, 1) == std::vector<std::size_t>{6, 2, 4});
    CHECK(tnss::core_shape(s, shape, 2) == std::vector<std::size_t>{7, 3, 4});
}

TEST_CASE("rank-1 bonds make the contraction an outer product") {
    TNStructure s = TNStructure::all_ones(3);
    CoreSet cores;
    cores.cores.push_back(DenseTensor({2, 1, 1}, {1, 2}));
    cores.cores.push_back(DenseTensor({2, 1, 1}, {3, 5}));
    cores.cores.push_back(DenseTensor({2, 1, 1}, {7, 11}));

    DenseTensor out = tnss::tnc_contract(cores, s);
    REQUIRE(out.shape() == std::vector<std::size_t>{2, 2, 2});
    const double a[2] = {1, 2}, b[2] = {3, 5}, c[2] = {7, 11};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                CHECK(out.at(std::vector<std::size_t>{i, j, k}) ==
                      doctest::Approx(a[i] * b[j] * c[k]));
}

TEST_CASE("a two-vertex network is a matrix factorization") {
    TNStructure s(2, {2});
    // V1 in R^{3x2}, V2 in R^{4x2}; expect V1 * V2^T.
    DenseTensor v1({3, 2}, {1, 2, 3, 4, 5, 6});
    DenseTensor v2({4, 2}, {1, 0, 0, 1, 1, 1, 2, -1});
    CoreSet cores{{v1, v2}};

    DenseTensor out = tnss::tnc_contract(cores, s);
    REQUIRE(out.shape() == std::vector<std::size_t>{3, 4});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            double expect = 0;
            for (std::size_t r = 0; r < 2; ++r)
                expect += v1.at(std::vector<std::size_t>{i, r}) *
                          v2.at(std::vector<std::size_t>{j, r});
            CHECK(out.at(std::vector<std::size_t>{i, j}) == doctest::Approx(expect));
        }
}

TEST_CASE("engine matches the brute-force oracle on a seeded integer instance") {
    TNStructure s(3, {2, 1, 1});
    std::vector<std::size_t> shape{2, 2, 2};
    std::mt19937_64 rng(0);
    std::uniform_int_distribution<int> pick(-3, 3);

    CoreSet cores;
    for (std::size_t v = 0; v < 3; ++v) {
        auto cs = tnss::core_shape(s, shape, v);
        DenseTensor core = DenseTensor::zeros(cs);
        for (std::size_t k = 0; k < core.size(); ++k) core.data()[k] = double(pick(rng));
        cores.cores.push_back(std::move(core));
    }

    DenseTensor fast = tnss::tnc_contract(cores, s);
    DenseTensor slow = oracle::contract(s, cores, shape);
    REQUIRE(fast.shape() == slow.shape());
    for (std::size_t k = 0; k < fast.size(); ++k) CHECK(fast[k] == doctest::Approx(slow[k]));
}

TEST_CASE("engine matches the brute-force oracle on random instances") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 10; ++t) {
        oracle::RandomInstance inst = oracle::random_instance(rng);
        DenseTensor fast = tnss::tnc_contract(inst.cores, inst.structure);
        DenseTensor slow = oracle::contract(inst.structure, inst.cores, inst.shape);
        double num = 0, den = 0;
        for (std::size_t k = 0; k < fast.size(); ++k) {
            num += (fast[k] - slow[k]) * (fast[k] - slow[k]);
            den += slow[k] * slow[k];
        }
        CHECK(std::sqrt(num) <= 1e-10 * std::max(1.0, std::sqrt(den)));
    }
}

TEST_CASE("contraction is linear in each core") {
    std::mt19937_64 rng(7);
    oracle::RandomInstance inst = oracle::random_instance(rng, 3, 3, 2);
    DenseTensor base = tnss::tnc_contract(inst.cores, inst.structure);

    CoreSet scaled = inst.cores;
    for (std::size_t k = 0; k < scaled.cores[1].size(); ++k) scaled.cores[1].data()[k] *= 2.5;
    DenseTensor out = tnss::tnc_contract(scaled, inst.structure);
    for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k] == doctest::Approx(2.5 * base[k]));
}

namespace {

// Rebuild the core list for a mode relabeling: new vertex a takes old core
// perm[a] with its bond modes reordered by the new ascending-partner rule.
tnss::CoreSet permute_cores(const tnss::CoreSet& cores, const TNStructure& s,
                            const std::vector<std::size_t>& perm) {
    const std::size_t n = s.order();
    tnss::CoreSet out;
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t old_v = perm[a];
        // Old core axes: physical, then bonds toward ascending old partners.
        std::vector<std::size_t> old_partners;
        for (std::size_t u = 0; u < n; ++u)
            if (u != old_v) old_partners.push_back(u);

        std::vector<std::size_t> axis_perm{0};
        for (std::size_t b = 0; b < n; ++b) {
            if (b == a) continue;
            const std::size_t old_partner = perm[b];
            for (std::size_t pos = 0; pos < old_partners.size(); ++pos)
                if (old_partners[pos] == old_partner) axis_perm.push_back(pos + 1);
        }
        out.cores.push_back(tnss::permute_modes(cores.cores[old_v], axis_perm));
    }
    return out;
}

}  // namespace

TEST_CASE("contraction commutes with mode relabeling") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 5; ++t) {
        oracle::RandomInstance inst = oracle::random_instance(rng, 4, 3, 3);
        const std::size_t n = inst.structure.order();

        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);

        DenseTensor direct =
            tnss::permute_modes(tnss::tnc_contract(inst.cores, inst.structure), perm);
        DenseTensor relabeled = tnss::tnc_contract(permute_cores(inst.cores, inst.structure, perm),
                                                   tnss::permute_structure(inst.structure, perm));
        REQUIRE(direct.shape() == relabeled.shape());
        for (std::size_t k = 0; k < direct.size(); ++k)
            CHECK(std::abs(direct[k] - relabeled[k]) <= 1e-12 * std::max(1.0, std::abs(direct[k])));
    }
}

TEST_CASE("core validation reports mismatches") {
    TNStructure s(3, {2, 3, 4});
    std::vector<std::size_t> shape{5, 6, 7};
    CoreSet cores;
    for (std::size_t v = 0; v < 3; ++v)
        cores.cores.push_back(DenseTensor::zeros(tnss::core_shape(s, shape, v)));
    CHECK_NOTHROW(tnss::validate_cores(cores, s));

    SUBCASE("wrong core count") {
        cores.cores.pop_back();
        CHECK_THROWS_AS(tnss::validate_cores(cores, s), tnss::ShapeError);
    }
    SUBCASE("bond extent disagrees with the structure") {
        cores.cores[1] = DenseTensor::zeros({6, 3, 4});
        CHECK_THROWS_AS(tnss::validate_cores(cores, s), tnss::ShapeError);
    }
    SUBCASE("core order too small") {
        cores.cores[2] = DenseTensor::zeros({7, 12});
        CHECK_THROWS_AS(tnss::validate_cores(cores, s), tnss::ShapeError);
    }
}

TEST_CASE("environment contraction is the adjoint of the full contraction") {
    // <env_v(X), V_v> must equal <X, TNC(cores)> for every vertex v.
    std::mt19937_64 rng(13);
    for (int t = 0; t < 5; ++t) {
        oracle::RandomInstance inst = oracle::random_instance(rng, 4, 3, 3);
        DenseTensor full = tnss::tnc_contract(inst.cores, inst.structure);

        DenseTensor x = DenseTensor::zeros(inst.shape);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (std::size_t k = 0; k < x.size(); ++k) x.data()[k] = gauss(rng);

        double x_dot_full = 0;
        for (std::size_t k = 0; k < x.size(); ++k) x_dot_full += x[k] * full[k];

        for (std::size_t v = 0; v < inst.structure.order(); ++v) {
            DenseTensor env = tnss::contract_environment(x, inst.cores, inst.structure, v);
            REQUIRE(env.shape() == inst.cores.cores[v].shape());
            double env_dot_core = 0;
            for (std::size_t k = 0; k < env.size(); ++k)
                env_dot_core += env[k] * inst.cores.cores[v][k];
            CHECK(env_dot_core == doctest::Approx(x_dot_full).epsilon(1e-10));
        }
    }
}
