#include <doctest.h>

#include <vector>

#include "tnss/errors.hpp"
#include "tnss/structure.hpp"

using tnss::TNStructure;

TEST_CASE("structure construction enforces the invariants") {
    CHECK_NOTHROW(TNStructure(3, {1, 2, 3}));
    CHECK_THROWS_AS(TNStructure(1, {}), tnss::ConfigError);
    CHECK_THROWS_AS(TNStructure(3, {1, 2}), tnss::ShapeError);
    CHECK_THROWS_AS(TNStructure(3, {1, 0, 2}), tnss::ConfigError);
    CHECK_THROWS_AS(TNStructure(3, {1, -1, 2}), tnss::ConfigError);
}

TEST_CASE("pair indexing walks the upper triangle row by row") {
    CHECK(TNStructure::num_pairs(2) == 1);
    CHECK(TNStructure::num_pairs(3) == 3);
    CHECK(TNStructure::num_pairs(4) == 6);

    CHECK(TNStructure::pair_index(0, 1, 3) == 0);
    CHECK(TNStructure::pair_index(0, 2, 3) == 1);
    CHECK(TNStructure::pair_index(1, 2, 3) == 2);

    std::size_t expected = 0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i + 1; j < 4; ++j)
            CHECK(TNStructure::pair_index(i, j, 4) == expected++);
}

TEST_CASE("rank lookup is symmetric in its arguments") {
    TNStructure s(3, {2, 3, 4});
    CHECK(s.rank(0, 1) == 2);
    CHECK(s.rank(1, 0) == 2);
    CHECK(s.rank(2, 0) == 3);
    CHECK(s.rank(2, 1) == 4);
    CHECK_THROWS_AS(s.rank(1, 1), tnss::Error);

    s.set_rank(2, 0, 7);
    CHECK(s.rank(0, 2) == 7);
}

TEST_CASE("vertex ranks list partners in ascending order") {
    TNStructure s(4, {2, 3, 4, 5, 6, 7});
    CHECK(s.vertex_ranks(0) == std::vector<int>{2, 3, 4});
    CHECK(s.vertex_ranks(1) == std::vector<int>{2, 5, 6});
    CHECK(s.vertex_ranks(3) == std::vector<int>{4, 6, 7});
}

TEST_CASE("parameter count sums per-core volumes") {
    std::vector<std::size_t> cube{4, 4, 4};
    CHECK(tnss::param_count(TNStructure::all_ones(3), cube) == 12);

    std::vector<std::size_t> box{4, 5, 6};
    CHECK(tnss::param_count(TNStructure(3, {2, 3, 4}), box) == 136);

    std::vector<std::size_t> mat{2, 2};
    CHECK(tnss::param_count(TNStructure(2, {2}), mat) == 8);

    CHECK_THROWS_AS(tnss::param_count(TNStructure(2, {2}), cube), tnss::ShapeError);
}

TEST_CASE("compression ratio divides by the entry count") {
    std::vector<std::size_t> cube{4, 4, 4};
    CHECK(tnss::compression_ratio(TNStructure::all_ones(3), cube) == doctest::Approx(0.1875));
    std::vector<std::size_t> box{4, 5, 6};
    CHECK(tnss::compression_ratio(TNStructure(3, {2, 3, 4}), box) ==
          doctest::Approx(136.0 / 120.0));
    std::vector<std::size_t> mat{2, 2};
    CHECK(tnss::compression_ratio(TNStructure(2, {2}), mat) == doctest::Approx(2.0));
}

TEST_CASE("all-ones compression is sum over product of extents") {
    std::vector<std::vector<std::size_t>> shapes{{3, 7}, {2, 5, 9}, {4, 4, 4, 4}, {6, 2, 8, 3, 5}};
    for (const auto& shape : shapes) {
        double sum = 0, prod = 1;
        for (auto d : shape) {
            sum += double(d);
            prod *= double(d);
        }
        CHECK(tnss::compression_ratio(TNStructure::all_ones(shape.size()), shape) ==
              doctest::Approx(sum / prod));
    }
}

TEST_CASE("format_ranks prints the bracketed vector") {
    CHECK(tnss::format_ranks(TNStructure(3, {3, 2, 1})) == "[3, 2, 1]");
    CHECK(tnss::format_ranks(TNStructure(2, {5})) == "[5]");
}

TEST_CASE("structure permutation relabels the rank matrix") {
    TNStructure s(3, {2, 3, 4});

    SUBCASE("identity") {
        CHECK(tnss::permute_structure(s, std::vector<std::size_t>{0, 1, 2}) == s);
    }
    SUBCASE("cycle (2,0,1)") {
        TNStructure p = tnss::permute_structure(s, std::vector<std::size_t>{2, 0, 1});
        CHECK(p.ranks() == std::vector<int>{3, 4, 2});
    }
    SUBCASE("perm then inverse is the identity") {
        TNStructure p = tnss::permute_structure(s, std::vector<std::size_t>{2, 0, 1});
        TNStructure back = tnss::permute_structure(p, std::vector<std::size_t>{1, 2, 0});
        CHECK(back == s);
    }
    SUBCASE("invalid permutations are rejected") {
        CHECK_THROWS_AS(tnss::permute_structure(s, std::vector<std::size_t>{0, 1}), tnss::Error);
        CHECK_THROWS_AS(tnss::permute_structure(s, std::vector<std::size_t>{0, 1, 1}),
                        tnss::Error);
    }
}
