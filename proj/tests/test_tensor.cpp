#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "tnss/errors.hpp"
#include "tnss/tensor.hpp"

using tnss::DenseTensor;
using tnss::TensorDataset;

TEST_CASE("dense tensor validates shape and data") {
    CHECK_NOTHROW(DenseTensor({2, 3}, std::vector<double>(6, 1.0)));
    CHECK_THROWS_AS(DenseTensor({2, 3}, std::vector<double>(5, 1.0)), tnss::ShapeError);
    CHECK_THROWS_AS(DenseTensor({2, 0}, std::vector<double>{}), tnss::ShapeError);
    CHECK_THROWS_AS(DenseTensor({}, std::vector<double>{}), tnss::ShapeError);

    std::vector<double> bad(6, 1.0);
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(DenseTensor({2, 3}, bad), tnss::Error);
    bad[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(DenseTensor({2, 3}, bad), tnss::Error);
}

TEST_CASE("multi-index access is row-major and bounds-checked") {
    DenseTensor t({2, 3}, {0, 1, 2, 3, 4, 5});
    CHECK(t.at(std::vector<std::size_t>{0, 2}) == 2.0);
    CHECK(t.at(std::vector<std::size_t>{1, 0}) == 3.0);
    CHECK_THROWS_AS(t.at(std::vector<std::size_t>{2, 0}), tnss::ShapeError);
    CHECK_THROWS_AS(t.at(std::vector<std::size_t>{0, 0, 0}), tnss::ShapeError);
}

TEST_CASE("relative error matches hand computations") {
    DenseTensor x({2}, {3, 4});
    DenseTensor xhat({2}, {0, 4});
    CHECK(tnss::relative_error(x, x) == 0.0);
    CHECK(tnss::relative_error(x, DenseTensor::zeros({2})) == doctest::Approx(1.0));
    CHECK(tnss::relative_error(x, xhat) == doctest::Approx(0.6));

    CHECK_THROWS_AS(tnss::relative_error(x, DenseTensor::zeros({3})), tnss::ShapeError);
    CHECK_THROWS_AS(tnss::relative_error(DenseTensor::zeros({2}), x), tnss::Error);
}

TEST_CASE("permute_modes reorders axes") {
    // t[i,j,k] = 100i + 10j + k over shape (2,3,4).
    std::vector<double> data;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 4; ++k) data.push_back(100.0 * i + 10.0 * j + k);
    DenseTensor t({2, 3, 4}, data);

    SUBCASE("identity") {
        DenseTensor p = tnss::permute_modes(t, std::vector<std::size_t>{0, 1, 2});
        CHECK(p.values() == t.values());
    }
    SUBCASE("cycle") {
        DenseTensor p = tnss::permute_modes(t, std::vector<std::size_t>{2, 0, 1});
        CHECK(p.shape() == std::vector<std::size_t>{4, 2, 3});
        CHECK(p.at(std::vector<std::size_t>{3, 1, 2}) == 100.0 * 1 + 10.0 * 2 + 3);
    }
    SUBCASE("round trip through the inverse") {
        DenseTensor p = tnss::permute_modes(t, std::vector<std::size_t>{2, 0, 1});
        DenseTensor back = tnss::permute_modes(p, std::vector<std::size_t>{1, 2, 0});
        CHECK(back.shape() == t.shape());
        CHECK(back.values() == t.values());
    }
    SUBCASE("invalid permutations are rejected") {
        CHECK_THROWS_AS(tnss::permute_modes(t, std::vector<std::size_t>{0, 0, 1}), tnss::Error);
        CHECK_THROWS_AS(tnss::permute_modes(t, std::vector<std::size_t>{0, 1}), tnss::Error);
    }
}

TEST_CASE("dataset requires uniform nonempty samples") {
    CHECK_THROWS_AS(TensorDataset({}), tnss::Error);
    std::vector<DenseTensor> mixed{DenseTensor::zeros({2, 2}), DenseTensor::zeros({2, 3})};
    CHECK_THROWS_AS(TensorDataset(std::move(mixed)), tnss::ShapeError);
}

TEST_CASE("delay embedding slides a window along the chosen axis") {
    DenseTensor series({6}, {1, 2, 3, 4, 5, 6});

    SUBCASE("window 3 stride 1 gives the classic Hankel samples") {
        TensorDataset d = tnss::delay_embed(series, 0, 3, 1);
        REQUIRE(d.num_samples() == 4);
        CHECK(d.sample(0).values() == std::vector<double>{1, 2, 3});
        CHECK(d.sample(1).values() == std::vector<double>{2, 3, 4});
        CHECK(d.sample(2).values() == std::vector<double>{3, 4, 5});
        CHECK(d.sample(3).values() == std::vector<double>{4, 5, 6});
    }
    SUBCASE("window equal to the axis length is the identity") {
        TensorDataset d = tnss::delay_embed(series, 0, 6, 1);
        REQUIRE(d.num_samples() == 1);
        CHECK(d.sample(0).values() == series.values());
    }
    SUBCASE("sample count follows (extent - window)/stride + 1") {
        std::vector<double> longer(146);
        for (std::size_t i = 0; i < longer.size(); ++i) longer[i] = double(i);
        TensorDataset d = tnss::delay_embed(DenseTensor({146}, longer), 0, 5, 1);
        CHECK(d.num_samples() == 142);
    }
    SUBCASE("stride == window tiles the series") {
        TensorDataset d = tnss::delay_embed(series, 0, 2, 2);
        REQUIRE(d.num_samples() == 3);
        std::vector<double> recon;
        for (const auto& s : d.samples())
            recon.insert(recon.end(), s.values().begin(), s.values().end());
        CHECK(recon == series.values());
    }
    SUBCASE("the windowed axis moves to the last mode") {
        // series[t, c] over shape (4, 2); windows of length 2 along axis 0.
        DenseTensor grid({4, 2}, {0, 1, 10, 11, 20, 21, 30, 31});
        TensorDataset d = tnss::delay_embed(grid, 0, 2, 1);
        REQUIRE(d.num_samples() == 3);
        CHECK(d.sample(0).shape() == std::vector<std::size_t>{2, 2});
        // sample 1 covers t in {1, 2}: entry [c, w] = grid[1 + w, c].
        CHECK(d.sample(1).at(std::vector<std::size_t>{0, 0}) == 10.0);
        CHECK(d.sample(1).at(std::vector<std::size_t>{0, 1}) == 20.0);
        CHECK(d.sample(1).at(std::vector<std::size_t>{1, 1}) == 21.0);
    }
    SUBCASE("invalid windows and axes are rejected") {
        CHECK_THROWS_AS(tnss::delay_embed(series, 0, 7, 1), tnss::Error);
        CHECK_THROWS_AS(tnss::delay_embed(series, 0, 0, 1), tnss::Error);
        CHECK_THROWS_AS(tnss::delay_embed(series, 1, 3, 1), tnss::Error);
        CHECK_THROWS_AS(tnss::delay_embed(series, 0, 3, 0), tnss::Error);
    }
}

TEST_CASE("min-max normalization uses one global affine map") {
    SUBCASE("spread values hit 0 and 1") {
        TensorDataset d({DenseTensor({3}, {2, 4, 6})});
        TensorDataset n = tnss::minmax_normalize(d);
        CHECK(n.sample(0).values() == std::vector<double>{0.0, 0.5, 1.0});
    }
    SUBCASE("the extrema may live in different samples") {
        TensorDataset d({DenseTensor({2}, {2, 4}), DenseTensor({2}, {6, 4})});
        TensorDataset n = tnss::minmax_normalize(d);
        CHECK(n.sample(0).values() == std::vector<double>{0.0, 0.5});
        CHECK(n.sample(1).values() == std::vector<double>{1.0, 0.5});
    }
    SUBCASE("constant data maps to zeros") {
        TensorDataset d({DenseTensor({2, 2}, {3, 3, 3, 3})});
        TensorDataset n = tnss::minmax_normalize(d);
        CHECK(n.sample(0).values() == std::vector<double>(4, 0.0));
    }
    SUBCASE("data already spanning [0, 1] is unchanged") {
        TensorDataset d({DenseTensor({3}, {0.0, 0.25, 1.0})});
        TensorDataset n = tnss::minmax_normalize(d);
        CHECK(n.sample(0).values() == std::vector<double>{0.0, 0.25, 1.0});
    }
}
