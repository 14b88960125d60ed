// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdint>
#include <vector>

#include "concil/errors.hpp"
#include "concil/expansion.hpp"
#include "concil/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using concil::DenseMatrix;
using concil::ExpansionLayer;

TEST_CASE("layer construction is deterministic in the seed") {
    const ExpansionLayer a = concil::new_expansion(4, 7, 99, 0.5);
    const ExpansionLayer b = concil::new_expansion(4, 7, 99, 0.5);
    CHECK(a == b);
    const ExpansionLayer c = concil::new_expansion(4, 7, 100, 0.5);
    CHECK(a.weight() != c.weight());
}

TEST_CASE("unit-scale weights look like standard normal draws") {
    const ExpansionLayer layer = concil::new_expansion(3, 5, 42, 1.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < layer.weight().size(); ++i) sum += layer.weight().data()[i];
    const double mean = sum / 15.0;
    // standard error of the mean of 15 unit-variance draws, three sigmas
    CHECK(std::abs(mean) < 3.0 / std::sqrt(15.0));
}

TEST_CASE("scale multiplies every weight exactly") {
    const ExpansionLayer unit = concil::new_expansion(3, 5, 42, 1.0);
    const ExpansionLayer twice = concil::new_expansion(3, 5, 42, 2.0);
    for (std::size_t i = 0; i < unit.weight().size(); ++i)
        CHECK(twice.weight().data()[i] == 2.0 * unit.weight().data()[i]);
}

TEST_CASE("negative pre-activations clip to exactly zero") {
    // find a seed whose single weight is negative, then drive it positive input
    std::uint64_t seed = 0;
    for (; seed < 64; ++seed) {
        if (concil::new_expansion(1, 1, seed, 1.0).weight()(0, 0) < 0.0) break;
    }
    REQUIRE(seed < 64);
    const ExpansionLayer layer = concil::new_expansion(1, 1, seed, 1.0);
    const DenseMatrix out = concil::expand(layer, DenseMatrix(1, 1, {3.0}));
    CHECK(out(0, 0) == 0.0);
}

TEST_CASE("expansion equals the hand matmul-plus-clip oracle bit for bit") {
    const ExpansionLayer layer = concil::new_expansion(3, 6, 7, 0.8);
    const DenseMatrix inputs = oracle::random_matrix(4, 3, 201);
    const DenseMatrix expected = oracle::expand_reference(inputs, layer.weight());
    CHECK(concil::expand(layer, inputs) == expected);
}

TEST_CASE("growth by nothing records the event and changes no weight") {
    const ExpansionLayer base = concil::new_expansion(4, 6, 11, 1.0);
    const ExpansionLayer grown = concil::grow(base, 0, 0, 55);
    CHECK(grown.weight() == base.weight());
    REQUIRE(grown.growth_history().size() == 1);
    CHECK(grown.growth_history()[0].added_in_rows == 0);
    CHECK(grown.growth_history()[0].added_out_cols == 0);
    CHECK(grown.growth_history()[0].sub_seed == 55);
}

TEST_CASE("grown weights are the block assembly of old weights and fresh draws") {
    const double scale = 0.7;
    const ExpansionLayer base = concil::new_expansion(3, 5, 23, scale);
    const std::uint64_t sub_seed = concil::derive_seed(23, 1);
    const ExpansionLayer grown = concil::grow(base, 2, 4, sub_seed);
    REQUIRE(grown.in_dim() == 5);
    REQUIRE(grown.out_dim() == 9);

    // expected = [[W_old, 0], [0, fresh]] with fresh drawn row-major
    DenseMatrix expected(5, 9);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 5; ++j) expected(i, j) = base.weight()(i, j);
    concil::NormalStream stream(sub_seed);
    for (std::size_t i = 3; i < 5; ++i)
        for (std::size_t j = 5; j < 9; ++j) expected(i, j) = scale * stream.next();
    CHECK(grown.weight() == expected);

    // and the expansion of data through the grown layer matches the oracle
    const DenseMatrix inputs = oracle::random_matrix(6, 5, 202);
    CHECK(concil::expand(grown, inputs) == oracle::expand_reference(inputs, expected));
}

TEST_CASE("old data passes through a grown layer untouched") {
    const ExpansionLayer base = concil::new_expansion(4, 6, 31, 1.0);
    const DenseMatrix old_inputs = oracle::random_matrix(5, 4, 203);
    const DenseMatrix before = concil::expand(base, old_inputs);

    const ExpansionLayer grown = concil::grow(base, 3, 5, 77);
    DenseMatrix padded(5, 7);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 4; ++j) padded(i, j) = old_inputs(i, j);
    const DenseMatrix after = concil::expand(grown, padded);

    REQUIRE(after.cols() == 11);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 6; ++j) CHECK(after(i, j) == before(i, j));
        for (std::size_t j = 6; j < 11; ++j) CHECK(after(i, j) == 0.0);
    }
}

TEST_CASE("replaying seed, scale and growth history rebuilds the layer bit-exactly") {
    ExpansionLayer layer = concil::new_expansion(3, 4, 17, 0.25);
    layer = concil::grow(layer, 2, 3, concil::derive_seed(17, 1));
    layer = concil::grow(layer, 0, 0, concil::derive_seed(17, 2));
    layer = concil::grow(layer, 1, 2, concil::derive_seed(17, 3));

    const ExpansionLayer replayed = concil::replay_expansion(
        layer.base_in_dim(), layer.base_out_dim(), layer.seed(), layer.scale(),
        layer.growth_history());
    CHECK(replayed == layer);
}

TEST_CASE("construction and expansion reject invalid arguments") {
    CHECK_THROWS_AS((void)concil::new_expansion(0, 3, 1, 1.0), concil::ConfigError);
    CHECK_THROWS_AS((void)concil::new_expansion(3, 0, 1, 1.0), concil::ConfigError);
    CHECK_THROWS_AS((void)concil::new_expansion(3, 3, 1, 0.0), concil::ConfigError);
    CHECK_THROWS_AS((void)concil::new_expansion(3, 3, 1, -1.0), concil::ConfigError);
    const ExpansionLayer layer = concil::new_expansion(3, 4, 1, 1.0);
    CHECK_THROWS_AS((void)concil::expand(layer, DenseMatrix(2, 5)),
                    concil::DimensionMismatch);
}
