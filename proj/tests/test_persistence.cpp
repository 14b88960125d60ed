// SPDX-License-Identifier: Apache-2.0
#include <cstdint>
#include <string>
#include <vector>

#include "concil/engine.hpp"
#include "concil/errors.hpp"
#include "concil/harness.hpp"
#include "concil/persistence.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

using concil::DenseMatrix;
using concil::LabeledDataset;
using concil::ModelState;

namespace {

// A state with growth history, re-visited concepts and an override, so the
// round trip exercises every payload field.
ModelState grown_state() {
    concil::EngineConfig config;
    config.lambda1 = 0.7;
    config.lambda2 = 0.3;
    config.backbone_expansion_dim = 6;
    config.concept_expansion_dim = 8;
    config.growth_out_per_phase = 3;

    concil::PhaseBatch base;
    base.features = oracle::random_matrix(6, 4, 401);
    base.concepts = DenseMatrix(6, 3);
    for (std::size_t i = 0; i < 6; ++i) base.concepts(i, i % 3) = 1.0;
    base.concept_col_ids = {0, 1, 2};
    base.classes = DenseMatrix(6, 2);
    for (std::size_t i = 0; i < 6; ++i) base.classes(i, i % 2) = 1.0;
    base.class_col_ids = {0, 1};

    concil::PhaseBatch next;
    next.features = oracle::random_matrix(5, 4, 402);
    next.concepts = DenseMatrix(5, 4);
    for (std::size_t i = 0; i < 5; ++i) next.concepts(i, i % 4) = 1.0;
    next.concept_col_ids = {1, 2, 3, 4};
    next.classes = DenseMatrix(5, 1);
    for (std::size_t i = 0; i < 5; ++i) next.classes(i, 0) = 1.0;
    next.class_col_ids = {2};

    return concil::phase_update(concil::base_fit(base, config), next);
}

LabeledDataset small_table() {
    concil::SyntheticSpec spec;
    spec.classes = 4;
    spec.concepts = 5;
    spec.samples_per_class = 3;
    spec.feature_dim = 7;
    return concil::generate_synthetic(spec);
}

void flip_byte(const std::string& path, std::size_t offset) {
    std::string bytes = oracle::read_file(path);
    REQUIRE(offset < bytes.size());
    bytes[offset] = static_cast<char>(bytes[offset] ^ 0x40);
    oracle::write_file(path, bytes);
}

} // namespace

TEST_CASE("checkpoints round trip a grown model state bit-exactly") {
    const ModelState state = grown_state();
    REQUIRE(!state.concept_expansion.growth_history().empty());
    const oracle::TempDir dir("ckpt");
    const std::string path = dir.file("model.ckpt");
    const std::uint64_t digest = concil::save_checkpoint(state, path);
    CHECK(digest != 0);
    const ModelState loaded = concil::load_checkpoint(path);
    CHECK(loaded == state);
    CHECK(loaded.growth_out_per_phase == state.growth_out_per_phase);
    // saving the loaded state reproduces the same digest
    const std::string again = dir.file("again.ckpt");
    CHECK(concil::save_checkpoint(loaded, again) == digest);
    CHECK(oracle::read_file(path) == oracle::read_file(again));
}

TEST_CASE("any corrupted payload byte surfaces as a digest mismatch") {
    const ModelState state = grown_state();
    const oracle::TempDir dir("corrupt");
    const std::string path = dir.file("model.ckpt");
    concil::save_checkpoint(state, path);
    const std::size_t size = oracle::read_file(path).size();

    for (std::size_t offset : {std::size_t{16}, std::size_t{40}, size - 1}) {
        concil::save_checkpoint(state, path);
        flip_byte(path, offset);
        CHECK_THROWS_AS((void)concil::load_checkpoint(path), concil::DigestMismatch);
    }

    // header corruption is classified, not digest-checked
    concil::save_checkpoint(state, path);
    flip_byte(path, 0); // magic
    CHECK_THROWS_AS((void)concil::load_checkpoint(path), concil::SchemaError);
    concil::save_checkpoint(state, path);
    flip_byte(path, 4); // version
    CHECK_THROWS_AS((void)concil::load_checkpoint(path), concil::VersionMismatch);
    concil::save_checkpoint(state, path);
    flip_byte(path, 8); // stored digest
    CHECK_THROWS_AS((void)concil::load_checkpoint(path), concil::DigestMismatch);
}

TEST_CASE("truncated and missing checkpoint files are rejected") {
    const ModelState state = grown_state();
    const oracle::TempDir dir("trunc");
    const std::string path = dir.file("model.ckpt");
    concil::save_checkpoint(state, path);
    std::string bytes = oracle::read_file(path);
    oracle::write_file(path, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS((void)concil::load_checkpoint(path), concil::DigestMismatch);
    oracle::write_file(path, bytes.substr(0, 10));
    CHECK_THROWS_AS((void)concil::load_checkpoint(path), concil::SchemaError);
    CHECK_THROWS_AS((void)concil::load_checkpoint(dir.file("absent.ckpt")), concil::IoError);
}

TEST_CASE("the digest function matches the published FNV-1a constants") {
    // FNV-1a of the empty string is the offset basis; of "a" one round.
    CHECK(concil::fnv1a_digest(nullptr, 0) == 14695981039346656037ULL);
    const unsigned char a = 'a';
    CHECK(concil::fnv1a_digest(&a, 1) ==
          (14695981039346656037ULL ^ 'a') * 1099511628211ULL);
}

TEST_CASE("bundles round trip through both encodings value-identically") {
    const LabeledDataset table = small_table();
    const oracle::TempDir dir("bundle");
    for (concil::BundleEncoding enc :
         {concil::BundleEncoding::Text, concil::BundleEncoding::Binary}) {
        const std::string path =
            dir.file(enc == concil::BundleEncoding::Text ? "text" : "binary");
        concil::write_bundle(table, path, enc);
        const LabeledDataset loaded = concil::read_bundle(path);
        CHECK(loaded == table);
    }
}

TEST_CASE("an empty table round trips") {
    LabeledDataset table;
    table.features = DenseMatrix(0, 4);
    table.concepts = DenseMatrix(0, 2);
    table.concept_column_ids = {10, 11};
    const oracle::TempDir dir("empty");
    for (concil::BundleEncoding enc :
         {concil::BundleEncoding::Text, concil::BundleEncoding::Binary}) {
        const std::string path =
            dir.file(enc == concil::BundleEncoding::Text ? "text" : "binary");
        concil::write_bundle(table, path, enc);
        CHECK(concil::read_bundle(path) == table);
    }
}

TEST_CASE("manifest dimension mismatches name the offending file") {
    const LabeledDataset table = small_table();
    const oracle::TempDir dir("mismatch");
    concil::write_bundle(table, dir.str(), concil::BundleEncoding::Binary);

    const std::string manifest_path = dir.file("manifest.json");
    nlohmann::json manifest = nlohmann::json::parse(oracle::read_file(manifest_path));
    manifest["feature_dim"] = table.features.cols() + 1;
    oracle::write_file(manifest_path, manifest.dump(2) + "\n");
    try {
        (void)concil::read_bundle(dir.str());
        FAIL("expected SchemaError");
    } catch (const concil::SchemaError& e) {
        CHECK(std::string(e.what()).find("features") != std::string::npos);
        CHECK(std::string(e.what()).find("manifest") != std::string::npos);
    }
}

TEST_CASE("a class_count that disagrees with the labels file is rejected") {
    const LabeledDataset table = small_table();
    const oracle::TempDir dir("classcount");
    concil::write_bundle(table, dir.str(), concil::BundleEncoding::Binary);
    const std::string manifest_path = dir.file("manifest.json");
    nlohmann::json manifest = nlohmann::json::parse(oracle::read_file(manifest_path));
    manifest["class_count"] = 99;
    oracle::write_file(manifest_path, manifest.dump(2) + "\n");
    try {
        (void)concil::read_bundle(dir.str());
        FAIL("expected SchemaError");
    } catch (const concil::SchemaError& e) {
        CHECK(std::string(e.what()).find("class_count") != std::string::npos);
    }
}

TEST_CASE("bad values in a text payload report their row and column") {
    const LabeledDataset table = small_table();
    const oracle::TempDir dir("badvalue");
    concil::write_bundle(table, dir.str(), concil::BundleEncoding::Text);

    // non-numeric feature entry
    std::string features = oracle::read_file(dir.file("features.csv"));
    const std::size_t first_comma = features.find(',');
    std::string broken = features;
    broken.replace(0, first_comma, "not_a_number");
    oracle::write_file(dir.file("features.csv"), broken);
    try {
        (void)concil::read_bundle(dir.str());
        FAIL("expected SchemaError");
    } catch (const concil::SchemaError& e) {
        CHECK(std::string(e.what()).find("[0][0]") != std::string::npos);
    }
    oracle::write_file(dir.file("features.csv"), features);

    // non-binary concept entry
    std::string concepts = oracle::read_file(dir.file("concepts.csv"));
    concepts.replace(0, 1, "7"); // first value becomes 7 or 7-prefixed
    oracle::write_file(dir.file("concepts.csv"), concepts);
    try {
        (void)concil::read_bundle(dir.str());
        FAIL("expected SchemaError");
    } catch (const concil::SchemaError& e) {
        CHECK(std::string(e.what()).find("[0][0]") != std::string::npos);
    }
}

TEST_CASE("unknown encodings and versions are rejected") {
    const LabeledDataset table = small_table();
    const oracle::TempDir dir("encoding");
    concil::write_bundle(table, dir.str(), concil::BundleEncoding::Binary);
    const std::string manifest_path = dir.file("manifest.json");
    nlohmann::json manifest = nlohmann::json::parse(oracle::read_file(manifest_path));

    nlohmann::json broken = manifest;
    broken["files"]["features"]["encoding"] = "base64";
    oracle::write_file(manifest_path, broken.dump(2) + "\n");
    CHECK_THROWS_AS((void)concil::read_bundle(dir.str()), concil::SchemaError);

    broken = manifest;
    broken["format_version"] = "2";
    oracle::write_file(manifest_path, broken.dump(2) + "\n");
    CHECK_THROWS_AS((void)concil::read_bundle(dir.str()), concil::VersionMismatch);

    oracle::write_file(manifest_path, "{ not json");
    CHECK_THROWS_AS((void)concil::read_bundle(dir.str()), concil::SchemaError);
}

TEST_CASE("predictions from a restored checkpoint are bit-identical") {
    const ModelState state = grown_state();
    const oracle::TempDir dir("predict");
    const std::string path = dir.file("model.ckpt");
    concil::save_checkpoint(state, path);
    const ModelState loaded = concil::load_checkpoint(path);

    const DenseMatrix probe = oracle::random_matrix(5, 4, 403);
    const concil::Prediction a = concil::predict(state, probe);
    const concil::Prediction b = concil::predict(loaded, probe);
    CHECK(a.concept_scores == b.concept_scores);
    CHECK(a.class_scores == b.class_scores);
    CHECK(a.concept_decisions == b.concept_decisions);
    CHECK(a.class_decisions == b.class_decisions);
}
