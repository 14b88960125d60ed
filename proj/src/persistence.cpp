// SPDX-License-Identifier: Apache-2.0
#include "concil/persistence.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "concil/errors.hpp"

namespace concil {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a_digest(const unsigned char* data, std::size_t size) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= data[i];
        hash *= 1099511628211ULL;
    }
    return hash;
}

namespace {

constexpr char kCheckpointMagic[4] = {'C', 'C', 'K', 'P'};
constexpr char kMatrixMagic[4] = {'C', 'M', 'X', '1'};
constexpr char kVectorMagic[4] = {'C', 'I', 'V', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

void append_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void append_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void append_i64(std::vector<unsigned char>& out, std::int64_t v) {
    append_u64(out, static_cast<std::uint64_t>(v));
}

void append_f64(std::vector<unsigned char>& out, double v) {
    append_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
  public:
    ByteReader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

    unsigned char read_u8() {
        require(1);
        return data_[pos_++];
    }
    std::uint32_t read_u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t read_u64() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::int64_t read_i64() { return static_cast<std::int64_t>(read_u64()); }
    double read_f64() { return std::bit_cast<double>(read_u64()); }
    std::size_t remaining() const { return size_ - pos_; }

  private:
    void require(std::size_t n) {
        if (size_ - pos_ < n) throw SchemaError("payload truncated");
    }
    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

void append_matrix(std::vector<unsigned char>& out, const DenseMatrix& m) {
    append_u64(out, m.rows());
    append_u64(out, m.cols());
    for (double v : m.values()) append_f64(out, v);
}

DenseMatrix read_matrix(ByteReader& in) {
    std::size_t rows = in.read_u64();
    std::size_t cols = in.read_u64();
    if (cols != 0 && rows > in.remaining() / (8 * cols))
        throw SchemaError("matrix dimensions exceed payload size");
    DenseMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = in.read_f64();
    return m;
}

void append_ids(std::vector<unsigned char>& out, const std::vector<std::int64_t>& ids) {
    append_u64(out, ids.size());
    for (std::int64_t id : ids) append_i64(out, id);
}

std::vector<std::int64_t> read_ids(ByteReader& in) {
    std::size_t count = in.read_u64();
    if (count > in.remaining() / 8) throw SchemaError("id list exceeds payload size");
    std::vector<std::int64_t> ids(count);
    for (std::size_t i = 0; i < count; ++i) ids[i] = in.read_i64();
    return ids;
}

void append_layer(std::vector<unsigned char>& out, const ExpansionLayer& layer) {
    append_u64(out, layer.base_in_dim());
    append_u64(out, layer.base_out_dim());
    append_u64(out, layer.seed());
    append_f64(out, layer.scale());
    append_u64(out, layer.growth_history().size());
    for (const GrowthRecord& rec : layer.growth_history()) {
        append_u64(out, rec.phase);
        append_u64(out, rec.added_in_rows);
        append_u64(out, rec.added_out_cols);
        append_u64(out, rec.sub_seed);
    }
}

ExpansionLayer read_layer(ByteReader& in) {
    std::size_t base_in = in.read_u64();
    std::size_t base_out = in.read_u64();
    std::uint64_t seed = in.read_u64();
    double scale = in.read_f64();
    std::size_t count = in.read_u64();
    if (count > in.remaining() / 32) throw SchemaError("growth history exceeds payload size");
    std::vector<GrowthRecord> history(count);
    for (GrowthRecord& rec : history) {
        rec.phase = in.read_u64();
        rec.added_in_rows = in.read_u64();
        rec.added_out_cols = in.read_u64();
        rec.sub_seed = in.read_u64();
    }
    ExpansionLayer layer = replay_expansion(base_in, base_out, seed, scale, history);
    if (layer.growth_history() != history)
        throw SchemaError("growth records are not a sequential history");
    return layer;
}

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path + " for reading");
    std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>()};
    if (in.bad()) throw IoError("failed reading " + path);
    return bytes;
}

void write_file(const std::string& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
    write_file(path, text.data(), text.size());
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw IoError("cannot format a floating-point value");
    return std::string(buf, end);
}

// ---- bundle payload encodings ----

std::string matrix_to_text(const DenseMatrix& m) {
    std::string out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

DenseMatrix matrix_from_text(const std::string& text, std::size_t rows, std::size_t cols,
                             const std::string& name) {
    DenseMatrix m(rows, cols);
    if (cols == 0) return m;
    std::istringstream in(text);
    std::string line;
    std::size_t r = 0;
    while (std::getline(in, line)) {
        if (r >= rows) throw SchemaError(name + " has more rows than the manifest declares");
        std::size_t c = 0;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            std::size_t end = comma == std::string::npos ? line.size() : comma;
            if (c >= cols) {
                std::ostringstream msg;
                msg << name << " row " << r << " has more than " << cols << " columns";
                throw SchemaError(msg.str());
            }
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + end, value);
            if (ec != std::errc{} || ptr != line.data() + end) {
                std::ostringstream msg;
                msg << name << "[" << r << "][" << c << "]: cannot parse '"
                    << line.substr(start, end - start) << "'";
                throw SchemaError(msg.str());
            }
            m(r, c) = value;
            ++c;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (c != cols) {
            std::ostringstream msg;
            msg << name << " row " << r << " has " << c << " columns, expected " << cols;
            throw SchemaError(msg.str());
        }
        ++r;
    }
    if (r != rows) {
        std::ostringstream msg;
        msg << name << " has " << r << " rows, manifest declares " << rows;
        throw SchemaError(msg.str());
    }
    return m;
}

std::vector<unsigned char> matrix_to_binary(const DenseMatrix& m) {
    std::vector<unsigned char> out;
    out.reserve(20 + 8 * m.size());
    out.insert(out.end(), kMatrixMagic, kMatrixMagic + 4);
    append_matrix(out, m);
    return out;
}

DenseMatrix matrix_from_binary(const std::vector<unsigned char>& bytes, std::size_t rows,
                               std::size_t cols, const std::string& name) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMatrixMagic, 4) != 0)
        throw SchemaError(name + " is not a binary matrix file");
    ByteReader in(bytes.data() + 4, bytes.size() - 4);
    std::size_t got_rows = in.read_u64();
    std::size_t got_cols = in.read_u64();
    if (got_rows != rows || got_cols != cols) {
        std::ostringstream msg;
        msg << name << " header declares " << got_rows << "x" << got_cols << ", manifest declares "
            << rows << "x" << cols;
        throw SchemaError(msg.str());
    }
    DenseMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = in.read_f64();
    if (in.remaining() != 0) throw SchemaError(name + " has trailing bytes");
    return m;
}

std::string labels_to_text(const std::vector<std::int64_t>& labels) {
    std::string out;
    for (std::int64_t v : labels) {
        out += std::to_string(v);
        out += '\n';
    }
    return out;
}

std::vector<std::int64_t> labels_from_text(const std::string& text, std::size_t count,
                                           const std::string& name) {
    std::vector<std::int64_t> labels;
    labels.reserve(count);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
        if (ec != std::errc{} || ptr != line.data() + line.size()) {
            std::ostringstream msg;
            msg << name << "[" << labels.size() << "]: cannot parse '" << line << "'";
            throw SchemaError(msg.str());
        }
        labels.push_back(value);
    }
    if (labels.size() != count) {
        std::ostringstream msg;
        msg << name << " has " << labels.size() << " entries, manifest declares " << count;
        throw SchemaError(msg.str());
    }
    return labels;
}

std::vector<unsigned char> labels_to_binary(const std::vector<std::int64_t>& labels) {
    std::vector<unsigned char> out;
    out.reserve(12 + 8 * labels.size());
    out.insert(out.end(), kVectorMagic, kVectorMagic + 4);
    append_ids(out, labels);
    return out;
}

std::vector<std::int64_t> labels_from_binary(const std::vector<unsigned char>& bytes,
                                             std::size_t count, const std::string& name) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kVectorMagic, 4) != 0)
        throw SchemaError(name + " is not a binary vector file");
    ByteReader in(bytes.data() + 4, bytes.size() - 4);
    std::size_t got = in.read_u64();
    if (got != count) {
        std::ostringstream msg;
        msg << name << " header declares " << got << " entries, manifest declares " << count;
        throw SchemaError(msg.str());
    }
    std::vector<std::int64_t> labels(count);
    for (std::size_t i = 0; i < count; ++i) labels[i] = in.read_i64();
    if (in.remaining() != 0) throw SchemaError(name + " has trailing bytes");
    return labels;
}

const char* encoding_name(BundleEncoding e) {
    return e == BundleEncoding::Text ? "text" : "binary";
}

BundleEncoding encoding_from_name(const std::string& name, const std::string& field) {
    if (name == "text") return BundleEncoding::Text;
    if (name == "binary") return BundleEncoding::Binary;
    throw SchemaError("manifest field '" + field + "' has unknown encoding '" + name + "'");
}

} // namespace

std::uint64_t save_checkpoint(const ModelState& state, const std::string& path) {
    std::vector<unsigned char> payload;
    append_f64(payload, state.lambda1);
    append_f64(payload, state.lambda2);
    payload.push_back(state.growth_out_per_phase ? 1 : 0);
    append_u64(payload, state.growth_out_per_phase.value_or(0));
    append_u64(payload, state.phase);
    append_ids(payload, state.concept_ids);
    append_ids(payload, state.class_ids);
    append_layer(payload, state.backbone_expansion);
    append_layer(payload, state.concept_expansion);
    append_matrix(payload, state.concept_weights);
    append_matrix(payload, state.class_weights);
    append_matrix(payload, state.concept_inverse_corr);
    append_matrix(payload, state.class_inverse_corr);

    std::uint64_t digest = fnv1a_digest(payload.data(), payload.size());
    std::vector<unsigned char> file;
    file.reserve(16 + payload.size());
    file.insert(file.end(), kCheckpointMagic, kCheckpointMagic + 4);
    append_u32(file, kCheckpointVersion);
    append_u64(file, digest);
    file.insert(file.end(), payload.begin(), payload.end());
    write_file(path, file.data(), file.size());
    return digest;
}

ModelState load_checkpoint(const std::string& path) {
    std::vector<unsigned char> file = read_file(path);
    if (file.size() < 16) throw SchemaError(path + " is too short to be a checkpoint");
    if (std::memcmp(file.data(), kCheckpointMagic, 4) != 0)
        throw SchemaError(path + " is not a checkpoint file");
    ByteReader header(file.data() + 4, 12);
    std::uint32_t version = header.read_u32();
    if (version != kCheckpointVersion) {
        std::ostringstream msg;
        msg << path << " has checkpoint format version " << version << ", this build reads "
            << kCheckpointVersion;
        throw VersionMismatch(msg.str());
    }
    std::uint64_t stored_digest = header.read_u64();
    const unsigned char* payload = file.data() + 16;
    std::size_t payload_size = file.size() - 16;
    // The digest is verified before any payload field is trusted, so a flip
    // anywhere (lengths included) surfaces here, not as a bad allocation.
    if (fnv1a_digest(payload, payload_size) != stored_digest)
        throw DigestMismatch(path + " is corrupted: payload digest does not match");

    ByteReader in(payload, payload_size);
    ModelState state;
    state.lambda1 = in.read_f64();
    state.lambda2 = in.read_f64();
    bool has_override = in.read_u8() != 0;
    std::uint64_t override_value = in.read_u64();
    if (has_override) state.growth_out_per_phase = override_value;
    state.phase = in.read_u64();
    state.concept_ids = read_ids(in);
    state.class_ids = read_ids(in);
    state.backbone_expansion = read_layer(in);
    state.concept_expansion = read_layer(in);
    state.concept_weights = read_matrix(in);
    state.class_weights = read_matrix(in);
    state.concept_inverse_corr = read_matrix(in);
    state.class_inverse_corr = read_matrix(in);
    if (in.remaining() != 0) throw SchemaError(path + " has trailing bytes after the payload");
    return state;
}

void write_bundle(const LabeledDataset& table, const std::string& path, BundleEncoding encoding) {
    table.validate();
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw IoError("cannot create bundle directory " + path + ": " + ec.message());

    bool text = encoding == BundleEncoding::Text;
    std::string features_name = text ? "features.csv" : "features.bin";
    std::string concepts_name = text ? "concepts.csv" : "concepts.bin";
    std::string labels_name = text ? "labels.csv" : "labels.bin";

    std::set<std::int64_t> distinct(table.class_labels.begin(), table.class_labels.end());
    json manifest;
    manifest["format_version"] = "1";
    manifest["samples"] = table.sample_count();
    manifest["feature_dim"] = table.features.cols();
    manifest["concept_dim"] = table.concepts.cols();
    manifest["class_count"] = distinct.size();
    manifest["concept_column_ids"] = table.concept_column_ids;
    manifest["files"] = {
        {"features", {{"name", features_name}, {"encoding", encoding_name(encoding)}}},
        {"concepts", {{"name", concepts_name}, {"encoding", encoding_name(encoding)}}},
        {"labels", {{"name", labels_name}, {"encoding", encoding_name(encoding)}}},
    };
    write_text_file((fs::path(path) / "manifest.json").string(), manifest.dump(2) + "\n");

    fs::path dir(path);
    if (text) {
        write_text_file((dir / features_name).string(), matrix_to_text(table.features));
        write_text_file((dir / concepts_name).string(), matrix_to_text(table.concepts));
        write_text_file((dir / labels_name).string(), labels_to_text(table.class_labels));
    } else {
        auto features = matrix_to_binary(table.features);
        auto concepts = matrix_to_binary(table.concepts);
        auto labels = labels_to_binary(table.class_labels);
        write_file((dir / features_name).string(), features.data(), features.size());
        write_file((dir / concepts_name).string(), concepts.data(), concepts.size());
        write_file((dir / labels_name).string(), labels.data(), labels.size());
    }
}

LabeledDataset read_bundle(const std::string& path) {
    fs::path dir(path);
    std::vector<unsigned char> manifest_bytes = read_file((dir / "manifest.json").string());
    json manifest;
    try {
        manifest = json::parse(manifest_bytes.begin(), manifest_bytes.end());
    } catch (const json::exception& e) {
        throw SchemaError("manifest.json is not valid JSON: " + std::string(e.what()));
    }

    auto require_field = [&](const json& node, const char* field) -> const json& {
        auto it = node.find(field);
        if (it == node.end())
            throw SchemaError(std::string("manifest field '") + field + "' missing");
        return *it;
    };
    std::string version = require_field(manifest, "format_version").get<std::string>();
    if (version != "1")
        throw VersionMismatch("bundle format version " + version + ", this build reads 1");
    std::size_t samples = 0, feature_dim = 0, concept_dim = 0, class_count = 0;
    try {
        samples = require_field(manifest, "samples").get<std::size_t>();
        feature_dim = require_field(manifest, "feature_dim").get<std::size_t>();
        concept_dim = require_field(manifest, "concept_dim").get<std::size_t>();
        class_count = require_field(manifest, "class_count").get<std::size_t>();
    } catch (const json::exception&) {
        throw SchemaError("manifest count fields must be nonnegative integers");
    }
    std::vector<std::int64_t> column_ids;
    try {
        column_ids =
            require_field(manifest, "concept_column_ids").get<std::vector<std::int64_t>>();
    } catch (const json::exception&) {
        throw SchemaError("manifest field 'concept_column_ids' must be an integer list");
    }
    if (column_ids.size() != concept_dim)
        throw SchemaError("manifest field 'concept_column_ids' length does not match "
                          "'concept_dim'");

    const json& files = require_field(manifest, "files");
    auto load_entry = [&](const char* key) {
        const json& entry = require_field(files, key);
        std::string name = require_field(entry, "name").get<std::string>();
        BundleEncoding enc = encoding_from_name(
            require_field(entry, "encoding").get<std::string>(), std::string(key) + ".encoding");
        return std::pair<std::string, BundleEncoding>((dir / name).string(), enc);
    };

    LabeledDataset table;
    auto [features_path, features_enc] = load_entry("features");
    auto [concepts_path, concepts_enc] = load_entry("concepts");
    auto [labels_path, labels_enc] = load_entry("labels");

    auto read_matrix_file = [&](const std::string& file_path, BundleEncoding enc,
                                std::size_t rows, std::size_t cols, const std::string& name) {
        std::vector<unsigned char> bytes = read_file(file_path);
        if (enc == BundleEncoding::Text)
            return matrix_from_text(std::string(bytes.begin(), bytes.end()), rows, cols, name);
        return matrix_from_binary(bytes, rows, cols, name);
    };
    table.features = read_matrix_file(features_path, features_enc, samples, feature_dim,
                                      "features");
    table.concepts = read_matrix_file(concepts_path, concepts_enc, samples, concept_dim,
                                      "concepts");
    std::vector<unsigned char> label_bytes = read_file(labels_path);
    table.class_labels =
        labels_enc == BundleEncoding::Text
            ? labels_from_text(std::string(label_bytes.begin(), label_bytes.end()), samples,
                               "labels")
            : labels_from_binary(label_bytes, samples, "labels");
    table.concept_column_ids = std::move(column_ids);

    for (std::size_t r = 0; r < table.concepts.rows(); ++r)
        for (std::size_t c = 0; c < table.concepts.cols(); ++c) {
            double v = table.concepts(r, c);
            if (v != 0.0 && v != 1.0) {
                std::ostringstream msg;
                msg << "concepts[" << r << "][" << c << "] must be 0 or 1, found " << v;
                throw SchemaError(msg.str());
            }
        }
    std::set<std::int64_t> distinct(table.class_labels.begin(), table.class_labels.end());
    if (distinct.size() != class_count)
        throw SchemaError("manifest field 'class_count' does not match the labels file");
    return table;
}

} // namespace concil
