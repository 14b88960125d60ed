// SPDX-License-Identifier: Apache-2.0
#pragma once

// On-disk formats, the repo's public data contract (byte-level layout in
// docs/FORMATS.md):
//
//  - Checkpoints: one binary file carrying a complete ModelState. Expansion
//    layers are stored as seeds plus growth records and replayed on load, so
//    round trips are bit-exact. An FNV-1a digest over the payload is checked
//    before any field is parsed; corruption surfaces as DigestMismatch,
//    never as a silently wrong model. Checkpoints hold sufficient statistics
//    only, no training samples.
//
//  - Feature bundles: a directory with a JSON manifest and three payload
//    files (features, concepts, labels), each in either a delimited-text or
//    a little-endian binary encoding chosen per file by the manifest.

#include <cstdint>
#include <string>

#include "concil/engine.hpp"
#include "concil/harness.hpp"

namespace concil {

// Payload encodings for bundle files.
enum class BundleEncoding { Text, Binary };

// Writes `state` to `path`, returns the payload digest.
// Throws IoError when the file cannot be written.
std::uint64_t save_checkpoint(const ModelState& state, const std::string& path);

// Loads a checkpoint. Throws IoError (unreadable), SchemaError (not a
// checkpoint / malformed payload), VersionMismatch (format version), or
// DigestMismatch (any corrupted byte).
ModelState load_checkpoint(const std::string& path);

// Writes `table` into directory `path` (created if absent), all payload
// files in `encoding`. Throws IoError.
void write_bundle(const LabeledDataset& table, const std::string& path,
                  BundleEncoding encoding = BundleEncoding::Binary);

// Reads a bundle directory back into memory, validating payloads against the
// manifest. Throws IoError or SchemaError naming the offending field or the
// row/column of a bad value.
LabeledDataset read_bundle(const std::string& path);

// FNV-1a 64-bit over a byte range; the digest used by every binary format.
std::uint64_t fnv1a_digest(const unsigned char* data, std::size_t size);

} // namespace concil
