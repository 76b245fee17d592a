#pragma once

#include <filesystem>
#include <iosfwd>

#include "csen/model.hpp"

namespace csen {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Container layout (all integers little-endian):
//   "CSENMODL" magic, u32 version,
//   u32 n, n x (string key, string value) settings,
//   u32 t, t x (string name, u64 rows, u64 cols) shape table,
//   tensor payloads in table order as row-major f64,
//   "END!" trailer.
// Strings are u32 length + UTF-8 bytes.
void write_model(const ModelArtifact& model, std::ostream& out);
ModelArtifact read_model(std::istream& in, const std::string& source);

void save_model(const ModelArtifact& model, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

}  // namespace csen
