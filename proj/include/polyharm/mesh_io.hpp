#pragma once

#include <filesystem>
#include <string>

#include "polyharm/domain.hpp"

namespace polyharm {

/// Plain-text mesh format. Doubles use shortest round-trip formatting, so
/// write(read(write(m))) reproduces the file byte for byte.
std::string mesh_to_text(const Mesh& mesh);
Mesh mesh_from_text(const std::string& text);

void write_mesh(const std::filesystem::path& path, const Mesh& mesh);
Mesh read_mesh(const std::filesystem::path& path);

}  // namespace polyharm
