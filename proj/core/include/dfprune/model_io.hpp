#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dfprune/network.hpp"

namespace dfprune {

/// Reads a JSON model file and validates it.
Network load_network(const std::filesystem::path& path);
Network parse_network(std::string_view json_text);

/// Serializes with shortest round-trip 32-bit decimals, so
/// parse_network(serialize_network(n)) reproduces n bit-exactly.
std::string serialize_network(const Network& net);
void save_network(const Network& net, const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace dfprune
