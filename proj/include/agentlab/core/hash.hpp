#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace agentlab {

std::uint64_t fnv1a_64(std::string_view bytes);

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

}  // namespace agentlab
