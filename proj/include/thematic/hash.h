#pragma once

#include <string>
#include <string_view>

namespace thematic {

/// Lowercase hex SHA-256 digest. Used as the content hash of every artifact.
std::string sha256_hex(std::string_view bytes);

}  // namespace thematic
