#pragma once

#include <string>
#include <string_view>

namespace kgalign {

// Hex-encoded SHA-256 digest. Used for prompt fixtures and template pinning.
std::string sha256_hex(std::string_view data);

} // namespace kgalign
