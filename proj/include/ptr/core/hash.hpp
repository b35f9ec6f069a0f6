#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ptr {

/// 64-bit FNV-1a. Used for content fingerprints in traces, not for security.
std::uint64_t fnv1a(std::string_view data);
std::string fnv1a_hex(std::string_view data);

} // namespace ptr
