#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace proofjudge {

/// SHA-256 digest of `data`, as a lowercase hex string.
/// Used for prompt-file checksums, cache keys, and content addressing.
std::string sha256_hex(std::string_view data);

/// Stable 64-bit hash (FNV-1a with a splitmix64 finalizer). Not
/// cryptographic; used to derive counter-based random draws.
std::uint64_t stable_hash64(std::string_view data);

}  // namespace proofjudge
