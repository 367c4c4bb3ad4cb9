#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace negkb {

/// Canonical form shared by every string that takes part in a join: ASCII
/// lowercase, trimmed, internal whitespace collapsed to one space, trailing
/// periods removed. Idempotent.
std::string normalize(std::string_view text);

/// Splits on a single delimiter, keeping empty fields.
std::vector<std::string_view> split(std::string_view text, char delim);

std::string_view trim(std::string_view text);

std::string to_lower(std::string_view text);

/// Filesystem-safe slug: [a-z0-9_] only, never empty.
std::string slugify(std::string_view text);

/// 64-bit FNV-1a, used for config hashes and input digests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t value);

/// Digest of a whole file's bytes; throws Error if unreadable.
std::string file_digest(const std::string& path);

}  // namespace negkb
