#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace kgr::util {

std::string sha256_hex(std::string_view data);

// First 16 hex characters of the SHA-256 digest; used for stable short ids.
std::string sha256_hex16(std::string_view data);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames into place so readers never
// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

bool is_space(char c);
std::string_view trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);

// Collapses interior whitespace runs to single spaces and trims the ends.
std::string collapse_whitespace(std::string_view s);

bool starts_with_upper(std::string_view s);

// Unbiased draw from [0, bound) via rejection sampling. std::mt19937_64 has a
// standardized output sequence but std::uniform_int_distribution does not, so
// seeded sampling goes through this to stay reproducible across toolchains.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

std::string format_fixed(double value, int decimals);

} // namespace kgr::util
