#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace artmap {

// 64-bit FNV-1a, used for run ids and content digests.
uint64_t fnv1a64(std::string_view data, uint64_t h = 0xcbf29ce484222325ull);
std::string hex64(uint64_t v);

// Digest over every regular file below `root`: relative paths and contents,
// visited in sorted path order.
std::string directory_digest(const std::filesystem::path& root);

}  // namespace artmap
