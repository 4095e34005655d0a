#pragma once

/// @file hash.hpp
/// @brief FNV-1a fingerprints for configs, artifacts and output files.

#include <cstddef>
#include <cstdint>
#include <string>

namespace whpa {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(s.data(), s.size());
}

std::uint64_t hash_file(const std::string& path);

std::string hex64(std::uint64_t v);

}  // namespace whpa
