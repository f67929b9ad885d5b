#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "geonav/neural.hpp"

namespace geonav {

/// Named bundle of networks, optimizer states, and counters, serialized as a
/// versioned binary container: magic bytes, format version, config hash,
/// layer-shape manifest, then little-endian 64-bit parameter blobs. A
/// round-trip load is bit-exact.
struct Checkpoint {
    static constexpr char kMagic[4] = {'G', 'N', 'V', 'C'};
    static constexpr std::uint32_t kVersion = 1;

    std::uint64_t config_hash = 0;
    std::map<std::string, Network> networks;
    std::map<std::string, AdamState> adam_states;
    std::map<std::string, std::uint64_t> counters;

    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);
};

/// FNV-1a over a byte string; used for config hashes and seed derivation.
std::uint64_t fnv1a(std::string_view bytes);

/// SplitMix64 scrambler.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic per-component seed: splitmix64(master ^ fnv1a(tag)).
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view tag);

}  // namespace geonav
