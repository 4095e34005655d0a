#pragma once

/// @file model_io.hpp
/// @brief Versioned binary persistence for fitted models. A reloaded model
///        reproduces predictions bit-identically.

#include <cstdint>
#include <string>

#include "whpa/bel.hpp"

namespace whpa {

void save_model(const BelModel& model, std::uint64_t config_fingerprint,
                const std::string& path);

struct LoadedModel {
    BelModel model;
    std::uint64_t config_fingerprint = 0;
};

LoadedModel load_model(const std::string& path);

}  // namespace whpa
