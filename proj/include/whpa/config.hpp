#pragma once

/**
 * @file config.hpp
 * @brief Scenario configuration: one JSON file drives every command.
 *
 * Loading overlays the file onto the built-in defaults, rejects unknown
 * keys, and validates every module precondition. The fingerprint is an
 * FNV-1a hash of the canonical JSON serialization (master seed included,
 * threads excluded as a pure runtime knob) and is embedded in every
 * artifact so mismatched inputs fail loudly.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "whpa/bel.hpp"
#include "whpa/flow.hpp"
#include "whpa/grid.hpp"
#include "whpa/metrics.hpp"
#include "whpa/prior_field.hpp"
#include "whpa/transport.hpp"

namespace whpa {

struct BelParams {
    int curve_samples = 200;  ///< k, resampled points per curve
    int d_components = 50;    ///< delta
    int h_components = 30;    ///< v
    int zeta = 400;           ///< posterior sample count
    /// When > 0, retained counts come from these variance fractions instead.
    double d_variance_target = 0.0;
    double h_variance_target = 0.0;

    PcaRetain d_retain() const {
        return d_variance_target > 0.0 ? PcaRetain::by_fraction(d_variance_target)
                                       : PcaRetain::by_count(d_components);
    }
    PcaRetain h_retain() const {
        return h_variance_target > 0.0 ? PcaRetain::by_fraction(h_variance_target)
                                       : PcaRetain::by_count(h_components);
    }
};

struct DesignParams {
    int folds = 5;
    std::vector<MetricKind> metrics = {MetricKind::MHD};
};

struct ScenarioConfig {
    GridSpec grid;
    PriorSpec prior;
    WellLayout wells;
    FlowSpec flow;
    TransportParams transport;
    BacktrackParams backtrack;
    SubgridSpec sub;
    BelParams bel;
    DesignParams design;
    std::uint64_t master_seed = 42;
    int threads = 0;  ///< worker pool size, 0 = hardware concurrency

    void validate() const;
    std::uint64_t fingerprint() const;
};

/// Built-in scenario: west-to-east gradient, central pumping well, six
/// injectors on a 50 m ring (1-3 upstream, 4-6 downstream).
ScenarioConfig default_config();

ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& cfg, const std::string& path);

/// Canonical JSON text of a config (used for fingerprinting and export).
std::string config_to_json(const ScenarioConfig& cfg);

}  // namespace whpa
