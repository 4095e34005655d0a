#pragma once

/**
 * @file prior_field.hpp
 * @brief Prior sampling of hydraulic-conductivity fields.
 *
 * Realizations are stationary Gaussian fields of log10(K) with a spherical
 * covariance, an uncertain mean drawn uniformly per realization, and high-K
 * conditioning at well cells. Fields are generated by circulant-embedding
 * FFT simulation, with a dense Cholesky fallback for small grids or
 * non-positive-definite embeddings.
 */

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "whpa/grid.hpp"
#include "whpa/rng.hpp"

namespace whpa {

struct VariogramSpec {
    enum class Structure { Spherical };

    Structure structure = Structure::Spherical;
    double range_min = 25.0;  ///< [m]
    double range_max = 100.0; ///< [m]
    double nugget = 0.0;      ///< variance at zero-plus lag
    double sill = 0.16;       ///< total variance (defaults to 0.4^2)

    /// Covariance at lag h for an isotropic spherical model with range a.
    double covariance(double h, double a) const {
        if (h <= 0.0) return sill + nugget;
        if (h >= a) return 0.0;
        const double r = h / a;
        return sill * (1.0 - 1.5 * r + 0.5 * r * r * r);
    }

    void validate() const {
        if (nugget < 0.0)
            throw std::invalid_argument("VariogramSpec: nugget must be >= 0");
        if (!(range_min > 0.0) || range_min > range_max)
            throw std::invalid_argument("VariogramSpec: need 0 < range_min <= range_max");
        if (sill < 0.0)
            throw std::invalid_argument("VariogramSpec: sill must be >= 0");
    }
};

struct PriorSpec {
    std::pair<double, double> log10k_mean_bounds = {1.4, 2.0};
    double log10k_std = 0.4;
    std::pair<double, double> well_k_bounds = {100.0, 1000.0};  ///< [m/d]
    VariogramSpec variogram;

    void validate() const {
        if (log10k_mean_bounds.first > log10k_mean_bounds.second)
            throw std::invalid_argument("PriorSpec: mean bounds out of order");
        if (!(log10k_std > 0.0))
            throw std::invalid_argument("PriorSpec: log10k_std must be > 0");
        if (!(well_k_bounds.first > 0.0) || well_k_bounds.first > well_k_bounds.second)
            throw std::invalid_argument("PriorSpec: well K bounds invalid");
        variogram.validate();
    }
};

/// One log10(K) realization on the flow grid.
struct HydraulicField {
    GridSpec grid;
    Eigen::MatrixXd log10k;  ///< n_rows x n_cols
    std::uint64_t realization_seed = 0;
    double sampled_mean = 0.0;
    double sampled_range = 0.0;      ///< variogram range drawn for this realization [m]
    bool used_dense_fallback = false;

    double k_at(int row, int col) const { return std::pow(10.0, log10k(row, col)); }
};

struct PumpingWell {
    double x = 1000.0;
    double y = 500.0;
    double rate = -1000.0;  ///< [m^3/d], negative = extraction
};

struct InjectionWell {
    double x = 0.0;
    double y = 0.0;
    double rate = 24.0;               ///< [m^3/d]
    double mass_loading = 1.5;        ///< [kg/d]
    double injection_duration = 1.0 / 12.0;  ///< [d] (two hours)
};

struct WellLayout {
    PumpingWell pumping;
    std::vector<InjectionWell> injectors;

    void validate(const GridSpec& grid) const;
};

/// Uniform draw of the realization mean within the prior bounds.
double sample_prior_mean(const PriorSpec& prior, RngStream& rng);

/// Stationary Gaussian log10(K) field with the given mean. The isotropic
/// variogram range is drawn uniformly in [range_min, range_max] from the
/// same stream before the field noise.
HydraulicField simulate_field(const GridSpec& grid, const PriorSpec& prior,
                              double mean, RngStream& rng);

/// Overwrite every cell containing a well with log10 of a uniform draw in
/// well_k_bounds. Cells hosting several wells are drawn once (first well in
/// layout order wins the draw); all other cells are untouched.
HydraulicField condition_wells(const HydraulicField& field, const WellLayout& wells,
                               const PriorSpec& prior, RngStream& rng);

/// Raster export with a small header (binary little-endian, or CSV).
void save_field(const HydraulicField& field, const std::string& path, bool csv = false);
HydraulicField load_field(const std::string& path);

}  // namespace whpa
