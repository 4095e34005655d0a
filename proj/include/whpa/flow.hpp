#pragma once

/**
 * @file flow.hpp
 * @brief Steady 2-D confined flow under pumping.
 *
 * Finite-volume discretization of div(T grad h) = q on the cell-centered
 * grid, with fixed heads on the west/east boundaries (applied at half-cell
 * distance), no-flow north/south boundaries, and the pumping well as a cell
 * sink. Face transmissivities use the harmonic mean.
 *
 * The solution stores Darcy fluxes (specific discharge, m/d) on cell faces;
 * within a cell each component varies linearly between its two faces, which
 * keeps the interpolated field mass-conservative for particle tracking.
 */

#include <Eigen/Dense>

#include "whpa/grid.hpp"
#include "whpa/prior_field.hpp"

namespace whpa {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct FlowSpec {
    double west_head = 0.0;   ///< [m]
    double east_head = -3.0;  ///< [m]
    double thickness = 10.0;  ///< aquifer thickness b [m]

    void validate() const {
        if (!(thickness > 0.0))
            throw std::invalid_argument("FlowSpec: thickness must be positive");
    }
};

struct FlowSolution {
    GridSpec grid;
    double thickness = 10.0;
    Eigen::MatrixXd heads;  ///< n_rows x n_cols [m]
    /// Darcy flux in +x across x-faces; qx(i, j) sits between columns j-1, j.
    Eigen::MatrixXd qx;  ///< n_rows x (n_cols+1) [m/d]
    /// Darcy flux in +y across y-faces; qy(i, j) sits between rows i-1, i.
    Eigen::MatrixXd qy;  ///< (n_rows+1) x n_cols [m/d]
    double mass_balance_residual = 0.0;  ///< [m^3/d]

    bool has_pumping = false;
    Point pump_location;
    double pump_rate = 0.0;

    /// Bilinear (per-component, Pollock-style) Darcy flux at a point.
    Point darcy_at(double x, double y) const;
};

/// Solve steady flow for one conductivity realization. Throws on solver
/// failure or when the discrete mass balance exceeds 1e-6 x |pumping rate|.
FlowSolution solve_steady_flow(const HydraulicField& field, const WellLayout& wells,
                               const FlowSpec& spec);

}  // namespace whpa
