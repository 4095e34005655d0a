#pragma once

/**
 * @file grid.hpp
 * @brief Structured grid descriptions shared across modules.
 *
 * Two grids appear throughout: the flow-model grid (GridSpec, cell sizes
 * dx, dy) and the focused target subgrid (SubgridSpec, square cells) on
 * which WHPA images live. Cell (row, col) covers
 * [x_min + col*dx, x_min + (col+1)*dx) x [y_min + row*dy, ...): row 0 is
 * the southernmost row, matching physical y.
 */

#include <cmath>
#include <stdexcept>

namespace whpa {

struct GridSpec {
    double x_extent = 1500.0;  ///< [m]
    double y_extent = 1000.0;  ///< [m]
    int n_rows = 100;
    int n_cols = 150;

    double dx() const { return x_extent / n_cols; }
    double dy() const { return y_extent / n_rows; }
    int n_cells() const { return n_rows * n_cols; }

    double cell_center_x(int col) const { return (col + 0.5) * dx(); }
    double cell_center_y(int row) const { return (row + 0.5) * dy(); }

    int col_of(double x) const { return static_cast<int>(std::floor(x / dx())); }
    int row_of(double y) const { return static_cast<int>(std::floor(y / dy())); }

    bool contains(double x, double y) const {
        return x >= 0.0 && x <= x_extent && y >= 0.0 && y <= y_extent;
    }

    void validate() const {
        if (x_extent <= 0.0 || y_extent <= 0.0)
            throw std::invalid_argument("GridSpec: extents must be positive");
        if (n_rows <= 0 || n_cols <= 0)
            throw std::invalid_argument("GridSpec: cell counts must be positive");
    }
};

/// Focused square-cell window for target images. Partial trailing cells
/// are dropped: the column count is floor((x_max - x_min) / cell).
struct SubgridSpec {
    double x_min = 800.0;
    double x_max = 1150.0;
    double y_min = 300.0;
    double y_max = 700.0;
    double cell = 4.0;  ///< [m], square cells

    int n_rows() const {
        return static_cast<int>(std::floor((y_max - y_min) / cell + 1e-9));
    }
    int n_cols() const {
        return static_cast<int>(std::floor((x_max - x_min) / cell + 1e-9));
    }
    int n_cells() const { return n_rows() * n_cols(); }

    double cell_center_x(int col) const { return x_min + (col + 0.5) * cell; }
    double cell_center_y(int row) const { return y_min + (row + 0.5) * cell; }

    void validate() const {
        if (cell <= 0.0)
            throw std::invalid_argument("SubgridSpec: cell size must be positive");
        if (x_max <= x_min || y_max <= y_min)
            throw std::invalid_argument("SubgridSpec: window must have positive extent");
        if (n_rows() < 2 || n_cols() < 2)
            throw std::invalid_argument("SubgridSpec: window too small for its cell size");
    }

    bool operator==(const SubgridSpec&) const = default;
};

}  // namespace whpa
