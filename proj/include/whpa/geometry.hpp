#pragma once

/**
 * @file geometry.hpp
 * @brief Protection-area geometry: contour ordering, rasterization, signed
 *        distance, and zero-contour extraction.
 *
 * Backtracked endpoints are unordered; a travelling-salesman heuristic
 * (nearest-neighbor construction followed by 2-opt) turns them into a closed
 * polygon. The polygon is rasterized onto the analysis subgrid by the
 * even-odd rule at cell centers, converted to a signed-distance image with a
 * first-order fast-marching Eikonal solver (positive inside), and the zero
 * level set is recovered by marching squares.
 */

#include <Eigen/Dense>
#include <vector>

#include "whpa/grid.hpp"
#include "whpa/transport.hpp"

namespace whpa {

struct WhpaContour {
    std::vector<Point> vertices;  ///< closed implicitly (last connects to first)
    double tour_length = 0.0;     ///< [m], including the closing edge
    int duplicates_removed = 0;
};

struct BinaryImage {
    SubgridSpec sub;
    Eigen::MatrixXi values;  ///< n_rows x n_cols, {0,1}; row 0 at y_min
    bool all_outside = false;
};

struct SdImage {
    SubgridSpec sub;
    Eigen::MatrixXd psi;  ///< [m], positive inside
};

/// Heuristic closed tour over all distinct endpoints. Exact-duplicate points
/// are collapsed (count reported on the contour). Throws if fewer than three
/// distinct points remain.
WhpaContour order_endpoints_tsp(const EndpointSet& points);

/// Even-odd rasterization at subgrid cell centers. A polygon that covers no
/// cell center yields an all-zero image with all_outside set.
BinaryImage rasterize(const WhpaContour& contour, const SubgridSpec& sub);

/// Fast-marching signed distance from the 0/1 interface. Interface-adjacent
/// cells are seeded at half a cell spacing. Throws if the image is single
/// phase.
SdImage signed_distance(const BinaryImage& img);

/// Marching-squares crossings of psi = 0 between adjacent cell centers, as
/// physical coordinates. No sign change yields an empty list.
std::vector<Point> extract_zero_contour(const SdImage& sd);

/// True if the point is inside the closed polygon (even-odd rule).
bool point_in_polygon(const std::vector<Point>& poly, double x, double y);

}  // namespace whpa
