#pragma once

/**
 * @file metrics.hpp
 * @brief Shape and image dissimilarity metrics plus standardization.
 *
 * mhd() is the modified Hausdorff distance: the larger of the two directed
 * mean nearest-neighbor distances. ssim() follows Wang et al. 2004 with a
 * uniform window and the joint dynamic range of the two images. SSIM lies in
 * [-1, 1]; for "higher = worse" comparisons use the negated value.
 */

#include <Eigen/Dense>
#include <vector>

#include "whpa/flow.hpp"

namespace whpa {

enum class MetricKind { MHD, NegSSIM };

const char* metric_name(MetricKind m);

/// Modified Hausdorff distance between nonempty point sets. Equivalent to
/// the O(m*w) double loop; nearest neighbors are found with a sorted sweep.
double mhd(const std::vector<Point>& a, const std::vector<Point>& b);

struct SsimParams {
    double k1 = 0.01;
    double k2 = 0.03;
    int window = 7;
};

/// Mean SSIM over all full windows. Throws on shape mismatch, images smaller
/// than the window, or a zero joint dynamic range with unequal images.
double ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const SsimParams& p = {});

struct StandardizedValues {
    Eigen::VectorXd values;
    bool zero_variance = false;
    double mean = 0.0;
    double std_dev = 0.0;
};

/// (x - mean) / std with the population standard deviation. Zero variance
/// yields all zeros with the flag set. Requires at least 2 values.
StandardizedValues standardize(const Eigen::VectorXd& x);

}  // namespace whpa
