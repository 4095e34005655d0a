#pragma once

/**
 * @file design.hpp
 * @brief Experimental-design layer: data-utility scores, k-fold
 *        cross-validation, well ranking and the training-size study.
 *
 * For each candidate source (single injection well) the utility theta of a
 * test record is the sum over zeta posterior samples of the dissimilarity
 * between the sampled WHPA and the truth's retained-component
 * reconstruction; lower means more informative. Theta values are pooled
 * per fold and standardized (one mean/std per fold over all wells and
 * records) so folds are comparable; ranking uses the pooled per-well
 * median. The consistency verdict automates the cross-fold boxplot
 * comparison: every fold's per-well median must fall inside that well's
 * pooled interquartile range.
 */

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "whpa/bel.hpp"
#include "whpa/config.hpp"
#include "whpa/dataset.hpp"
#include "whpa/metrics.hpp"

namespace whpa {

struct UtilityVector {
    Eigen::VectorXd theta;  ///< lambda entries, one per candidate well
    MetricKind metric = MetricKind::MHD;
    int test_index = -1;  ///< dataset record id
    int zeta = 0;
};

struct UtilityMatrix {
    Eigen::MatrixXd theta;  ///< lambda x n_test
    MetricKind metric = MetricKind::MHD;
    int fold_index = -1;
    std::vector<int> test_indices;
    int zeta = 0;
};

struct BoxStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double lo_whisker = 0.0;  ///< smallest value above q1 - 1.5 iqr
    double hi_whisker = 0.0;  ///< largest value below q3 + 1.5 iqr
};

/// Type-7 (linear interpolation) quantile of unsorted values.
double quantile(Eigen::VectorXd values, double p);
BoxStats box_stats(const Eigen::VectorXd& values);

struct FoldReport {
    int fold_index = -1;
    int n_train = 0;
    int n_test = 0;
    std::vector<int> train_indices, test_indices;
    Eigen::MatrixXd theta;      ///< raw, lambda x n_test
    Eigen::MatrixXd theta_std;  ///< fold-standardized
    std::vector<BoxStats> wells;  ///< over theta_std rows
};

struct DesignReport {
    MetricKind metric = MetricKind::MHD;
    int k = 0;
    int zeta = 0;
    std::uint64_t config_fingerprint = 0;
    std::vector<FoldReport> folds;
    std::vector<BoxStats> pooled;      ///< per-well stats over all folds
    std::vector<int> ranking;          ///< well indices, most informative first
    std::vector<bool> well_consistent;
    bool consistent = false;
};

/// Shuffled contiguous split of the given record indices into k folds
/// (sizes differ by at most one).
std::vector<std::vector<int>> make_folds(std::vector<int> indices, int k, RngStream& rng);

/// Per-well summed discrepancy for one test record. Sampling streams derive
/// from (master seed, DesignSampling, fold_index, test_pos * lambda + well),
/// so any evaluation order gives identical results. A posterior sample with
/// no zero contour contributes the subgrid diagonal as its MHD.
UtilityVector utility_vector(const std::vector<BelModel>& models_per_well,
                             const DatasetRecord& record, int test_index, int zeta,
                             MetricKind metric, std::uint64_t master_seed, int fold_index,
                             int test_pos);

UtilityMatrix utility_matrix(const std::vector<BelModel>& models_per_well,
                             const DatasetFile& data, const std::vector<int>& test_indices,
                             int zeta, MetricKind metric, std::uint64_t master_seed,
                             int fold_index, int threads);

/// Ranking + consistency from per-fold standardized utilities; fills the
/// pooled stats, ranking and verdict fields of the report.
void rank_wells(DesignReport& report);

/// Full k-fold study over the valid records of the dataset, one single-well
/// model per injector. Throws if a fold's training side is too small for
/// the configured component counts.
DesignReport kfold_design(const DatasetFile& data, const ScenarioConfig& cfg, int k,
                          int zeta, MetricKind metric);

struct SizeStudyResult {
    std::vector<int> sizes;
    std::vector<int> target_indices;  ///< dataset record ids
    Eigen::MatrixXd mean_ssim;        ///< sizes x targets, NaN where skipped
    std::vector<bool> skipped;        ///< per size
    int zeta = 0;
};

/// Mean SSIM against the true SD image for full-subset models fitted on the
/// first `size` valid rows; targets are the last n_targets valid records.
SizeStudyResult training_size_study(const DatasetFile& data, const ScenarioConfig& cfg,
                                    const std::vector<int>& sizes, int n_targets, int zeta);

}  // namespace whpa
