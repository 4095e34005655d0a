#pragma once

/**
 * @file pipeline.hpp
 * @brief Forward-model composition: one prior realization to one dataset
 *        record, and the batch generator that fills a dataset file.
 *
 * Every stochastic stage of record i draws from streams derived from
 * (master seed, purpose, i), so records can be generated in any order, in
 * parallel, or re-generated individually with identical results.
 */

#include <functional>
#include <string>
#include <vector>

#include "whpa/bel.hpp"
#include "whpa/config.hpp"
#include "whpa/dataset.hpp"

namespace whpa {

DatasetHeader make_dataset_header(const ScenarioConfig& cfg, int n);

/// Full forward pass for record `index`. Throws on simulator failure;
/// generate_dataset catches and stores an invalid record instead.
DatasetRecord generate_record(const ScenarioConfig& cfg, int index);

struct GenerationSummary {
    int n_total = 0;
    int n_generated = 0;  ///< produced in this call (rest were resumed)
    int n_failed = 0;
    std::vector<int> failed_indices;
    double seconds = 0.0;
};

/// Generates (or resumes) a dataset of n records at path. An existing file
/// with a compatible header is continued from its first missing record; an
/// incompatible one is an error unless overwrite is set.
GenerationSummary generate_dataset(const ScenarioConfig& cfg, int n, const std::string& path,
                                   bool overwrite = false,
                                   const std::function<void(int, int)>& progress = {});

/// Fraction of points lying inside the union of the ensemble's WHPAs
/// (bilinear sign interpolation of each sampled SD image).
double coverage_fraction(const PosteriorEnsemble& ens, const std::vector<Point>& pts);

/// Union of psi >= 0 cells over the ensemble.
Eigen::MatrixXi envelope_mask(const PosteriorEnsemble& ens);

}  // namespace whpa
