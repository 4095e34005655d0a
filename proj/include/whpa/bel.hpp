#pragma once

/**
 * @file bel.hpp
 * @brief Statistical core: PCA, CCA, Yeo-Johnson normalization, Gaussian
 *        conditional inference, posterior sampling and backtransformation.
 *
 * The learned relation lives in normalized canonical space. With h the
 * target variates and d the predictor variates, the model is
 *
 *     d = G h - eps,   eps ~ N(mu*, Sigma*)
 *
 * where G is the least-squares map fitted on training rows and (mu*,
 * Sigma*) are the empirical residual moments. Conditioning uses the
 * precision-block identities
 *
 *     Sigma_post = (Sigma_h^-1 + G' Sigma*^-1 G)^-1
 *     mu_post    = mu_h + Sigma_post G' Sigma*^-1 (d_obs - G mu_h + mu*)
 *
 * so the posterior covariance never depends on the observed value.
 * Covariances throughout use the population convention (divide by n).
 */

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "whpa/geometry.hpp"
#include "whpa/grid.hpp"
#include "whpa/rng.hpp"

namespace whpa {

struct PcaRetain {
    enum class Mode { Count, VarianceFraction };
    Mode mode = Mode::Count;
    int count = 0;
    double fraction = 0.0;

    static PcaRetain by_count(int c) { return {Mode::Count, c, 0.0}; }
    static PcaRetain by_fraction(double f) { return {Mode::VarianceFraction, 0, f}; }
};

struct PcaBasis {
    Eigen::VectorXd mean;        ///< p
    Eigen::MatrixXd components;  ///< r x p, orthonormal rows
    Eigen::VectorXd explained;   ///< r, fractions of total variance
    Eigen::VectorXd spectrum;    ///< all positive eigenvalues, descending
    double total_variance = 0.0;
    int rank = 0;
    bool truncated_to_rank = false;

    int retained() const { return static_cast<int>(components.rows()); }
    Eigen::MatrixXd project(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores) const;
};

PcaBasis fit_pca(const Eigen::MatrixXd& rows, const PcaRetain& retain);

/// Smallest component count whose cumulative explained variance reaches the
/// fraction; spectrum as stored in PcaBasis.
int min_components_for(const Eigen::VectorXd& spectrum, double fraction);

struct CcaModel {
    Eigen::VectorXd d_mean, h_mean;        ///< delta, v
    Eigen::MatrixXd d_weights, h_weights;  ///< delta x eta, v x eta
    Eigen::MatrixXd h_back;                ///< eta x v, pseudo-inverse of h_weights
    Eigen::VectorXd correlations;          ///< eta, non-increasing, in [0, 1]
    bool regularized = false;

    int eta() const { return static_cast<int>(correlations.size()); }
    Eigen::MatrixXd project_d(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd project_h(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd backproject_h(const Eigen::MatrixXd& variates) const;
};

CcaModel fit_cca(const Eigen::MatrixXd& d_scores, const Eigen::MatrixXd& h_scores);

struct YeoJohnsonDim {
    double lambda = 1.0;
    double mean = 0.0;     ///< post-transform centering
    double std_dev = 1.0;  ///< post-transform scale
    bool identity = false;  ///< constant column, transform skipped
};

double yj_apply(double x, double lambda);
double yj_invert(double y, double lambda);

/// Maximum-likelihood lambda over [-5, 5] plus post-scaling to zero mean and
/// unit variance. Constant columns get the identity transform, flagged.
YeoJohnsonDim fit_yeo_johnson(const Eigen::VectorXd& column);

struct NormalizerParams {
    std::vector<YeoJohnsonDim> dims;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
    Eigen::MatrixXd invert(const Eigen::MatrixXd& rows) const;
};

NormalizerParams normalize_fit(const Eigen::MatrixXd& variates);

struct PosteriorTerms {
    Eigen::MatrixXd G;           ///< eta x eta, maps h^c to d^c
    Eigen::MatrixXd noise_cov;   ///< Sigma*
    Eigen::VectorXd noise_mean;  ///< mu*
    Eigen::VectorXd hc_mean;     ///< mu_h
    Eigen::MatrixXd hc_cov;      ///< Sigma_h
    Eigen::MatrixXd post_cov;    ///< Sigma_post, observation-independent
    Eigen::MatrixXd gain;        ///< Sigma_post G' Sigma*^-1
    bool jittered = false;
};

PosteriorTerms fit_posterior_terms(const Eigen::MatrixXd& hc_norm,
                                   const Eigen::MatrixXd& dc_norm);

struct BelModel {
    SubgridSpec sub;
    int n_wells = 0;             ///< lambda
    int curve_len = 0;           ///< k
    double curve_duration = 0.0; ///< [d]
    std::vector<int> well_subset;

    PcaBasis d_pca, h_pca;
    CcaModel cca;
    NormalizerParams d_norm, h_norm;
    PosteriorTerms terms;

    Eigen::MatrixXi prior_mask;  ///< union of positive training-target cells
    uint64_t training_fingerprint = 0;
    uint64_t self_fingerprint = 0;  ///< cached model_fingerprint, set on fit/load

    int predictor_len() const { return n_wells * curve_len; }
};

struct BelFitOptions {
    PcaRetain d_retain = PcaRetain::by_count(50);
    PcaRetain h_retain = PcaRetain::by_count(30);
    SubgridSpec sub;
    int n_wells = 0;
    int curve_len = 0;
    double curve_duration = 0.0;
    std::vector<int> well_subset;
};

/// Full training pass: d_rows n x (lambda k) resampled curves, h_rows
/// n x (rows cols) flattened SD images (row-major). A precomputed target
/// basis can be shared across models trained on the same h_rows.
BelModel fit_bel(const Eigen::MatrixXd& d_rows, const Eigen::MatrixXd& h_rows,
                 const BelFitOptions& opt, const PcaBasis* shared_h_pca = nullptr);

/// Posterior moments in normalized canonical space for one observation.
/// The covariance is the model's precomputed term, identical for every
/// observation. Throws on non-finite input.
void condition(const BelModel& model, const Eigen::VectorXd& d_obs_norm,
               Eigen::VectorXd& mu_post, Eigen::MatrixXd& sigma_post);

/// Draws from N(mu, sigma) via symmetric eigenfactorization; eigenvalues
/// below -1e-8 x trace reject, small negatives clip to zero.
Eigen::MatrixXd sample_posterior(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                 int zeta, RngStream& rng);

struct PosteriorEnsemble {
    SubgridSpec sub;
    std::vector<Eigen::MatrixXd> images;          ///< zeta of rows x cols
    std::vector<std::vector<Point>> contours;     ///< zero contours per image
    uint64_t model_fingerprint = 0;
    uint64_t observation_fingerprint = 0;
};

/// Normalized canonical samples back to SD images and zero contours.
PosteriorEnsemble backtransform(const BelModel& model, const Eigen::MatrixXd& samples_c);

/// End to end: flattened predictor row (resampled curves, length lambda k)
/// through projection, normalization, conditioning, sampling and
/// backtransformation.
PosteriorEnsemble predict(const BelModel& model, const Eigen::VectorXd& d_row, int zeta,
                          RngStream& rng);

/// Normalized canonical coordinates of one predictor row (the observation
/// path of predict, exposed for the design harness).
Eigen::VectorXd project_observation(const BelModel& model, const Eigen::VectorXd& d_row);

/// Normalized canonical coordinates of one target row.
Eigen::VectorXd project_target(const BelModel& model, const Eigen::VectorXd& h_row);

uint64_t model_fingerprint(const BelModel& model);

}  // namespace whpa
