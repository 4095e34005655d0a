#include "whpa/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "whpa/parallel.hpp"

namespace whpa {

double quantile(Eigen::VectorXd values, double p) {
    const Eigen::Index n = values.size();
    if (n == 0) throw std::invalid_argument("quantile: empty input");
    std::sort(values.data(), values.data() + n);
    const double pos = p * static_cast<double>(n - 1);
    const Eigen::Index lo = static_cast<Eigen::Index>(std::floor(pos));
    const Eigen::Index hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

BoxStats box_stats(const Eigen::VectorXd& values) {
    BoxStats s;
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    s.iqr = s.q3 - s.q1;
    const double lo_fence = s.q1 - 1.5 * s.iqr;
    const double hi_fence = s.q3 + 1.5 * s.iqr;
    s.lo_whisker = s.q3;
    s.hi_whisker = s.q1;
    double lo_best = std::numeric_limits<double>::infinity();
    double hi_best = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (v >= lo_fence && v < lo_best) lo_best = v;
        if (v <= hi_fence && v > hi_best) hi_best = v;
    }
    s.lo_whisker = lo_best;
    s.hi_whisker = hi_best;
    return s;
}

std::vector<std::vector<int>> make_folds(std::vector<int> indices, int k, RngStream& rng) {
    const int n = static_cast<int>(indices.size());
    if (k < 2) throw std::invalid_argument("make_folds: need at least 2 folds");
    if (n < k) throw std::invalid_argument("make_folds: fewer records than folds");

    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
        std::swap(indices[static_cast<size_t>(i)], indices[static_cast<size_t>(j)]);
    }

    std::vector<std::vector<int>> folds(static_cast<size_t>(k));
    const int base = n / k;
    const int rem = n % k;
    int at = 0;
    for (int f = 0; f < k; ++f) {
        const int size = base + (f < rem ? 1 : 0);
        folds[static_cast<size_t>(f)].assign(indices.begin() + at, indices.begin() + at + size);
        at += size;
    }
    return folds;
}

namespace {

double subgrid_diagonal(const SubgridSpec& sub) {
    return std::hypot(sub.x_max - sub.x_min, sub.y_max - sub.y_min);
}

/// Sum over the ensemble of the chosen dissimilarity against the truth
/// reconstruction (image + contour extracted through the model chain).
double summed_discrepancy(const BelModel& model, const PosteriorEnsemble& ens,
                          const Eigen::VectorXd& h_row, MetricKind metric) {
    const Eigen::VectorXd truth_c = project_target(model, h_row);
    const PosteriorEnsemble truth = backtransform(model, truth_c.transpose());
    const Eigen::MatrixXd& truth_img = truth.images[0];
    const std::vector<Point>& truth_pts = truth.contours[0];

    const double penalty = subgrid_diagonal(model.sub);
    double total = 0.0;
    for (size_t s = 0; s < ens.images.size(); ++s) {
        if (metric == MetricKind::MHD) {
            const std::vector<Point>& sample_pts = ens.contours[s];
            if (sample_pts.empty() || truth_pts.empty())
                total += penalty;
            else
                total += mhd(sample_pts, truth_pts);
        } else {
            total += -ssim(ens.images[s], truth_img);
        }
    }
    return total;
}

}  // namespace

UtilityVector utility_vector(const std::vector<BelModel>& models_per_well,
                             const DatasetRecord& record, int test_index, int zeta,
                             MetricKind metric, std::uint64_t master_seed, int fold_index,
                             int test_pos) {
    const int lambda = static_cast<int>(models_per_well.size());
    if (lambda == 0) throw std::invalid_argument("utility_vector: no models");

    UtilityVector out;
    out.metric = metric;
    out.test_index = test_index;
    out.zeta = zeta;
    out.theta.resize(lambda);

    const Eigen::VectorXd h_row = record.target_row();
    for (int w = 0; w < lambda; ++w) {
        const BelModel& model = models_per_well[static_cast<size_t>(w)];
        const Eigen::VectorXd d_row = record.predictor_row(model.well_subset);
        RngStream rng = RngStream::derive(
            master_seed, StreamPurpose::DesignSampling, static_cast<std::uint64_t>(fold_index),
            static_cast<std::uint64_t>(test_pos) * static_cast<std::uint64_t>(lambda) +
                static_cast<std::uint64_t>(w));
        const PosteriorEnsemble ens = predict(model, d_row, zeta, rng);
        out.theta[w] = summed_discrepancy(model, ens, h_row, metric);
    }
    return out;
}

UtilityMatrix utility_matrix(const std::vector<BelModel>& models_per_well,
                             const DatasetFile& data, const std::vector<int>& test_indices,
                             int zeta, MetricKind metric, std::uint64_t master_seed,
                             int fold_index, int threads) {
    if (test_indices.empty()) throw std::invalid_argument("utility_matrix: empty test set");
    const int lambda = static_cast<int>(models_per_well.size());

    UtilityMatrix out;
    out.metric = metric;
    out.fold_index = fold_index;
    out.test_indices = test_indices;
    out.zeta = zeta;
    out.theta.resize(lambda, static_cast<Eigen::Index>(test_indices.size()));

    parallel_for(test_indices.size(), static_cast<unsigned>(std::max(threads, 0)),
                 [&](size_t pos) {
                     const DatasetRecord rec = data.read(test_indices[pos]);
                     const UtilityVector uv = utility_vector(
                         models_per_well, rec, test_indices[pos], zeta, metric, master_seed,
                         fold_index, static_cast<int>(pos));
                     out.theta.col(static_cast<Eigen::Index>(pos)) = uv.theta;
                 });
    return out;
}

void rank_wells(DesignReport& report) {
    if (report.folds.size() < 2)
        throw std::invalid_argument("rank_wells: need at least 2 folds");
    const int lambda = static_cast<int>(report.folds.front().theta_std.rows());
    const int k = static_cast<int>(report.folds.size());

    report.pooled.clear();
    report.well_consistent.assign(static_cast<size_t>(lambda), true);
    std::vector<double> score(static_cast<size_t>(lambda), 0.0);

    for (int w = 0; w < lambda; ++w) {
        Eigen::Index total = 0;
        for (const FoldReport& f : report.folds) total += f.theta_std.cols();
        Eigen::VectorXd pooled(total);
        Eigen::Index at = 0;
        for (const FoldReport& f : report.folds) {
            pooled.segment(at, f.theta_std.cols()) = f.theta_std.row(w);
            at += f.theta_std.cols();
        }
        const BoxStats stats = box_stats(pooled);
        report.pooled.push_back(stats);
        score[static_cast<size_t>(w)] = stats.median;
        for (int f = 0; f < k; ++f) {
            const double fold_median = report.folds[static_cast<size_t>(f)].wells[static_cast<size_t>(w)].median;
            if (fold_median < stats.q1 || fold_median > stats.q3)
                report.well_consistent[static_cast<size_t>(w)] = false;
        }
    }

    report.ranking.resize(static_cast<size_t>(lambda));
    std::iota(report.ranking.begin(), report.ranking.end(), 0);
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [&](int a, int b) { return score[static_cast<size_t>(a)] < score[static_cast<size_t>(b)]; });
    report.consistent = std::all_of(report.well_consistent.begin(),
                                    report.well_consistent.end(), [](bool b) { return b; });
}

DesignReport kfold_design(const DatasetFile& data, const ScenarioConfig& cfg, int k,
                          int zeta, MetricKind metric) {
    if (data.header().config_fingerprint != cfg.fingerprint())
        throw std::runtime_error("kfold_design: dataset was generated with a different config");

    std::vector<int> valid;
    for (int i = 0; i < data.n_records(); ++i)
        if (data.read(i).valid) valid.push_back(i);
    if (valid.empty()) throw std::runtime_error("kfold_design: dataset has no valid records");

    const int lambda = data.header().n_wells;
    const int curve_len = data.header().curve_len;

    RngStream fold_rng = RngStream::derive(cfg.master_seed, StreamPurpose::FoldShuffle);
    const std::vector<std::vector<int>> folds = make_folds(valid, k, fold_rng);

    DesignReport report;
    report.metric = metric;
    report.k = k;
    report.zeta = zeta;
    report.config_fingerprint = cfg.fingerprint();

    for (int f = 0; f < k; ++f) {
        std::vector<int> train;
        for (int g = 0; g < k; ++g)
            if (g != f)
                train.insert(train.end(), folds[static_cast<size_t>(g)].begin(),
                             folds[static_cast<size_t>(g)].end());
        const std::vector<int>& test = folds[static_cast<size_t>(f)];

        const bool count_mode =
            cfg.bel.d_variance_target <= 0.0 && cfg.bel.h_variance_target <= 0.0;
        const int min_rows = std::min(cfg.bel.d_components, cfg.bel.h_components) + 1;
        if (count_mode && static_cast<int>(train.size()) < min_rows)
            throw std::invalid_argument(
                "kfold_design: fold training size " + std::to_string(train.size()) +
                " below the minimum " + std::to_string(min_rows) +
                " required by the canonical component count");

        const Eigen::MatrixXd h_rows = data.target_rows(train);
        const PcaBasis shared_h = fit_pca(h_rows, cfg.bel.h_retain());

        std::vector<BelModel> models;
        models.reserve(static_cast<size_t>(lambda));
        for (int w = 0; w < lambda; ++w) {
            BelFitOptions opt;
            opt.d_retain = cfg.bel.d_retain();
            opt.h_retain = cfg.bel.h_retain();
            opt.sub = data.header().sub;
            opt.n_wells = 1;
            opt.curve_len = curve_len;
            opt.curve_duration = data.header().curve_duration;
            opt.well_subset = {w};
            const Eigen::MatrixXd d_rows = data.predictor_rows(train, {w});
            models.push_back(fit_bel(d_rows, h_rows, opt, &shared_h));
        }

        UtilityMatrix um = utility_matrix(models, data, test, zeta, metric, cfg.master_seed,
                                          f, cfg.threads);

        FoldReport fr;
        fr.fold_index = f;
        fr.n_train = static_cast<int>(train.size());
        fr.n_test = static_cast<int>(test.size());
        fr.train_indices = std::move(train);
        fr.test_indices = test;
        fr.theta = um.theta;

        Eigen::Map<const Eigen::VectorXd> flat(um.theta.data(), um.theta.size());
        const StandardizedValues std_all = standardize(flat);
        fr.theta_std.resize(um.theta.rows(), um.theta.cols());
        Eigen::Map<Eigen::VectorXd>(fr.theta_std.data(), fr.theta_std.size()) = std_all.values;

        fr.wells.reserve(static_cast<size_t>(lambda));
        for (int w = 0; w < lambda; ++w) fr.wells.push_back(box_stats(fr.theta_std.row(w)));
        report.folds.push_back(std::move(fr));
    }

    rank_wells(report);
    return report;
}

SizeStudyResult training_size_study(const DatasetFile& data, const ScenarioConfig& cfg,
                                    const std::vector<int>& sizes, int n_targets, int zeta) {
    if (data.header().config_fingerprint != cfg.fingerprint())
        throw std::runtime_error("training_size_study: dataset/config mismatch");
    if (sizes.empty() || n_targets < 1)
        throw std::invalid_argument("training_size_study: need sizes and targets");

    std::vector<int> valid;
    for (int i = 0; i < data.n_records(); ++i)
        if (data.read(i).valid) valid.push_back(i);

    const int max_size = *std::max_element(sizes.begin(), sizes.end());
    if (max_size + n_targets > static_cast<int>(valid.size()))
        throw std::invalid_argument("training_size_study: max(sizes) + targets exceeds " +
                                    std::to_string(valid.size()) + " valid records");

    SizeStudyResult out;
    out.sizes = sizes;
    out.zeta = zeta;
    out.target_indices.assign(valid.end() - n_targets, valid.end());
    out.mean_ssim = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(sizes.size()),
                                              n_targets,
                                              std::numeric_limits<double>::quiet_NaN());
    out.skipped.assign(sizes.size(), false);

    const int lambda = data.header().n_wells;
    std::vector<int> all_wells(static_cast<size_t>(lambda));
    std::iota(all_wells.begin(), all_wells.end(), 0);

    const int min_rows = std::min(cfg.bel.d_components, cfg.bel.h_components) + 1;
    for (size_t si = 0; si < sizes.size(); ++si) {
        const int size = sizes[si];
        if (size < min_rows || size > static_cast<int>(valid.size()) - n_targets) {
            out.skipped[si] = true;
            continue;
        }
        const std::vector<int> train(valid.begin(), valid.begin() + size);

        BelFitOptions opt;
        opt.d_retain = cfg.bel.d_retain();
        opt.h_retain = cfg.bel.h_retain();
        opt.sub = data.header().sub;
        opt.n_wells = lambda;
        opt.curve_len = data.header().curve_len;
        opt.curve_duration = data.header().curve_duration;
        opt.well_subset = all_wells;
        const BelModel model =
            fit_bel(data.predictor_rows(train, all_wells), data.target_rows(train), opt);

        parallel_for(static_cast<size_t>(n_targets),
                     static_cast<unsigned>(std::max(cfg.threads, 0)), [&](size_t tj) {
                         const DatasetRecord rec = data.read(out.target_indices[tj]);
                         RngStream rng = RngStream::derive(cfg.master_seed,
                                                           StreamPurpose::SizeStudy,
                                                           static_cast<std::uint64_t>(si),
                                                           static_cast<std::uint64_t>(tj));
                         const PosteriorEnsemble ens =
                             predict(model, rec.predictor_row(all_wells), zeta, rng);
                         double total = 0.0;
                         for (const Eigen::MatrixXd& img : ens.images)
                             total += ssim(img, rec.sd);
                         out.mean_ssim(static_cast<Eigen::Index>(si),
                                       static_cast<Eigen::Index>(tj)) =
                             total / static_cast<double>(ens.images.size());
                     });
    }
    return out;
}

}  // namespace whpa
