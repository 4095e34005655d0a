#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "whpa/bel.hpp"
#include "whpa/config.hpp"
#include "whpa/dataset.hpp"
#include "whpa/design.hpp"
#include "whpa/metrics.hpp"
#include "whpa/rng.hpp"

using namespace whpa;

namespace {

SubgridSpec tiny_sub() {
    SubgridSpec s;
    s.x_min = 0.0;
    s.x_max = 48.0;
    s.y_min = 0.0;
    s.y_max = 40.0;
    s.cell = 4.0;
    return s;
}

Eigen::MatrixXd gaussian_rows(int n, int p, RngStream& rng) {
    Eigen::MatrixXd m(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
    return m;
}

/// Single-well models trained on strictly negative targets: every
/// reconstruction stays below zero, so no posterior sample has a contour.
std::vector<BelModel> all_negative_models(const SubgridSpec& sub, RngStream& rng) {
    std::vector<BelModel> models;
    for (int w = 0; w < 2; ++w) {
        BelFitOptions opt;
        opt.d_retain = PcaRetain::by_count(3);
        opt.h_retain = PcaRetain::by_count(2);
        opt.sub = sub;
        opt.n_wells = 1;
        opt.curve_len = 5;
        opt.curve_duration = 30.0;
        opt.well_subset = {w};
        const Eigen::MatrixXd d_rows = gaussian_rows(20, 5, rng);
        Eigen::MatrixXd h_rows = 0.01 * gaussian_rows(20, sub.n_cells(), rng);
        h_rows.array() -= 5.0;
        models.push_back(fit_bel(d_rows, h_rows, opt));
    }
    return models;
}

DatasetRecord negative_record(const SubgridSpec& sub, int i) {
    DatasetRecord r;
    r.field_seed = 400 + i;
    r.sampled_mean = 1.6;
    r.sampled_range = 50.0;
    r.curves.resize(2, 5);
    for (int w = 0; w < 2; ++w)
        for (int j = 0; j < 5; ++j) r.curves(w, j) = 0.3 * i + 0.11 * w + 0.01 * j;
    for (int e = 0; e < 4; ++e) r.endpoints.push_back({5.0 + e, 3.0 + e});
    r.mask = Eigen::MatrixXi::Zero(sub.n_rows(), sub.n_cols());
    r.sd.resize(sub.n_rows(), sub.n_cols());
    for (int a = 0; a < r.sd.rows(); ++a)
        for (int b = 0; b < r.sd.cols(); ++b) r.sd(a, b) = -5.0 + 0.02 * ((a * 7 + b + i) % 5);
    return r;
}

/// Disk scenario on the default target window, written as a dataset file so
/// the k-fold and size-study paths run without the physics stack.
std::string write_disk_dataset(const ScenarioConfig& cfg, int n, int invalid_index) {
    const std::string path = "design_test_disks.bin";
    DatasetHeader h;
    h.config_fingerprint = cfg.fingerprint();
    h.master_seed = cfg.master_seed;
    h.n_target = n;
    h.n_wells = 6;
    h.curve_len = cfg.bel.curve_samples;
    h.n_endpoints = 4;
    h.curve_duration = 30.0;
    h.sub = cfg.sub;

    RngStream rng = RngStream::derive(cfg.master_seed, StreamPurpose::Test, 5, 0);
    DatasetFile ds = DatasetFile::create(path, h);
    for (int i = 0; i < n; ++i) {
        const double cx = 900.0 + 150.0 * rng.uniform01();
        const double cy = 400.0 + 200.0 * rng.uniform01();
        const double rad = 40.0 + 50.0 * rng.uniform01();

        DatasetRecord r;
        r.valid = (i != invalid_index);
        r.field_seed = i;
        r.sampled_mean = 1.7;
        r.sampled_range = 60.0;
        r.curves.resize(6, h.curve_len);
        for (int w = 0; w < 6; ++w) {
            const double peak = rad / 60.0 * (1.0 + 0.3 * std::sin(1.3 * w + cx / 40.0));
            const double tc = 0.25 + 0.5 * (cy - 400.0) / 200.0 + 0.02 * w;
            for (int j = 0; j < h.curve_len; ++j) {
                const double t = static_cast<double>(j) / (h.curve_len - 1);
                r.curves(w, j) =
                    peak * std::exp(-std::pow((t - tc) / 0.1, 2)) + 0.01 * rng.normal();
            }
        }
        for (int e = 0; e < 4; ++e) r.endpoints.push_back({cx + e, cy - e});
        r.mask.resize(cfg.sub.n_rows(), cfg.sub.n_cols());
        r.sd.resize(cfg.sub.n_rows(), cfg.sub.n_cols());
        for (int a = 0; a < r.sd.rows(); ++a)
            for (int b = 0; b < r.sd.cols(); ++b) {
                const double d = std::hypot(cfg.sub.cell_center_x(b) - cx,
                                            cfg.sub.cell_center_y(a) - cy);
                r.sd(a, b) = rad - d;
                r.mask(a, b) = r.sd(a, b) > 0.0 ? 1 : 0;
            }
        if (!r.valid) {
            r.curves.setZero();
            r.sd.setZero();
            r.mask.setZero();
        }
        ds.append(r);
    }
    return path;
}

ScenarioConfig small_bel_config() {
    ScenarioConfig cfg = default_config();
    cfg.bel.d_components = 10;
    cfg.bel.h_components = 6;
    cfg.bel.zeta = 2;
    cfg.threads = 1;
    return cfg;
}

}  // namespace

TEST_CASE("design: quantile uses linear interpolation of order statistics") {
    Eigen::VectorXd v(4);
    v << 4.0, 1.0, 3.0, 2.0;
    CHECK(quantile(v, 0.0) == doctest::Approx(1.0));
    CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
    CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(v, 2.0 / 3.0) == doctest::Approx(3.0));
    CHECK(quantile(v, 1.0) == doctest::Approx(4.0));

    Eigen::VectorXd one(1);
    one << 7.0;
    CHECK(quantile(one, 0.0) == 7.0);
    CHECK(quantile(one, 0.6) == 7.0);
    CHECK(quantile(one, 1.0) == 7.0);

    CHECK_THROWS_AS(quantile(Eigen::VectorXd(), 0.5), std::invalid_argument);
}

TEST_CASE("design: box stats match a hand-computed example") {
    Eigen::VectorXd v(9);
    v << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    BoxStats s = box_stats(v);
    CHECK(s.median == doctest::Approx(5.0));
    CHECK(s.q1 == doctest::Approx(3.0));
    CHECK(s.q3 == doctest::Approx(7.0));
    CHECK(s.iqr == doctest::Approx(4.0));
    CHECK(s.lo_whisker == doctest::Approx(1.0));
    CHECK(s.hi_whisker == doctest::Approx(9.0));

    v[8] = 100.0;
    s = box_stats(v);
    CHECK(s.median == doctest::Approx(5.0));
    CHECK(s.q1 == doctest::Approx(3.0));
    CHECK(s.q3 == doctest::Approx(7.0));
    CHECK(s.hi_whisker == doctest::Approx(8.0));
    CHECK(s.lo_whisker == doctest::Approx(1.0));
}

TEST_CASE("design: folds shuffle into a near-even partition") {
    std::vector<int> indices(103);
    std::iota(indices.begin(), indices.end(), 0);

    RngStream rng = RngStream::derive(42, StreamPurpose::FoldShuffle, 0, 0);
    const auto folds = make_folds(indices, 5, rng);
    REQUIRE(folds.size() == 5);

    std::vector<int> sizes;
    std::vector<int> all;
    for (const auto& f : folds) {
        sizes.push_back(static_cast<int>(f.size()));
        all.insert(all.end(), f.begin(), f.end());
    }
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<int>({20, 20, 21, 21, 21}));
    std::sort(all.begin(), all.end());
    CHECK(all == indices);

    RngStream rng2 = RngStream::derive(42, StreamPurpose::FoldShuffle, 0, 0);
    CHECK(make_folds(indices, 5, rng2) == folds);

    CHECK_THROWS_AS(make_folds(indices, 1, rng), std::invalid_argument);
    CHECK_THROWS_AS(make_folds(std::vector<int>{1, 2}, 3, rng), std::invalid_argument);
}

TEST_CASE("design: contour-free posteriors earn the diagonal penalty") {
    const SubgridSpec sub = tiny_sub();
    RngStream rng = RngStream::derive(77, StreamPurpose::Test, 0, 0);
    const std::vector<BelModel> models = all_negative_models(sub, rng);
    const DatasetRecord rec = negative_record(sub, 0);

    const int zeta = 3;
    const UtilityVector uv =
        utility_vector(models, rec, 0, zeta, MetricKind::MHD, 77, 0, 0);
    REQUIRE(uv.theta.size() == 2);
    const double expected = zeta * std::hypot(sub.x_max - sub.x_min, sub.y_max - sub.y_min);
    CHECK(uv.theta[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(uv.theta[1] == doctest::Approx(expected).epsilon(1e-12));

    const UtilityVector again =
        utility_vector(models, rec, 0, zeta, MetricKind::MHD, 77, 0, 0);
    CHECK((uv.theta.array() == again.theta.array()).all());

    // The SSIM path compares images directly, so the contour penalty never
    // applies and each sample contributes a value in [-1, 1].
    const UtilityVector ssim_uv =
        utility_vector(models, rec, 0, zeta, MetricKind::NegSSIM, 77, 0, 0);
    CHECK(ssim_uv.theta[0] >= -double(zeta));
    CHECK(ssim_uv.theta[0] <= double(zeta));
    CHECK(ssim_uv.theta[0] != doctest::Approx(expected));
}

TEST_CASE("design: the utility matrix matches per-record evaluations") {
    const SubgridSpec sub = tiny_sub();
    RngStream rng = RngStream::derive(78, StreamPurpose::Test, 0, 0);
    const std::vector<BelModel> models = all_negative_models(sub, rng);

    const std::string path = "design_test_tiny.bin";
    DatasetHeader h;
    h.config_fingerprint = 1;
    h.master_seed = 77;
    h.n_target = 4;
    h.n_wells = 2;
    h.curve_len = 5;
    h.n_endpoints = 4;
    h.curve_duration = 30.0;
    h.sub = sub;
    DatasetFile ds = DatasetFile::create(path, h);
    for (int i = 0; i < 4; ++i) ds.append(negative_record(sub, i));

    const std::vector<int> test_indices = {0, 2, 3};
    const UtilityMatrix um =
        utility_matrix(models, ds, test_indices, 2, MetricKind::MHD, 77, 1, 1);
    REQUIRE(um.theta.rows() == 2);
    REQUIRE(um.theta.cols() == 3);

    for (int pos = 0; pos < 3; ++pos) {
        const UtilityVector uv = utility_vector(models, ds.read(test_indices[pos]),
                                                test_indices[pos], 2, MetricKind::MHD, 77,
                                                1, pos);
        CHECK((um.theta.col(pos).array() == uv.theta.array()).all());
    }

    const UtilityMatrix threaded =
        utility_matrix(models, ds, test_indices, 2, MetricKind::MHD, 77, 1, 2);
    CHECK((um.theta.array() == threaded.theta.array()).all());
    std::remove(path.c_str());
}

TEST_CASE("design: ranking orders pooled medians and flags drifting folds") {
    auto make_fold = [](int index, const Eigen::MatrixXd& theta_std) {
        FoldReport f;
        f.fold_index = index;
        f.n_test = static_cast<int>(theta_std.cols());
        f.theta = theta_std;
        f.theta_std = theta_std;
        for (int w = 0; w < theta_std.rows(); ++w)
            f.wells.push_back(box_stats(theta_std.row(w)));
        return f;
    };

    Eigen::MatrixXd f1(3, 4), f2(3, 4);
    f1 << 1.0, 1.2, 0.8, 1.1,
          0.0, 0.1, -0.1, 0.05,
          -1.0, -1.2, -0.8, -1.1;
    f2 << 0.9, 1.3, 1.0, 1.15,
          0.02, 0.12, -0.08, 0.06,
          -0.9, -1.3, -1.0, -1.15;

    DesignReport report;
    report.folds.push_back(make_fold(0, f1));
    report.folds.push_back(make_fold(1, f2));
    rank_wells(report);

    CHECK(report.ranking == std::vector<int>({2, 1, 0}));
    CHECK(report.consistent);
    CHECK(report.pooled.size() == 3);
    CHECK(report.pooled[2].median < report.pooled[1].median);

    // Shifting one fold's scores for well 0 pushes its fold median outside
    // the pooled interquartile range.
    Eigen::MatrixXd f2_shift = f2;
    f2_shift.row(0).array() += 10.0;
    DesignReport drifted;
    drifted.folds.push_back(make_fold(0, f1));
    drifted.folds.push_back(make_fold(1, f2_shift));
    rank_wells(drifted);

    CHECK_FALSE(drifted.consistent);
    CHECK_FALSE(drifted.well_consistent[0]);
    CHECK(drifted.well_consistent[1]);
    CHECK(drifted.well_consistent[2]);
    CHECK(drifted.ranking.back() == 0);

    DesignReport too_few;
    too_few.folds.push_back(make_fold(0, f1));
    CHECK_THROWS_AS(rank_wells(too_few), std::invalid_argument);
}

TEST_CASE("design: k-fold study on a synthetic disk dataset") {
    const ScenarioConfig cfg = small_bel_config();
    const std::string path = write_disk_dataset(cfg, 70, 7);
    const DatasetFile ds = DatasetFile::open(path);
    REQUIRE(ds.n_valid() == 69);

    const DesignReport report = kfold_design(ds, cfg, 2, 2, MetricKind::MHD);
    CHECK(report.k == 2);
    CHECK(report.zeta == 2);
    CHECK(report.metric == MetricKind::MHD);
    CHECK(report.config_fingerprint == cfg.fingerprint());
    REQUIRE(report.folds.size() == 2);
    CHECK(report.pooled.size() == 6);
    CHECK(report.well_consistent.size() == 6);

    std::vector<int> ranked = report.ranking;
    std::sort(ranked.begin(), ranked.end());
    CHECK(ranked == std::vector<int>({0, 1, 2, 3, 4, 5}));

    std::set<int> seen;
    for (const FoldReport& f : report.folds) {
        CHECK(f.n_train + f.n_test == 69);
        CHECK(f.theta.rows() == 6);
        CHECK(f.theta.cols() == f.n_test);
        CHECK(f.theta.allFinite());
        CHECK((f.theta.array() > 0.0).all());

        // Pooled standardization: zero mean, unit population variance.
        Eigen::Map<const Eigen::VectorXd> flat(f.theta_std.data(), f.theta_std.size());
        CHECK(std::abs(flat.mean()) < 1e-9);
        const double var = (flat.array() - flat.mean()).square().mean();
        CHECK(var == doctest::Approx(1.0).epsilon(1e-9));

        std::set<int> train(f.train_indices.begin(), f.train_indices.end());
        for (int t : f.test_indices) {
            CHECK(train.count(t) == 0);
            CHECK(t != 7);
            seen.insert(t);
        }
        CHECK(train.count(7) == 0);
    }
    CHECK(seen.size() == 69);

    const DesignReport again = kfold_design(ds, cfg, 2, 2, MetricKind::MHD);
    for (int f = 0; f < 2; ++f)
        CHECK((again.folds[f].theta.array() == report.folds[f].theta.array()).all());
    CHECK(again.ranking == report.ranking);

    ScenarioConfig other = cfg;
    other.master_seed += 1;
    CHECK_THROWS_AS(kfold_design(ds, other, 2, 2, MetricKind::MHD), std::runtime_error);
    CHECK_THROWS_AS(kfold_design(ds, cfg, 70, 2, MetricKind::MHD), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("design: size study skips undersized fits and stays in range") {
    const ScenarioConfig cfg = small_bel_config();
    const std::string path = write_disk_dataset(cfg, 70, 7);
    const DatasetFile ds = DatasetFile::open(path);

    const std::vector<int> sizes = {5, 10, 30};
    const SizeStudyResult res = training_size_study(ds, cfg, sizes, 4, 2);
    CHECK(res.sizes == sizes);
    CHECK(res.zeta == 2);
    REQUIRE(res.skipped.size() == 3);
    CHECK(res.skipped[0]);
    CHECK_FALSE(res.skipped[1]);
    CHECK_FALSE(res.skipped[2]);
    CHECK(res.target_indices == std::vector<int>({66, 67, 68, 69}));

    REQUIRE(res.mean_ssim.rows() == 3);
    REQUIRE(res.mean_ssim.cols() == 4);
    for (int j = 0; j < 4; ++j) CHECK(std::isnan(res.mean_ssim(0, j)));
    for (int i = 1; i < 3; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(std::isfinite(res.mean_ssim(i, j)));
            CHECK(res.mean_ssim(i, j) >= -1.0);
            CHECK(res.mean_ssim(i, j) <= 1.0 + 1e-12);
        }

    const SizeStudyResult again = training_size_study(ds, cfg, sizes, 4, 2);
    for (int i = 1; i < 3; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(again.mean_ssim(i, j) == res.mean_ssim(i, j));

    CHECK_THROWS_AS(training_size_study(ds, cfg, {69}, 4, 2), std::invalid_argument);
    ScenarioConfig other = cfg;
    other.master_seed += 1;
    CHECK_THROWS_AS(training_size_study(ds, other, sizes, 4, 2), std::runtime_error);
    std::remove(path.c_str());
}
