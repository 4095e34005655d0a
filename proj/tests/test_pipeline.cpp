#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "whpa/config.hpp"
#include "whpa/dataset.hpp"
#include "whpa/pipeline.hpp"

using namespace whpa;

namespace {

void check_equal(const DatasetRecord& a, const DatasetRecord& b) {
    CHECK(a.valid == b.valid);
    CHECK(a.field_seed == b.field_seed);
    CHECK(a.sampled_mean == b.sampled_mean);
    CHECK(a.sampled_range == b.sampled_range);
    CHECK((a.curves.array() == b.curves.array()).all());
    CHECK((a.mask.array() == b.mask.array()).all());
    CHECK((a.sd.array() == b.sd.array()).all());
    REQUIRE(a.endpoints.size() == b.endpoints.size());
    for (std::size_t e = 0; e < a.endpoints.size(); ++e) {
        CHECK(a.endpoints[e].x == b.endpoints[e].x);
        CHECK(a.endpoints[e].y == b.endpoints[e].y);
    }
}

Eigen::MatrixXd disk_psi(const SubgridSpec& sub, double cx, double cy, double r) {
    Eigen::MatrixXd psi(sub.n_rows(), sub.n_cols());
    for (int i = 0; i < psi.rows(); ++i)
        for (int j = 0; j < psi.cols(); ++j)
            psi(i, j) = r - std::hypot(sub.cell_center_x(j) - cx, sub.cell_center_y(i) - cy);
    return psi;
}

}  // namespace

TEST_CASE("pipeline: header mirrors the scenario") {
    const ScenarioConfig cfg = default_config();
    const DatasetHeader h = make_dataset_header(cfg, 25);
    CHECK(h.config_fingerprint == cfg.fingerprint());
    CHECK(h.master_seed == cfg.master_seed);
    CHECK(h.n_target == 25);
    CHECK(h.n_wells == static_cast<int>(cfg.wells.injectors.size()));
    CHECK(h.curve_len == cfg.bel.curve_samples);
    CHECK(h.n_endpoints == cfg.backtrack.n_particles);
    CHECK(h.curve_duration == cfg.transport.sim_duration);
    CHECK(h.sub == cfg.sub);
}

TEST_CASE("pipeline: one record is deterministic and self-consistent") {
    const ScenarioConfig cfg = default_config();
    const DatasetRecord rec = generate_record(cfg, 2);

    CHECK(rec.valid);
    REQUIRE(rec.curves.rows() == 6);
    REQUIRE(rec.curves.cols() == cfg.bel.curve_samples);
    CHECK(rec.curves.allFinite());
    CHECK((rec.curves.array() >= 0.0).all());
    CHECK(rec.curves.maxCoeff() > 0.0);

    CHECK(rec.sampled_mean >= cfg.prior.log10k_mean_bounds.first);
    CHECK(rec.sampled_mean <= cfg.prior.log10k_mean_bounds.second);
    CHECK(rec.sampled_range >= cfg.prior.variogram.range_min);
    CHECK(rec.sampled_range <= cfg.prior.variogram.range_max);

    REQUIRE(static_cast<int>(rec.endpoints.size()) == cfg.backtrack.n_particles);
    for (const Point& p : rec.endpoints) CHECK(cfg.grid.contains(p.x, p.y));

    REQUIRE(rec.sd.rows() == cfg.sub.n_rows());
    REQUIRE(rec.sd.cols() == cfg.sub.n_cols());
    for (int i = 0; i < rec.sd.rows(); ++i)
        for (int j = 0; j < rec.sd.cols(); ++j)
            CHECK(rec.mask(i, j) == (rec.sd(i, j) > 0.0 ? 1 : 0));
    CHECK(rec.mask.sum() > 0);

    const DatasetRecord again = generate_record(cfg, 2);
    check_equal(rec, again);
}

TEST_CASE("pipeline: batch generation resumes instead of recomputing") {
    const ScenarioConfig cfg = default_config();
    const std::string path = "pipeline_test_dataset.bin";
    std::remove(path.c_str());

    // An interrupted run leaves a file with fewer records than its target.
    {
        DatasetFile partial = DatasetFile::create(path, make_dataset_header(cfg, 3));
        partial.append(generate_record(cfg, 0));
        partial.append(generate_record(cfg, 1));
    }

    const GenerationSummary resumed = generate_dataset(cfg, 3, path);
    CHECK(resumed.n_total == 3);
    CHECK(resumed.n_generated == 1);
    CHECK(resumed.n_failed == 0);

    const DatasetFile ds = DatasetFile::open(path);
    REQUIRE(ds.n_records() == 3);
    check_equal(ds.read(1), generate_record(cfg, 1));
    check_equal(ds.read(2), generate_record(cfg, 2));

    ScenarioConfig other = cfg;
    other.master_seed += 1;
    CHECK_THROWS(generate_dataset(other, 3, path));
    const GenerationSummary redone = generate_dataset(other, 2, path, true);
    CHECK(redone.n_generated == 2);
    std::remove(path.c_str());
}

TEST_CASE("pipeline: coverage and envelope over a synthetic ensemble") {
    SubgridSpec sub;
    sub.x_min = 0.0;
    sub.x_max = 200.0;
    sub.y_min = 0.0;
    sub.y_max = 160.0;
    sub.cell = 4.0;

    PosteriorEnsemble ens;
    ens.sub = sub;
    ens.images.push_back(disk_psi(sub, 60.0, 80.0, 30.0));
    ens.images.push_back(disk_psi(sub, 140.0, 80.0, 30.0));
    ens.contours.resize(2);

    const std::vector<Point> pts = {{60.0, 80.0}, {140.0, 80.0}, {5.0, 5.0}, {100.0, 150.0}};
    CHECK(coverage_fraction(ens, pts) == doctest::Approx(0.5));
    CHECK(coverage_fraction(ens, {{60.0, 80.0}}) == doctest::Approx(1.0));
    CHECK(coverage_fraction(ens, {{5.0, 5.0}}) == doctest::Approx(0.0));

    const Eigen::MatrixXi env = envelope_mask(ens);
    REQUIRE(env.rows() == sub.n_rows());
    REQUIRE(env.cols() == sub.n_cols());
    for (int i = 0; i < env.rows(); ++i)
        for (int j = 0; j < env.cols(); ++j) {
            const int want = (ens.images[0](i, j) >= 0.0 || ens.images[1](i, j) >= 0.0) ? 1 : 0;
            CHECK(env(i, j) == want);
        }
}
