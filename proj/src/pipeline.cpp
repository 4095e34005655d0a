#include "whpa/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>

#include "whpa/parallel.hpp"

namespace whpa {

DatasetHeader make_dataset_header(const ScenarioConfig& cfg, int n) {
    if (n < 0) throw std::invalid_argument("dataset size must be >= 0");
    DatasetHeader h;
    h.config_fingerprint = cfg.fingerprint();
    h.master_seed = cfg.master_seed;
    h.n_target = n;
    h.n_wells = static_cast<int>(cfg.wells.injectors.size());
    h.curve_len = cfg.bel.curve_samples;
    h.n_endpoints = cfg.backtrack.n_particles;
    h.curve_duration = cfg.transport.sim_duration;
    h.sub = cfg.sub;
    return h;
}

DatasetRecord generate_record(const ScenarioConfig& cfg, int index) {
    const std::uint64_t seed = cfg.master_seed;
    const auto idx = static_cast<std::uint64_t>(index);

    RngStream mean_rng = RngStream::derive(seed, StreamPurpose::PriorMean, idx);
    RngStream field_rng = RngStream::derive(seed, StreamPurpose::FieldSimulation, idx);
    RngStream well_rng = RngStream::derive(seed, StreamPurpose::WellConditioning, idx);

    const double mean = sample_prior_mean(cfg.prior, mean_rng);
    HydraulicField field = simulate_field(cfg.grid, cfg.prior, mean, field_rng);
    field = condition_wells(field, cfg.wells, cfg.prior, well_rng);

    const FlowSolution flow = solve_steady_flow(field, cfg.wells, cfg.flow);

    const int n_wells = static_cast<int>(cfg.wells.injectors.size());
    std::vector<BreakthroughCurve> raw;
    raw.reserve(static_cast<size_t>(n_wells));
    for (int w = 0; w < n_wells; ++w) {
        RngStream t_rng = RngStream::derive(seed, StreamPurpose::Transport, idx,
                                            static_cast<std::uint64_t>(w));
        raw.push_back(simulate_tracer(flow, cfg.wells.injectors[static_cast<size_t>(w)],
                                      cfg.transport, t_rng));
    }
    const ResampledCurves resampled =
        resample_curves(raw, cfg.bel.curve_samples, cfg.transport.sim_duration);

    const EndpointSet endpoints = backtrack_particles(flow, cfg.backtrack);
    const WhpaContour contour = order_endpoints_tsp(endpoints);
    const BinaryImage mask = rasterize(contour, cfg.sub);
    if (mask.all_outside)
        throw std::runtime_error("record " + std::to_string(index) +
                                 ": WHPA lies outside the subgrid");
    const SdImage sd = signed_distance(mask);

    DatasetRecord rec;
    rec.valid = true;
    rec.field_seed = RngStream::derive_seed(seed, StreamPurpose::FieldSimulation, idx);
    rec.sampled_mean = field.sampled_mean;
    rec.sampled_range = field.sampled_range;
    rec.curves = resampled.values;
    rec.endpoints = endpoints.points;
    rec.mask = mask.values;
    rec.sd = sd.psi;
    return rec;
}

namespace {

DatasetRecord invalid_record(const DatasetHeader& h, std::uint64_t field_seed) {
    DatasetRecord rec;
    rec.valid = false;
    rec.field_seed = field_seed;
    rec.curves = Eigen::MatrixXd::Zero(h.n_wells, h.curve_len);
    rec.endpoints.assign(static_cast<size_t>(h.n_endpoints), Point{});
    rec.mask = Eigen::MatrixXi::Zero(h.sub.n_rows(), h.sub.n_cols());
    rec.sd = Eigen::MatrixXd::Zero(h.sub.n_rows(), h.sub.n_cols());
    return rec;
}

}  // namespace

GenerationSummary generate_dataset(const ScenarioConfig& cfg, int n, const std::string& path,
                                   bool overwrite,
                                   const std::function<void(int, int)>& progress) {
    cfg.validate();
    const DatasetHeader header = make_dataset_header(cfg, n);

    std::optional<DatasetFile> file;
    if (!overwrite && std::filesystem::exists(path)) {
        DatasetFile existing = DatasetFile::open(path);
        if (!existing.header().compatible_with(header))
            throw std::runtime_error(
                "existing dataset at " + path +
                " was generated with a different config/seed/size; "
                "remove it or pass overwrite");
        file = std::move(existing);
    } else {
        file = DatasetFile::create(path, header);
    }

    GenerationSummary summary;
    summary.n_total = n;
    const auto t0 = std::chrono::steady_clock::now();

    const int start = file->n_records();
    const unsigned threads = cfg.threads == 0
                                 ? std::max(1u, std::thread::hardware_concurrency())
                                 : static_cast<unsigned>(cfg.threads);
    const int chunk = static_cast<int>(threads) * 4;

    std::vector<DatasetRecord> buffer;
    std::vector<std::string> errors;
    for (int base = start; base < n; base += chunk) {
        const int count = std::min(chunk, n - base);
        buffer.assign(static_cast<size_t>(count), DatasetRecord{});
        errors.assign(static_cast<size_t>(count), {});
        parallel_for(static_cast<size_t>(count), threads, [&](size_t i) {
            const int index = base + static_cast<int>(i);
            try {
                buffer[i] = generate_record(cfg, index);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                buffer[i] = invalid_record(
                    header, RngStream::derive_seed(cfg.master_seed,
                                                   StreamPurpose::FieldSimulation,
                                                   static_cast<std::uint64_t>(index)));
            }
        });
        for (int i = 0; i < count; ++i) {
            file->append(buffer[static_cast<size_t>(i)]);
            ++summary.n_generated;
            if (!errors[static_cast<size_t>(i)].empty()) {
                ++summary.n_failed;
                summary.failed_indices.push_back(base + i);
                std::fprintf(stderr, "record %d failed: %s\n", base + i,
                             errors[static_cast<size_t>(i)].c_str());
            }
            if (progress) progress(base + i + 1, n);
        }
    }

    summary.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

double coverage_fraction(const PosteriorEnsemble& ens, const std::vector<Point>& pts) {
    if (pts.empty() || ens.images.empty()) return 0.0;
    const SubgridSpec& sub = ens.sub;
    const int nr = sub.n_rows();
    const int nc = sub.n_cols();

    const auto interp = [&](const Eigen::MatrixXd& img, const Point& p) {
        const double u = (p.x - sub.x_min) / sub.cell - 0.5;
        const double v = (p.y - sub.y_min) / sub.cell - 0.5;
        const int j0 = std::clamp(static_cast<int>(std::floor(u)), 0, nc - 2);
        const int i0 = std::clamp(static_cast<int>(std::floor(v)), 0, nr - 2);
        const double fu = std::clamp(u - j0, 0.0, 1.0);
        const double fv = std::clamp(v - i0, 0.0, 1.0);
        return img(i0, j0) * (1 - fu) * (1 - fv) + img(i0, j0 + 1) * fu * (1 - fv) +
               img(i0 + 1, j0) * (1 - fu) * fv + img(i0 + 1, j0 + 1) * fu * fv;
    };

    int covered = 0;
    for (const Point& p : pts) {
        for (const Eigen::MatrixXd& img : ens.images) {
            if (interp(img, p) >= 0.0) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(pts.size());
}

Eigen::MatrixXi envelope_mask(const PosteriorEnsemble& ens) {
    if (ens.images.empty()) return {};
    const int nr = static_cast<int>(ens.images[0].rows());
    const int nc = static_cast<int>(ens.images[0].cols());
    Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(nr, nc);
    for (const Eigen::MatrixXd& img : ens.images)
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nc; ++j)
                if (img(i, j) >= 0.0) mask(i, j) = 1;
    return mask;
}

}  // namespace whpa
