#include "whpa/prior_field.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>

#include "whpa/binio.hpp"

namespace whpa {

namespace {

// FFTW plan creation/destruction is not thread-safe.
std::mutex g_fftw_mutex;

// Smallest even 7-smooth integer >= n (FFTW handles these sizes well).
int next_fast_even(int n) {
    if (n < 2) n = 2;
    if (n % 2) ++n;
    for (;; n += 2) {
        int m = n;
        for (int p : {2, 3, 5, 7})
            while (m % p == 0) m /= p;
        if (m == 1) return n;
    }
}

struct CellIndex {
    int row, col;
    bool operator==(const CellIndex&) const = default;
};

// Covariance of the extended torus, row-major (Mr x Mc).
Eigen::MatrixXd torus_covariance(const VariogramSpec& vg, double range, int Mr, int Mc,
                                 double dy, double dx) {
    Eigen::MatrixXd c(Mr, Mc);
    for (int i = 0; i < Mr; ++i) {
        const int wi = std::min(i, Mr - i);
        for (int j = 0; j < Mc; ++j) {
            const int wj = std::min(j, Mc - j);
            const double h = std::hypot(wi * dy, wj * dx);
            c(i, j) = vg.covariance(h, range);
        }
    }
    return c;
}

// Zero-mean field sampled by circulant embedding. Returns false when the
// embedding has meaningfully negative eigenvalues at this padding.
bool sample_fft(const GridSpec& grid, const VariogramSpec& vg, double range, int pad_factor,
                RngStream& rng, Eigen::MatrixXd& out) {
    const double dx = grid.dx();
    const double dy = grid.dy();
    const int Mr = next_fast_even(grid.n_rows - 1 + pad_factor * static_cast<int>(std::ceil(range / dy)) + 1);
    const int Mc = next_fast_even(grid.n_cols - 1 + pad_factor * static_cast<int>(std::ceil(range / dx)) + 1);
    const std::size_t M = static_cast<std::size_t>(Mr) * Mc;

    const Eigen::MatrixXd cov = torus_covariance(vg, range, Mr, Mc, dy, dx);

    std::vector<std::complex<double>> buf(M), freq(M);
    for (int i = 0; i < Mr; ++i)
        for (int j = 0; j < Mc; ++j) buf[static_cast<std::size_t>(i) * Mc + j] = cov(i, j);

    fftw_plan fwd, bwd;
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fwd = fftw_plan_dft_2d(Mr, Mc, reinterpret_cast<fftw_complex*>(buf.data()),
                               reinterpret_cast<fftw_complex*>(freq.data()), FFTW_FORWARD,
                               FFTW_ESTIMATE);
        bwd = fftw_plan_dft_2d(Mr, Mc, reinterpret_cast<fftw_complex*>(freq.data()),
                               reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                               FFTW_ESTIMATE);
    }
    fftw_execute(fwd);

    double max_eig = 0.0, min_eig = 0.0;
    for (const auto& z : freq) {
        max_eig = std::max(max_eig, z.real());
        min_eig = std::min(min_eig, z.real());
    }
    const bool psd = min_eig >= -1e-9 * std::max(max_eig, 1.0);
    if (psd) {
        // Complex white noise; real and imaginary output parts would each be
        // valid realizations, the real part is kept.
        for (std::size_t idx = 0; idx < M; ++idx) {
            const double lambda = std::max(freq[idx].real(), 0.0);
            const double a = std::sqrt(lambda);
            const double re = rng.normal();
            const double im = rng.normal();
            freq[idx] = std::complex<double>(a * re, a * im);
        }
        fftw_execute(bwd);
        const double scale = 1.0 / std::sqrt(static_cast<double>(M));
        out.resize(grid.n_rows, grid.n_cols);
        for (int i = 0; i < grid.n_rows; ++i)
            for (int j = 0; j < grid.n_cols; ++j)
                out(i, j) = buf[static_cast<std::size_t>(i) * Mc + j].real() * scale;
    }
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
    }
    return psd;
}

// Dense-Cholesky sampler for small grids.
Eigen::MatrixXd sample_dense(const GridSpec& grid, const VariogramSpec& vg, double range,
                             RngStream& rng) {
    const int n = grid.n_cells();
    Eigen::MatrixXd cov(n, n);
    for (int a = 0; a < n; ++a) {
        const int ra = a / grid.n_cols, ca = a % grid.n_cols;
        for (int b = a; b < n; ++b) {
            const int rb = b / grid.n_cols, cb = b % grid.n_cols;
            const double h = std::hypot((ra - rb) * grid.dy(), (ca - cb) * grid.dx());
            const double v = vg.covariance(h, range);
            cov(a, b) = v;
            cov(b, a) = v;
        }
    }
    cov.diagonal().array() += 1e-10 * (vg.sill + vg.nugget);

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        cov.diagonal().array() += 1e-6 * (vg.sill + vg.nugget);
        llt.compute(cov);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("prior-field: dense covariance factorization failed");
    }
    Eigen::VectorXd xi(n);
    for (int i = 0; i < n; ++i) xi[i] = rng.normal();
    const Eigen::VectorXd z = llt.matrixL() * xi;

    Eigen::MatrixXd out(grid.n_rows, grid.n_cols);
    for (int i = 0; i < grid.n_rows; ++i)
        for (int j = 0; j < grid.n_cols; ++j) out(i, j) = z[i * grid.n_cols + j];
    return out;
}

constexpr int kDenseCellLimit = 4096;

}  // namespace

void WellLayout::validate(const GridSpec& grid) const {
    grid.validate();
    if (pumping.rate > 0.0)
        throw std::invalid_argument("WellLayout: pumping rate must be negative (extraction) or zero (absent)");
    if (pumping.rate != 0.0 && !grid.contains(pumping.x, pumping.y))
        throw std::invalid_argument("WellLayout: pumping well outside grid");
    for (std::size_t i = 0; i < injectors.size(); ++i) {
        if (!grid.contains(injectors[i].x, injectors[i].y)) {
            std::ostringstream msg;
            msg << "WellLayout: injector " << i << " outside grid";
            throw std::invalid_argument(msg.str());
        }
    }
}

double sample_prior_mean(const PriorSpec& prior, RngStream& rng) {
    prior.validate();
    const auto [lo, hi] = prior.log10k_mean_bounds;
    return lo == hi ? lo : rng.uniform(lo, hi);
}

HydraulicField simulate_field(const GridSpec& grid, const PriorSpec& prior, double mean,
                              RngStream& rng) {
    grid.validate();
    prior.variogram.validate();

    HydraulicField field;
    field.grid = grid;
    field.sampled_mean = mean;
    field.sampled_range = rng.uniform(prior.variogram.range_min, prior.variogram.range_max);

    if (prior.variogram.sill + prior.variogram.nugget <= 0.0) {
        field.log10k = Eigen::MatrixXd::Constant(grid.n_rows, grid.n_cols, mean);
        return field;
    }

    Eigen::MatrixXd noise;
    if (grid.n_cells() <= kDenseCellLimit) {
        noise = sample_dense(grid, prior.variogram, field.sampled_range, rng);
        field.used_dense_fallback = true;
    } else if (!sample_fft(grid, prior.variogram, field.sampled_range, 1, rng, noise) &&
               !sample_fft(grid, prior.variogram, field.sampled_range, 3, rng, noise)) {
        if (grid.n_cells() > 4 * kDenseCellLimit)
            throw std::runtime_error(
                "prior-field: circulant embedding not positive definite and grid too large "
                "for the dense fallback");
        noise = sample_dense(grid, prior.variogram, field.sampled_range, rng);
        field.used_dense_fallback = true;
    }
    field.log10k = noise.array() + mean;
    return field;
}

HydraulicField condition_wells(const HydraulicField& field, const WellLayout& wells,
                               const PriorSpec& prior, RngStream& rng) {
    HydraulicField out = field;
    std::vector<CellIndex> done;

    auto condition_cell = [&](double x, double y) {
        if (!field.grid.contains(x, y))
            throw std::invalid_argument("condition_wells: well outside grid");
        const CellIndex cell{std::min(field.grid.row_of(y), field.grid.n_rows - 1),
                             std::min(field.grid.col_of(x), field.grid.n_cols - 1)};
        for (const auto& seen : done)
            if (seen == cell) return;
        done.push_back(cell);
        const double k = rng.uniform(prior.well_k_bounds.first, prior.well_k_bounds.second);
        out.log10k(cell.row, cell.col) = std::log10(k);
    };

    if (wells.pumping.rate != 0.0) condition_cell(wells.pumping.x, wells.pumping.y);
    for (const auto& inj : wells.injectors) condition_cell(inj.x, inj.y);
    return out;
}

void save_field(const HydraulicField& field, const std::string& path, bool csv) {
    if (csv) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out << "# n_rows=" << field.grid.n_rows << ",n_cols=" << field.grid.n_cols
            << ",dx=" << field.grid.dx() << ",dy=" << field.grid.dy()
            << ",seed=" << field.realization_seed << "\n";
        char buf[32];
        for (int i = 0; i < field.grid.n_rows; ++i) {
            for (int j = 0; j < field.grid.n_cols; ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", field.log10k(i, j));
                out << buf << (j + 1 == field.grid.n_cols ? '\n' : ',');
            }
        }
        return;
    }
    BinaryWriter w(path);
    w.put_bytes("WHPAFLD1", 8);
    w.put_u32(static_cast<std::uint32_t>(field.grid.n_rows));
    w.put_u32(static_cast<std::uint32_t>(field.grid.n_cols));
    w.put_f64(field.grid.dx());
    w.put_f64(field.grid.dy());
    w.put_u64(field.realization_seed);
    w.put_f64(field.sampled_mean);
    w.put_f64(field.sampled_range);
    for (int i = 0; i < field.grid.n_rows; ++i)
        for (int j = 0; j < field.grid.n_cols; ++j) w.put_f64(field.log10k(i, j));
    w.close();
}

HydraulicField load_field(const std::string& path) {
    BinaryReader r(path);
    char magic[8];
    r.get_bytes(magic, 8);
    if (std::string(magic, 8) != "WHPAFLD1")
        throw std::runtime_error("not a field raster file: " + path);
    HydraulicField field;
    const int rows = static_cast<int>(r.get_u32());
    const int cols = static_cast<int>(r.get_u32());
    const double dx = r.get_f64();
    const double dy = r.get_f64();
    field.grid = GridSpec{dx * cols, dy * rows, rows, cols};
    field.realization_seed = r.get_u64();
    field.sampled_mean = r.get_f64();
    field.sampled_range = r.get_f64();
    field.log10k.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) field.log10k(i, j) = r.get_f64();
    return field;
}

}  // namespace whpa
