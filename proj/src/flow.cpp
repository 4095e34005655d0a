#include "whpa/flow.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace whpa {

namespace {

double harmonic(double a, double b) {
    const double s = a + b;
    if (s <= 0.0) return 0.0;
    return 2.0 * a * b / s;
}

}  // namespace

Point FlowSolution::darcy_at(double x, double y) const {
    const double dx = grid.dx();
    const double dy = grid.dy();
    int col = grid.col_of(x);
    int row = grid.row_of(y);
    col = std::clamp(col, 0, grid.n_cols - 1);
    row = std::clamp(row, 0, grid.n_rows - 1);

    const double fx = std::clamp((x - col * dx) / dx, 0.0, 1.0);
    const double fy = std::clamp((y - row * dy) / dy, 0.0, 1.0);

    Point q;
    q.x = (1.0 - fx) * qx(row, col) + fx * qx(row, col + 1);
    q.y = (1.0 - fy) * qy(row, col) + fy * qy(row + 1, col);
    return q;
}

FlowSolution solve_steady_flow(const HydraulicField& field, const WellLayout& wells,
                               const FlowSpec& spec) {
    spec.validate();
    const GridSpec& grid = field.grid;
    grid.validate();
    wells.validate(grid);
    if (field.log10k.rows() != grid.n_rows || field.log10k.cols() != grid.n_cols)
        throw std::invalid_argument("solve_steady_flow: field/grid shape mismatch");

    const int nr = grid.n_rows;
    const int nc = grid.n_cols;
    const int n = nr * nc;
    const double dx = grid.dx();
    const double dy = grid.dy();
    const double b = spec.thickness;

    Eigen::MatrixXd T(nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) T(i, j) = std::pow(10.0, field.log10k(i, j)) * b;

    const auto idx = [nc](int i, int j) { return i * nc + j; };

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(n) * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);

    // Interior x-faces.
    for (int i = 0; i < nr; ++i) {
        for (int j = 1; j < nc; ++j) {
            const double c = harmonic(T(i, j - 1), T(i, j)) * dy / dx;
            trip.emplace_back(idx(i, j - 1), idx(i, j), -c);
            trip.emplace_back(idx(i, j), idx(i, j - 1), -c);
            diag[idx(i, j - 1)] += c;
            diag[idx(i, j)] += c;
        }
    }
    // Interior y-faces.
    for (int i = 1; i < nr; ++i) {
        for (int j = 0; j < nc; ++j) {
            const double c = harmonic(T(i - 1, j), T(i, j)) * dx / dy;
            trip.emplace_back(idx(i - 1, j), idx(i, j), -c);
            trip.emplace_back(idx(i, j), idx(i - 1, j), -c);
            diag[idx(i - 1, j)] += c;
            diag[idx(i, j)] += c;
        }
    }
    // Dirichlet west/east at half-cell distance.
    for (int i = 0; i < nr; ++i) {
        const double cw = T(i, 0) * dy / (0.5 * dx);
        diag[idx(i, 0)] += cw;
        rhs[idx(i, 0)] += cw * spec.west_head;
        const double ce = T(i, nc - 1) * dy / (0.5 * dx);
        diag[idx(i, nc - 1)] += ce;
        rhs[idx(i, nc - 1)] += ce * spec.east_head;
    }

    const bool has_pump = wells.pumping.rate != 0.0;
    int pr = -1, pc = -1;
    if (has_pump) {
        pr = grid.row_of(wells.pumping.y);
        pc = grid.col_of(wells.pumping.x);
        rhs[idx(pr, pc)] += wells.pumping.rate;  // negative rate = extraction
    }

    for (int c = 0; c < n; ++c) trip.emplace_back(c, c, diag[c]);

    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("solve_steady_flow: factorization failed");
    Eigen::VectorXd h = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("solve_steady_flow: linear solve failed");

    FlowSolution sol;
    sol.grid = grid;
    sol.thickness = b;
    sol.heads.resize(nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) sol.heads(i, j) = h[idx(i, j)];

    // Face fluxes as specific discharge [m/d]; x-face area = dy*b, y-face = dx*b.
    sol.qx = Eigen::MatrixXd::Zero(nr, nc + 1);
    sol.qy = Eigen::MatrixXd::Zero(nr + 1, nc);
    for (int i = 0; i < nr; ++i) {
        sol.qx(i, 0) = T(i, 0) / (0.5 * dx) * (spec.west_head - sol.heads(i, 0)) / b;
        for (int j = 1; j < nc; ++j) {
            const double Tf = harmonic(T(i, j - 1), T(i, j));
            sol.qx(i, j) = Tf / dx * (sol.heads(i, j - 1) - sol.heads(i, j)) / b;
        }
        sol.qx(i, nc) = T(i, nc - 1) / (0.5 * dx) * (sol.heads(i, nc - 1) - spec.east_head) / b;
    }
    for (int i = 1; i < nr; ++i) {
        for (int j = 0; j < nc; ++j) {
            const double Tf = harmonic(T(i - 1, j), T(i, j));
            sol.qy(i, j) = Tf / dy * (sol.heads(i - 1, j) - sol.heads(i, j)) / b;
        }
    }

    // Per-cell divergence check against sources.
    double max_resid = 0.0;
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nc; ++j) {
            double net = (sol.qx(i, j) - sol.qx(i, j + 1)) * dy * b +
                         (sol.qy(i, j) - sol.qy(i + 1, j)) * dx * b;
            if (has_pump && i == pr && j == pc) net += wells.pumping.rate;
            max_resid = std::max(max_resid, std::abs(net));
        }
    }
    sol.mass_balance_residual = max_resid;
    const double scale = std::max(1.0, std::abs(wells.pumping.rate));
    if (!(max_resid <= 1e-6 * scale))
        throw std::runtime_error("solve_steady_flow: mass balance residual " +
                                 std::to_string(max_resid) + " m^3/d exceeds tolerance");

    sol.has_pumping = has_pump;
    if (has_pump) {
        sol.pump_location = Point{wells.pumping.x, wells.pumping.y};
        sol.pump_rate = wells.pumping.rate;
    }
    return sol;
}

}  // namespace whpa
