#include "whpa/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace whpa {

namespace {

/// Squared distance from w to segment [a, b]; frac is the closest parameter.
double segment_dist2(const Point& a, const Point& b, const Point& w, double& frac) {
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    frac = 0.0;
    if (len2 > 0.0) frac = std::clamp(((w.x - a.x) * ex + (w.y - a.y) * ey) / len2, 0.0, 1.0);
    const double cx = a.x + frac * ex - w.x;
    const double cy = a.y + frac * ey - w.y;
    return cx * cx + cy * cy;
}

}  // namespace

void TransportParams::validate() const {
    if (!(porosity > 0.0 && porosity <= 1.0))
        throw std::invalid_argument("TransportParams: porosity must be in (0, 1]");
    if (alpha_l < 0.0 || alpha_t < 0.0)
        throw std::invalid_argument("TransportParams: dispersivities must be non-negative");
    if (n_particles <= 0) throw std::invalid_argument("TransportParams: n_particles must be positive");
    if (!(sim_duration > 0.0))
        throw std::invalid_argument("TransportParams: sim_duration must be positive");
    if (n_bins <= 0) throw std::invalid_argument("TransportParams: n_bins must be positive");
    if (!(capture_radius_factor > 0.0))
        throw std::invalid_argument("TransportParams: capture_radius_factor must be positive");
    if (!(courant > 0.0) || !(max_dt > 0.0))
        throw std::invalid_argument("TransportParams: courant and max_dt must be positive");
}

void BacktrackParams::validate() const {
    if (!(porosity > 0.0 && porosity <= 1.0))
        throw std::invalid_argument("BacktrackParams: porosity must be in (0, 1]");
    if (n_particles <= 0)
        throw std::invalid_argument("BacktrackParams: n_particles must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("BacktrackParams: horizon must be positive");
    if (!(release_radius_factor > 0.0))
        throw std::invalid_argument("BacktrackParams: release_radius_factor must be positive");
    if (!(rk_tol > 0.0)) throw std::invalid_argument("BacktrackParams: rk_tol must be positive");
}

double RandomWalkStepper::step(Point& pos, double& t, double t_end, RngStream& rng) const {
    const Point q = flow_.darcy_at(pos.x, pos.y);
    const double vx = q.x / params_.porosity;
    const double vy = q.y / params_.porosity;
    const double speed = std::hypot(vx, vy);

    const double cell = std::min(flow_.grid.dx(), flow_.grid.dy());
    double dt = params_.max_dt;
    if (speed > 0.0) dt = std::min(dt, params_.courant * cell / speed);
    dt = std::min(dt, t_end - t);
    if (dt <= 0.0) return 0.0;

    pos.x += vx * dt;
    pos.y += vy * dt;
    if (speed > 0.0) {
        const double sig_l = std::sqrt(2.0 * params_.alpha_l * speed * dt);
        const double sig_t = std::sqrt(2.0 * params_.alpha_t * speed * dt);
        const double xi_l = rng.normal();
        const double xi_t = rng.normal();
        const double ux = vx / speed;
        const double uy = vy / speed;
        pos.x += ux * sig_l * xi_l - uy * sig_t * xi_t;
        pos.y += uy * sig_l * xi_l + ux * sig_t * xi_t;
    }
    t += dt;
    return dt;
}

BreakthroughCurve simulate_tracer(const FlowSolution& flow, const InjectionWell& injector,
                                  const TransportParams& params, RngStream& rng) {
    params.validate();
    if (!(injector.injection_duration > 0.0))
        throw std::invalid_argument("simulate_tracer: injection_duration must be positive");
    if (injector.injection_duration > params.sim_duration)
        throw std::invalid_argument("simulate_tracer: injection outlasts simulation");

    const RandomWalkStepper stepper(flow, params);
    const double bin_width = params.sim_duration / params.n_bins;
    const double capture_r =
        params.capture_radius_factor * std::min(flow.grid.dx(), flow.grid.dy());
    const double capture_r2 = capture_r * capture_r;
    const double mass_per =
        injector.mass_loading * injector.injection_duration / params.n_particles;

    BreakthroughCurve curve;
    curve.times.resize(params.n_bins);
    for (int i = 0; i < params.n_bins; ++i) curve.times[i] = (i + 0.5) * bin_width;
    curve.concentrations = Eigen::VectorXd::Zero(params.n_bins);
    curve.injected_mass = mass_per * params.n_particles;

    Eigen::VectorXd mass = Eigen::VectorXd::Zero(params.n_bins);
    for (int p = 0; p < params.n_particles; ++p) {
        Point pos{injector.x, injector.y};
        double t = (p + 0.5) / params.n_particles * injector.injection_duration;
        while (t < params.sim_duration) {
            const Point prev = pos;
            const double t_prev = t;
            const double dt = stepper.step(pos, t, params.sim_duration, rng);
            if (dt <= 0.0) break;
            if (flow.has_pumping) {
                double frac = 0.0;
                if (segment_dist2(prev, pos, flow.pump_location, frac) <= capture_r2) {
                    const double t_cap = t_prev + frac * dt;
                    int bin = static_cast<int>(t_cap / bin_width);
                    bin = std::clamp(bin, 0, params.n_bins - 1);
                    mass[bin] += mass_per;
                    curve.captured_mass += mass_per;
                    break;
                }
            }
            if (!flow.grid.contains(pos.x, pos.y)) {
                ++curve.particles_left_grid;
                break;
            }
        }
    }

    if (flow.has_pumping && flow.pump_rate != 0.0) {
        const double q = std::abs(flow.pump_rate);
        curve.concentrations = mass / (q * bin_width);
    }
    return curve;
}

ResampledCurves resample_curves(const std::vector<BreakthroughCurve>& raw, int k,
                                double duration) {
    if (k < 2) throw std::invalid_argument("resample_curves: k must be at least 2");
    if (!(duration > 0.0)) throw std::invalid_argument("resample_curves: duration must be positive");

    ResampledCurves out;
    out.times.resize(k);
    for (int j = 0; j < k; ++j) out.times[j] = duration * j / (k - 1);
    out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(raw.size()), k);
    out.was_empty.assign(raw.size(), false);

    for (size_t r = 0; r < raw.size(); ++r) {
        const BreakthroughCurve& c = raw[r];
        if (c.times.size() == 0 || c.captured_mass <= 0.0) {
            out.was_empty[r] = true;
            continue;
        }
        const Eigen::Index n = c.times.size();
        for (int j = 0; j < k; ++j) {
            const double t = out.times[j];
            if (t <= c.times[0]) {
                out.values(static_cast<Eigen::Index>(r), j) = c.concentrations[0];
            } else if (t >= c.times[n - 1]) {
                out.values(static_cast<Eigen::Index>(r), j) = c.concentrations[n - 1];
            } else {
                Eigen::Index hi = 1;
                while (c.times[hi] < t) ++hi;
                const double w = (t - c.times[hi - 1]) / (c.times[hi] - c.times[hi - 1]);
                out.values(static_cast<Eigen::Index>(r), j) =
                    (1.0 - w) * c.concentrations[hi - 1] + w * c.concentrations[hi];
            }
        }
    }
    return out;
}

namespace {

struct Vec2 {
    double x, y;
};

}  // namespace

EndpointSet backtrack_particles(const FlowSolution& flow, const BacktrackParams& params) {
    params.validate();
    if (!flow.has_pumping)
        throw std::runtime_error("backtrack_particles: flow solution has no pumping well");

    const GridSpec& grid = flow.grid;
    const double r0 = params.release_radius_factor * std::min(grid.dx(), grid.dy());

    const auto vel = [&](const Vec2& p) -> Vec2 {
        const Point q = flow.darcy_at(p.x, p.y);
        return Vec2{-q.x / params.porosity, -q.y / params.porosity};
    };

    // Cash-Karp 4(5) coefficients.
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
    static const double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27, a54 = 35.0 / 27;
    static const double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824,
                        a64 = 44275.0 / 110592, a65 = 253.0 / 4096;
    static const double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594, b6 = 512.0 / 1771;
    static const double e1 = b1 - 2825.0 / 27648, e3 = b3 - 18575.0 / 48384,
                        e4 = b4 - 13525.0 / 55296, e5 = -277.0 / 14336, e6 = b6 - 1.0 / 4;

    constexpr double kMinDt = 1e-4;
    constexpr double kStagnant = 1e-12;

    EndpointSet out;
    out.horizon = params.horizon;
    out.points.reserve(params.n_particles);

    for (int p = 0; p < params.n_particles; ++p) {
        const double ang = 2.0 * std::numbers::pi * p / params.n_particles;
        Vec2 y{flow.pump_location.x + r0 * std::cos(ang),
               flow.pump_location.y + r0 * std::sin(ang)};
        double t = 0.0;
        double dt = 0.1;
        bool clamped = false;

        while (t < params.horizon) {
            dt = std::min(dt, params.horizon - t);
            const Vec2 k1 = vel(y);
            if (std::hypot(k1.x, k1.y) < kStagnant) break;

            const Vec2 k2 = vel({y.x + dt * a21 * k1.x, y.y + dt * a21 * k1.y});
            const Vec2 k3 = vel({y.x + dt * (a31 * k1.x + a32 * k2.x),
                                 y.y + dt * (a31 * k1.y + a32 * k2.y)});
            const Vec2 k4 = vel({y.x + dt * (a41 * k1.x + a42 * k2.x + a43 * k3.x),
                                 y.y + dt * (a41 * k1.y + a42 * k2.y + a43 * k3.y)});
            const Vec2 k5 =
                vel({y.x + dt * (a51 * k1.x + a52 * k2.x + a53 * k3.x + a54 * k4.x),
                     y.y + dt * (a51 * k1.y + a52 * k2.y + a53 * k3.y + a54 * k4.y)});
            const Vec2 k6 = vel(
                {y.x + dt * (a61 * k1.x + a62 * k2.x + a63 * k3.x + a64 * k4.x + a65 * k5.x),
                 y.y + dt * (a61 * k1.y + a62 * k2.y + a63 * k3.y + a64 * k4.y + a65 * k5.y)});

            const double dxs = dt * (b1 * k1.x + b3 * k3.x + b4 * k4.x + b6 * k6.x);
            const double dys = dt * (b1 * k1.y + b3 * k3.y + b4 * k4.y + b6 * k6.y);
            const double ex = dt * (e1 * k1.x + e3 * k3.x + e4 * k4.x + e5 * k5.x + e6 * k6.x);
            const double ey = dt * (e1 * k1.y + e3 * k3.y + e4 * k4.y + e5 * k5.y + e6 * k6.y);
            const double err = std::hypot(ex, ey);

            if (err <= params.rk_tol || dt <= kMinDt) {
                Vec2 next{y.x + dxs, y.y + dys};
                if (!grid.contains(next.x, next.y)) {
                    next.x = std::clamp(next.x, 0.0, grid.x_extent);
                    next.y = std::clamp(next.y, 0.0, grid.y_extent);
                    y = next;
                    clamped = true;
                    break;
                }
                y = next;
                t += dt;
                const double grow =
                    err > 0.0 ? 0.9 * std::pow(params.rk_tol / err, 0.2) : 5.0;
                dt *= std::clamp(grow, 0.2, 5.0);
            } else {
                dt *= std::max(0.2, 0.9 * std::pow(params.rk_tol / err, 0.25));
            }
            dt = std::max(dt, kMinDt);
        }
        if (clamped) ++out.n_clamped;
        out.points.push_back(Point{y.x, y.y});
    }
    return out;
}

}  // namespace whpa
