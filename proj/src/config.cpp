#include "whpa/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <set>
#include <stdexcept>

#include "whpa/hash.hpp"

namespace whpa {

using nlohmann::json;

namespace {

json grid_json(const GridSpec& g) {
    return {{"x_extent", g.x_extent},
            {"y_extent", g.y_extent},
            {"n_rows", g.n_rows},
            {"n_cols", g.n_cols}};
}

json prior_json(const PriorSpec& p) {
    return {{"log10k_mean_bounds", {p.log10k_mean_bounds.first, p.log10k_mean_bounds.second}},
            {"log10k_std", p.log10k_std},
            {"well_k_bounds", {p.well_k_bounds.first, p.well_k_bounds.second}},
            {"variogram",
             {{"structure", "spherical"},
              {"range_min", p.variogram.range_min},
              {"range_max", p.variogram.range_max},
              {"nugget", p.variogram.nugget},
              {"sill", p.variogram.sill}}}};
}

json wells_json(const WellLayout& w) {
    json injectors = json::array();
    for (const InjectionWell& iw : w.injectors)
        injectors.push_back({{"x", iw.x},
                             {"y", iw.y},
                             {"rate", iw.rate},
                             {"mass_loading", iw.mass_loading},
                             {"injection_duration", iw.injection_duration}});
    return {{"pumping", {{"x", w.pumping.x}, {"y", w.pumping.y}, {"rate", w.pumping.rate}}},
            {"injectors", injectors}};
}

json full_json(const ScenarioConfig& c) {
    json metrics = json::array();
    for (MetricKind m : c.design.metrics) metrics.push_back(metric_name(m));
    return {{"grid", grid_json(c.grid)},
            {"prior", prior_json(c.prior)},
            {"wells", wells_json(c.wells)},
            {"flow",
             {{"west_head", c.flow.west_head},
              {"east_head", c.flow.east_head},
              {"thickness", c.flow.thickness}}},
            {"transport",
             {{"porosity", c.transport.porosity},
              {"alpha_l", c.transport.alpha_l},
              {"alpha_t", c.transport.alpha_t},
              {"n_particles", c.transport.n_particles},
              {"sim_duration", c.transport.sim_duration},
              {"n_bins", c.transport.n_bins},
              {"capture_radius_factor", c.transport.capture_radius_factor},
              {"courant", c.transport.courant},
              {"max_dt", c.transport.max_dt}}},
            {"backtrack",
             {{"porosity", c.backtrack.porosity},
              {"n_particles", c.backtrack.n_particles},
              {"horizon", c.backtrack.horizon},
              {"release_radius_factor", c.backtrack.release_radius_factor},
              {"rk_tol", c.backtrack.rk_tol}}},
            {"subgrid",
             {{"x_min", c.sub.x_min},
              {"x_max", c.sub.x_max},
              {"y_min", c.sub.y_min},
              {"y_max", c.sub.y_max},
              {"cell", c.sub.cell}}},
            {"bel",
             {{"curve_samples", c.bel.curve_samples},
              {"d_components", c.bel.d_components},
              {"h_components", c.bel.h_components},
              {"zeta", c.bel.zeta},
              {"d_variance_target", c.bel.d_variance_target},
              {"h_variance_target", c.bel.h_variance_target}}},
            {"design", {{"folds", c.design.folds}, {"metrics", metrics}}},
            {"master_seed", c.master_seed},
            {"threads", c.threads}};
}

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
}

template <typename T>
void maybe(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

void maybe_pair(const json& j, const char* key, std::pair<double, double>& into) {
    if (!j.contains(key)) return;
    const auto& arr = j.at(key);
    if (!arr.is_array() || arr.size() != 2)
        throw std::invalid_argument(std::string("config: \"") + key +
                                    "\" must be a [lo, hi] pair");
    into = {arr[0].get<double>(), arr[1].get<double>()};
}

MetricKind metric_from_name(const std::string& s) {
    if (s == "mhd") return MetricKind::MHD;
    if (s == "neg_ssim") return MetricKind::NegSSIM;
    throw std::invalid_argument("config: unknown metric \"" + s + "\"");
}

void overlay(ScenarioConfig& c, const json& j) {
    expect_keys(j,
                {"grid", "prior", "wells", "flow", "transport", "backtrack", "subgrid",
                 "bel", "design", "master_seed", "threads"},
                "top level");

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        expect_keys(g, {"x_extent", "y_extent", "n_rows", "n_cols"}, "grid");
        maybe(g, "x_extent", c.grid.x_extent);
        maybe(g, "y_extent", c.grid.y_extent);
        maybe(g, "n_rows", c.grid.n_rows);
        maybe(g, "n_cols", c.grid.n_cols);
    }
    if (j.contains("prior")) {
        const json& p = j.at("prior");
        expect_keys(p, {"log10k_mean_bounds", "log10k_std", "well_k_bounds", "variogram"},
                    "prior");
        maybe_pair(p, "log10k_mean_bounds", c.prior.log10k_mean_bounds);
        maybe(p, "log10k_std", c.prior.log10k_std);
        maybe_pair(p, "well_k_bounds", c.prior.well_k_bounds);
        if (p.contains("variogram")) {
            const json& v = p.at("variogram");
            expect_keys(v, {"structure", "range_min", "range_max", "nugget", "sill"},
                        "prior.variogram");
            if (v.contains("structure") && v.at("structure") != "spherical")
                throw std::invalid_argument("config: only the spherical variogram is supported");
            maybe(v, "range_min", c.prior.variogram.range_min);
            maybe(v, "range_max", c.prior.variogram.range_max);
            maybe(v, "nugget", c.prior.variogram.nugget);
            maybe(v, "sill", c.prior.variogram.sill);
        }
    }
    if (j.contains("wells")) {
        const json& w = j.at("wells");
        expect_keys(w, {"pumping", "injectors"}, "wells");
        if (w.contains("pumping")) {
            const json& pw = w.at("pumping");
            expect_keys(pw, {"x", "y", "rate"}, "wells.pumping");
            maybe(pw, "x", c.wells.pumping.x);
            maybe(pw, "y", c.wells.pumping.y);
            maybe(pw, "rate", c.wells.pumping.rate);
        }
        if (w.contains("injectors")) {
            c.wells.injectors.clear();
            for (const json& ij : w.at("injectors")) {
                expect_keys(ij, {"x", "y", "rate", "mass_loading", "injection_duration"},
                            "wells.injectors[]");
                InjectionWell iw;
                maybe(ij, "x", iw.x);
                maybe(ij, "y", iw.y);
                maybe(ij, "rate", iw.rate);
                maybe(ij, "mass_loading", iw.mass_loading);
                maybe(ij, "injection_duration", iw.injection_duration);
                c.wells.injectors.push_back(iw);
            }
        }
    }
    if (j.contains("flow")) {
        const json& f = j.at("flow");
        expect_keys(f, {"west_head", "east_head", "thickness"}, "flow");
        maybe(f, "west_head", c.flow.west_head);
        maybe(f, "east_head", c.flow.east_head);
        maybe(f, "thickness", c.flow.thickness);
    }
    if (j.contains("transport")) {
        const json& t = j.at("transport");
        expect_keys(t,
                    {"porosity", "alpha_l", "alpha_t", "n_particles", "sim_duration",
                     "n_bins", "capture_radius_factor", "courant", "max_dt"},
                    "transport");
        maybe(t, "porosity", c.transport.porosity);
        maybe(t, "alpha_l", c.transport.alpha_l);
        maybe(t, "alpha_t", c.transport.alpha_t);
        maybe(t, "n_particles", c.transport.n_particles);
        maybe(t, "sim_duration", c.transport.sim_duration);
        maybe(t, "n_bins", c.transport.n_bins);
        maybe(t, "capture_radius_factor", c.transport.capture_radius_factor);
        maybe(t, "courant", c.transport.courant);
        maybe(t, "max_dt", c.transport.max_dt);
    }
    if (j.contains("backtrack")) {
        const json& b = j.at("backtrack");
        expect_keys(b, {"porosity", "n_particles", "horizon", "release_radius_factor", "rk_tol"},
                    "backtrack");
        maybe(b, "porosity", c.backtrack.porosity);
        maybe(b, "n_particles", c.backtrack.n_particles);
        maybe(b, "horizon", c.backtrack.horizon);
        maybe(b, "release_radius_factor", c.backtrack.release_radius_factor);
        maybe(b, "rk_tol", c.backtrack.rk_tol);
    }
    if (j.contains("subgrid")) {
        const json& s = j.at("subgrid");
        expect_keys(s, {"x_min", "x_max", "y_min", "y_max", "cell"}, "subgrid");
        maybe(s, "x_min", c.sub.x_min);
        maybe(s, "x_max", c.sub.x_max);
        maybe(s, "y_min", c.sub.y_min);
        maybe(s, "y_max", c.sub.y_max);
        maybe(s, "cell", c.sub.cell);
    }
    if (j.contains("bel")) {
        const json& b = j.at("bel");
        expect_keys(b,
                    {"curve_samples", "d_components", "h_components", "zeta",
                     "d_variance_target", "h_variance_target"},
                    "bel");
        maybe(b, "curve_samples", c.bel.curve_samples);
        maybe(b, "d_components", c.bel.d_components);
        maybe(b, "h_components", c.bel.h_components);
        maybe(b, "zeta", c.bel.zeta);
        maybe(b, "d_variance_target", c.bel.d_variance_target);
        maybe(b, "h_variance_target", c.bel.h_variance_target);
    }
    if (j.contains("design")) {
        const json& d = j.at("design");
        expect_keys(d, {"folds", "metrics"}, "design");
        maybe(d, "folds", c.design.folds);
        if (d.contains("metrics")) {
            c.design.metrics.clear();
            for (const json& m : d.at("metrics"))
                c.design.metrics.push_back(metric_from_name(m.get<std::string>()));
        }
    }
    maybe(j, "master_seed", c.master_seed);
    maybe(j, "threads", c.threads);
}

}  // namespace

void ScenarioConfig::validate() const {
    grid.validate();
    prior.validate();
    wells.validate(grid);
    flow.validate();
    transport.validate();
    backtrack.validate();
    sub.validate();
    if (sub.x_min < 0.0 || sub.x_max > grid.x_extent || sub.y_min < 0.0 ||
        sub.y_max > grid.y_extent)
        throw std::invalid_argument("config: subgrid must lie inside the flow grid");
    if (bel.curve_samples < 2)
        throw std::invalid_argument("config: bel.curve_samples must be >= 2");
    if (bel.d_components < 1 || bel.h_components < 1)
        throw std::invalid_argument("config: PCA component counts must be >= 1");
    if (bel.zeta < 2) throw std::invalid_argument("config: bel.zeta must be >= 2");
    if (bel.d_variance_target < 0.0 || bel.d_variance_target > 1.0 ||
        bel.h_variance_target < 0.0 || bel.h_variance_target > 1.0)
        throw std::invalid_argument("config: variance targets must be in [0, 1]");
    if (design.folds < 2) throw std::invalid_argument("config: design.folds must be >= 2");
    if (design.metrics.empty())
        throw std::invalid_argument("config: design.metrics must not be empty");
    if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
    if (wells.injectors.empty())
        throw std::invalid_argument("config: at least one injection well is required");
}

std::uint64_t ScenarioConfig::fingerprint() const {
    // threads is a runtime knob with no effect on results; hashing it would
    // make artifacts produced with --threads overrides reject each other.
    ScenarioConfig canon = *this;
    canon.threads = 0;
    const std::string text = config_to_json(canon);
    return fnv1a64(text.data(), text.size());
}

ScenarioConfig default_config() {
    ScenarioConfig c;
    const double cx = c.wells.pumping.x;
    const double cy = c.wells.pumping.y;
    const double r = 50.0;
    // Injectors 1-3 upstream (west) of the pumping well, 4-6 downstream.
    const double angles_deg[6] = {180.0, 150.0, 210.0, 0.0, 30.0, 330.0};
    c.wells.injectors.clear();
    for (double deg : angles_deg) {
        const double a = deg * std::numbers::pi / 180.0;
        InjectionWell iw;
        iw.x = cx + r * std::cos(a);
        iw.y = cy + r * std::sin(a);
        c.wells.injectors.push_back(iw);
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    ScenarioConfig c = default_config();
    overlay(c, j);
    c.validate();
    return c;
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config: " + path);
    out << config_to_json(cfg) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string config_to_json(const ScenarioConfig& cfg) { return full_json(cfg).dump(2); }

}  // namespace whpa
