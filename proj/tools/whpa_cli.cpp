#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "whpa/config.hpp"
#include "whpa/dataset.hpp"
#include "whpa/design.hpp"
#include "whpa/geometry.hpp"
#include "whpa/model_io.hpp"
#include "whpa/pipeline.hpp"

using nlohmann::json;

namespace {

std::string fp_hex(std::uint64_t fp) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fp);
    return buf;
}

whpa::ScenarioConfig resolve_config(const std::string& path,
                                    std::optional<std::uint64_t> seed,
                                    std::optional<int> threads) {
    whpa::ScenarioConfig cfg =
        path.empty() ? whpa::default_config() : whpa::load_config(path);
    if (seed) cfg.master_seed = *seed;
    if (threads) cfg.threads = *threads;
    cfg.validate();
    return cfg;
}

std::vector<int> valid_indices(const whpa::DatasetFile& data) {
    std::vector<int> out;
    for (int i = 0; i < data.n_records(); ++i)
        if (data.read(i).valid) out.push_back(i);
    return out;
}

void require_fingerprint(const whpa::ScenarioConfig& cfg, const whpa::DatasetFile& data) {
    if (data.header().config_fingerprint != cfg.fingerprint())
        throw std::runtime_error("config fingerprint " + fp_hex(cfg.fingerprint()) +
                                 " does not match dataset " +
                                 fp_hex(data.header().config_fingerprint));
}

void put_f(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size())
            throw std::runtime_error(std::string(what) + ": bad integer '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::runtime_error(std::string(what) + ": empty list");
    return out;
}

json box_json(const whpa::BoxStats& b) {
    return {{"median", b.median}, {"q1", b.q1},
            {"q3", b.q3},         {"iqr", b.iqr},
            {"lo_whisker", b.lo_whisker}, {"hi_whisker", b.hi_whisker}};
}

// ---------------------------------------------------------------- generate

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<int> threads, int n, const std::string& out,
                 bool overwrite, bool quiet) {
    const whpa::ScenarioConfig cfg = resolve_config(config_path, seed, threads);
    const auto progress = [&](int done, int total) {
        if (!quiet) std::fprintf(stderr, "\rrecord %d/%d", done, total);
    };
    const whpa::GenerationSummary s =
        whpa::generate_dataset(cfg, n, out, overwrite, progress);
    if (!quiet) std::fprintf(stderr, "\n");
    json j{{"command", "generate"},
           {"path", out},
           {"config_fingerprint", fp_hex(cfg.fingerprint())},
           {"n_total", s.n_total},
           {"n_generated", s.n_generated},
           {"n_failed", s.n_failed},
           {"failed_indices", s.failed_indices},
           {"seconds", s.seconds}};
    std::cout << j.dump(2) << "\n";
    return s.n_failed == 0 ? 0 : 2;
}

// ------------------------------------------------------------------- train

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& data_path, const std::string& out,
              const std::string& wells_arg, int train_rows) {
    const whpa::ScenarioConfig cfg = resolve_config(config_path, seed, {});
    const whpa::DatasetFile data = whpa::DatasetFile::open(data_path);
    require_fingerprint(cfg, data);

    std::vector<int> wells;
    if (wells_arg.empty()) {
        wells.resize(static_cast<size_t>(data.header().n_wells));
        std::iota(wells.begin(), wells.end(), 0);
    } else {
        wells = parse_int_list(wells_arg, "--wells");
        for (size_t i = 0; i < wells.size(); ++i) {
            if (wells[i] < 0 || wells[i] >= data.header().n_wells)
                throw std::runtime_error("--wells: index " + std::to_string(wells[i]) +
                                         " outside [0, " +
                                         std::to_string(data.header().n_wells) + ")");
            if (i > 0 && wells[i] <= wells[i - 1])
                throw std::runtime_error("--wells: indices must be strictly increasing");
        }
    }

    std::vector<int> valid = valid_indices(data);
    const int n_train =
        train_rows > 0 ? train_rows : static_cast<int>(valid.size() * 8 / 10);
    if (n_train < 2 || n_train > static_cast<int>(valid.size()))
        throw std::runtime_error("training rows " + std::to_string(n_train) +
                                 " out of range; dataset has " +
                                 std::to_string(valid.size()) + " valid records");
    valid.resize(static_cast<size_t>(n_train));

    whpa::BelFitOptions opt;
    opt.d_retain = cfg.bel.d_retain();
    opt.h_retain = cfg.bel.h_retain();
    opt.sub = data.header().sub;
    opt.n_wells = static_cast<int>(wells.size());
    opt.curve_len = data.header().curve_len;
    opt.curve_duration = data.header().curve_duration;
    opt.well_subset = wells;

    const whpa::BelModel model = whpa::fit_bel(data.predictor_rows(valid, wells),
                                               data.target_rows(valid), opt);
    whpa::save_model(model, cfg.fingerprint(), out);

    json j{{"command", "train"},
           {"path", out},
           {"config_fingerprint", fp_hex(cfg.fingerprint())},
           {"model_fingerprint", fp_hex(whpa::model_fingerprint(model))},
           {"n_train", n_train},
           {"wells", wells},
           {"d_retained", model.d_pca.retained()},
           {"h_retained", model.h_pca.retained()},
           {"eta", model.cca.eta()},
           {"cca_regularized", model.cca.regularized}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

// ----------------------------------------------------------------- predict

Eigen::VectorXd read_curve_file(const std::string& path, Eigen::Index expected) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::vector<double> vals;
    std::string tok;
    while (is >> tok) {
        std::stringstream ss(tok);
        std::string piece;
        while (std::getline(ss, piece, ',')) {
            if (piece.empty()) continue;
            vals.push_back(std::stod(piece));
        }
    }
    if (static_cast<Eigen::Index>(vals.size()) != expected)
        throw std::runtime_error("curve file holds " + std::to_string(vals.size()) +
                                 " values, model expects " + std::to_string(expected));
    return Eigen::Map<Eigen::VectorXd>(vals.data(), expected);
}

int cmd_predict(const std::string& config_path, std::optional<std::uint64_t> seed,
                const std::string& model_path, const std::string& data_path,
                int record_index, const std::string& curve_file, int zeta_arg,
                const std::string& out_dir) {
    const whpa::ScenarioConfig cfg = resolve_config(config_path, seed, {});
    const whpa::LoadedModel loaded = whpa::load_model(model_path);
    if (loaded.config_fingerprint != cfg.fingerprint())
        throw std::runtime_error("model " + fp_hex(loaded.config_fingerprint) +
                                 " was trained under a different config than " +
                                 fp_hex(cfg.fingerprint()));
    const whpa::BelModel& model = loaded.model;
    const int zeta = zeta_arg > 0 ? zeta_arg : cfg.bel.zeta;

    Eigen::VectorXd d_row;
    std::optional<whpa::DatasetRecord> rec;
    if (!curve_file.empty()) {
        d_row = read_curve_file(curve_file, model.predictor_len());
    } else {
        if (record_index < 0)
            throw std::runtime_error("predict needs --record or --curve-file");
        const whpa::DatasetFile data = whpa::DatasetFile::open(data_path);
        require_fingerprint(cfg, data);
        rec = data.read(record_index);
        if (!rec->valid)
            throw std::runtime_error("record " + std::to_string(record_index) +
                                     " is marked invalid");
        d_row = rec->predictor_row(model.well_subset);
    }

    whpa::RngStream rng = whpa::RngStream::derive(
        cfg.master_seed, whpa::StreamPurpose::PosteriorSampling,
        static_cast<std::uint64_t>(record_index < 0 ? 0 : record_index));
    const whpa::PosteriorEnsemble ens = whpa::predict(model, d_row, zeta, rng);

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    {
        std::ofstream os = open_out(dir / "sd_stack.csv");
        for (const Eigen::MatrixXd& img : ens.images) {
            for (Eigen::Index i = 0; i < img.rows(); ++i)
                for (Eigen::Index j = 0; j < img.cols(); ++j) {
                    if (i + j > 0) os << ',';
                    put_f(os, img(i, j));
                }
            os << '\n';
        }
    }
    int n_empty = 0;
    {
        std::ofstream os = open_out(dir / "contours.csv");
        os << "sample,vertex,x,y\n";
        for (size_t s = 0; s < ens.contours.size(); ++s) {
            if (ens.contours[s].empty()) ++n_empty;
            for (size_t v = 0; v < ens.contours[s].size(); ++v) {
                os << s << ',' << v << ',';
                put_f(os, ens.contours[s][v].x);
                os << ',';
                put_f(os, ens.contours[s][v].y);
                os << '\n';
            }
        }
    }

    const double cell_area = model.sub.cell * model.sub.cell;
    const Eigen::MatrixXi env = whpa::envelope_mask(ens);
    json j{{"command", "predict"},
           {"zeta", zeta},
           {"config_fingerprint", fp_hex(cfg.fingerprint())},
           {"model_fingerprint", fp_hex(ens.model_fingerprint)},
           {"observation_fingerprint", fp_hex(ens.observation_fingerprint)},
           {"empty_contours", n_empty},
           {"prior_area_m2", model.prior_mask.cast<double>().sum() * cell_area},
           {"posterior_envelope_area_m2", env.cast<double>().sum() * cell_area}};

    if (rec) {
        whpa::SdImage true_sd;
        true_sd.sub = model.sub;
        true_sd.psi = rec->sd;
        const std::vector<whpa::Point> true_pts = whpa::extract_zero_contour(true_sd);
        std::ofstream os = open_out(dir / "true_contour.csv");
        os << "vertex,x,y\n";
        for (size_t v = 0; v < true_pts.size(); ++v) {
            os << v << ',';
            put_f(os, true_pts[v].x);
            os << ',';
            put_f(os, true_pts[v].y);
            os << '\n';
        }
        j["record"] = record_index;
        j["coverage"] = whpa::coverage_fraction(ens, true_pts);
    }

    {
        std::ofstream os = open_out(dir / "summary.json");
        os << j.dump(2) << "\n";
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

// ------------------------------------------------------------------ design

json design_report_json(const whpa::DesignReport& r) {
    json folds = json::array();
    for (const whpa::FoldReport& f : r.folds) {
        json wells = json::array();
        for (const whpa::BoxStats& b : f.wells) wells.push_back(box_json(b));
        folds.push_back({{"fold", f.fold_index},
                         {"n_train", f.n_train},
                         {"n_test", f.n_test},
                         {"test_indices", f.test_indices},
                         {"wells", wells}});
    }
    json pooled = json::array();
    for (const whpa::BoxStats& b : r.pooled) pooled.push_back(box_json(b));
    return {{"metric", whpa::metric_name(r.metric)},
            {"k", r.k},
            {"zeta", r.zeta},
            {"config_fingerprint", fp_hex(r.config_fingerprint)},
            {"ranking", r.ranking},
            {"well_consistent", r.well_consistent},
            {"consistent", r.consistent},
            {"pooled", pooled},
            {"folds", folds}};
}

void write_theta_csv(const std::filesystem::path& p, const whpa::DesignReport& r) {
    std::ofstream os = open_out(p);
    os << "fold,well,record,theta,theta_std\n";
    for (const whpa::FoldReport& f : r.folds)
        for (Eigen::Index w = 0; w < f.theta.rows(); ++w)
            for (Eigen::Index t = 0; t < f.theta.cols(); ++t) {
                os << f.fold_index << ',' << w << ','
                   << f.test_indices[static_cast<size_t>(t)] << ',';
                put_f(os, f.theta(w, t));
                os << ',';
                put_f(os, f.theta_std(w, t));
                os << '\n';
            }
}

int cmd_design(const std::string& config_path, std::optional<std::uint64_t> seed,
               std::optional<int> threads, const std::string& data_path, int k_arg,
               int zeta_arg, const std::string& metric_arg, const std::string& out_dir) {
    const whpa::ScenarioConfig cfg = resolve_config(config_path, seed, threads);
    const whpa::DatasetFile data = whpa::DatasetFile::open(data_path);
    require_fingerprint(cfg, data);

    const int k = k_arg > 0 ? k_arg : cfg.design.folds;
    const int zeta = zeta_arg > 0 ? zeta_arg : cfg.bel.zeta;

    std::vector<whpa::MetricKind> metrics;
    if (metric_arg == "mhd")
        metrics = {whpa::MetricKind::MHD};
    else if (metric_arg == "neg_ssim")
        metrics = {whpa::MetricKind::NegSSIM};
    else if (metric_arg == "both")
        metrics = {whpa::MetricKind::MHD, whpa::MetricKind::NegSSIM};
    else if (metric_arg.empty())
        metrics = cfg.design.metrics;
    else
        throw std::runtime_error("--metric must be mhd, neg_ssim or both");

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    json out = json::array();
    for (whpa::MetricKind m : metrics) {
        const whpa::DesignReport r = whpa::kfold_design(data, cfg, k, zeta, m);
        const std::string name = whpa::metric_name(m);
        {
            std::ofstream os = open_out(dir / ("design_" + name + ".json"));
            os << design_report_json(r).dump(2) << "\n";
        }
        write_theta_csv(dir / ("theta_" + name + ".csv"), r);
        out.push_back({{"metric", name},
                       {"ranking", r.ranking},
                       {"consistent", r.consistent}});
    }
    std::cout << json{{"command", "design"}, {"k", k}, {"zeta", zeta}, {"reports", out}}
                     .dump(2)
              << "\n";
    return 0;
}

// -------------------------------------------------------------- size-study

int cmd_size_study(const std::string& config_path, std::optional<std::uint64_t> seed,
                   std::optional<int> threads, const std::string& data_path,
                   const std::string& sizes_arg, int n_targets, int zeta_arg,
                   const std::string& out_csv) {
    const whpa::ScenarioConfig cfg = resolve_config(config_path, seed, threads);
    const whpa::DatasetFile data = whpa::DatasetFile::open(data_path);
    require_fingerprint(cfg, data);

    const std::vector<int> sizes = parse_int_list(sizes_arg, "--sizes");
    const int zeta = zeta_arg > 0 ? zeta_arg : cfg.bel.zeta;
    const whpa::SizeStudyResult r =
        whpa::training_size_study(data, cfg, sizes, n_targets, zeta);

    std::ofstream os = open_out(out_csv);
    os << "size,skipped,mean_ssim";
    for (int t : r.target_indices) os << ",record_" << t;
    os << '\n';
    json means = json::array();
    for (size_t si = 0; si < r.sizes.size(); ++si) {
        os << r.sizes[si] << ',' << (r.skipped[si] ? 1 : 0) << ',';
        const double mean =
            r.skipped[si] ? std::numeric_limits<double>::quiet_NaN()
                          : r.mean_ssim.row(static_cast<Eigen::Index>(si)).mean();
        put_f(os, mean);
        for (Eigen::Index t = 0; t < r.mean_ssim.cols(); ++t) {
            os << ',';
            put_f(os, r.mean_ssim(static_cast<Eigen::Index>(si), t));
        }
        os << '\n';
        means.push_back({{"size", r.sizes[si]},
                         {"skipped", static_cast<bool>(r.skipped[si])},
                         {"mean_ssim", mean}});
    }
    std::cout << json{{"command", "size-study"},
                      {"path", out_csv},
                      {"zeta", zeta},
                      {"targets", r.target_indices},
                      {"sizes", means}}
                     .dump(2)
              << "\n";
    return 0;
}

// ----------------------------------------------------------------- inspect

int cmd_inspect(const std::string& data_path, const std::string& config_path) {
    const whpa::DatasetFile data = whpa::DatasetFile::open(data_path);
    const whpa::DatasetHeader& h = data.header();
    json j{{"command", "inspect"},
           {"path", data_path},
           {"config_fingerprint", fp_hex(h.config_fingerprint)},
           {"master_seed", h.master_seed},
           {"n_target", h.n_target},
           {"n_records", data.n_records()},
           {"n_valid", data.n_valid()},
           {"n_wells", h.n_wells},
           {"curve_len", h.curve_len},
           {"n_endpoints", h.n_endpoints},
           {"curve_duration_d", h.curve_duration},
           {"record_bytes", h.record_bytes()},
           {"subgrid",
            {{"rows", h.sub.n_rows()}, {"cols", h.sub.n_cols()}, {"cell", h.sub.cell}}}};
    if (!config_path.empty()) {
        const whpa::ScenarioConfig cfg = resolve_config(config_path, {}, {});
        j["config_matches"] = cfg.fingerprint() == h.config_fingerprint;
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic wellhead-protection-area prediction and source design"};
    app.require_subcommand(1);

    std::string config_path, data_path, model_path, out_path, out_dir;
    std::string wells_arg, curve_file, metric_arg, sizes_arg;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    int n = 0, train_rows = 0, record_index = -1, zeta = 0, k = 0, n_targets = 20;
    bool overwrite = false, quiet = false;

    const auto add_common = [&](CLI::App* c) {
        c->add_option("--config", config_path, "scenario config JSON (default: built-in)");
        c->add_option("--seed", seed, "override the master seed");
    };

    CLI::App* g = app.add_subcommand("generate", "run forward simulations into a dataset");
    add_common(g);
    g->add_option("--n", n, "number of realizations")->required();
    g->add_option("--out", out_path, "dataset file")->required();
    g->add_option("--threads", threads, "worker count (0 = all cores)");
    g->add_flag("--overwrite", overwrite, "replace an incompatible existing file");
    g->add_flag("--quiet", quiet, "suppress progress output");

    CLI::App* t = app.add_subcommand("train", "fit a model on dataset rows");
    add_common(t);
    t->add_option("--data", data_path, "dataset file")->required();
    t->add_option("--out", out_path, "model file")->required();
    t->add_option("--wells", wells_arg, "comma-separated well subset (default: all)");
    t->add_option("--train-rows", train_rows,
                  "first N valid rows to train on (default: 80%)");

    CLI::App* p = app.add_subcommand("predict", "posterior ensemble for one observation");
    add_common(p);
    p->add_option("--model", model_path, "model file")->required();
    p->add_option("--data", data_path, "dataset file (with --record)");
    p->add_option("--record", record_index, "dataset record to predict");
    p->add_option("--curve-file", curve_file, "whitespace/comma separated curve values");
    p->add_option("--zeta", zeta, "posterior sample count (default: config)");
    p->add_option("--out-dir", out_dir, "output directory")->required();

    CLI::App* d = app.add_subcommand("design", "k-fold injection-well ranking");
    add_common(d);
    d->add_option("--data", data_path, "dataset file")->required();
    d->add_option("--k", k, "fold count (default: config)");
    d->add_option("--zeta", zeta, "posterior sample count (default: config)");
    d->add_option("--metric", metric_arg, "mhd | neg_ssim | both (default: config)");
    d->add_option("--threads", threads, "worker count (0 = all cores)");
    d->add_option("--out-dir", out_dir, "output directory")->required();

    CLI::App* s = app.add_subcommand("size-study", "prediction quality vs training size");
    add_common(s);
    s->add_option("--data", data_path, "dataset file")->required();
    s->add_option("--sizes", sizes_arg, "comma-separated training sizes")->required();
    s->add_option("--targets", n_targets, "held-out target count (default: 20)");
    s->add_option("--zeta", zeta, "posterior sample count (default: config)");
    s->add_option("--threads", threads, "worker count (0 = all cores)");
    s->add_option("--out", out_path, "output CSV")->required();

    CLI::App* i = app.add_subcommand("inspect", "print dataset header and validity");
    i->add_option("--data", data_path, "dataset file")->required();
    i->add_option("--config", config_path, "config to check the fingerprint against");

    std::string active = "parse";
    try {
        app.parse(argc, argv);
        if (g->parsed()) {
            active = "generate";
            return cmd_generate(config_path, seed, threads, n, out_path, overwrite, quiet);
        }
        if (t->parsed()) {
            active = "train";
            return cmd_train(config_path, seed, data_path, out_path, wells_arg, train_rows);
        }
        if (p->parsed()) {
            active = "predict";
            return cmd_predict(config_path, seed, model_path, data_path, record_index,
                               curve_file, zeta, out_dir);
        }
        if (d->parsed()) {
            active = "design";
            return cmd_design(config_path, seed, threads, data_path, k, zeta, metric_arg,
                              out_dir);
        }
        if (s->parsed()) {
            active = "size-study";
            return cmd_size_study(config_path, seed, threads, data_path, sizes_arg,
                                  n_targets, zeta, out_path);
        }
        active = "inspect";
        return cmd_inspect(data_path, config_path);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << json{{"command", active}, {"error", e.what()}}.dump() << "\n";
        return e.get_exit_code();
    } catch (const std::exception& e) {
        std::cerr << json{{"command", active}, {"error", e.what()}}.dump() << "\n";
        return 1;
    }
}
