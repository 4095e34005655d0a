#include "whpa/model_io.hpp"

#include <cstring>
#include <stdexcept>

#include "whpa/binio.hpp"

namespace whpa {

namespace {

constexpr char kMagic[8] = {'W', 'H', 'P', 'A', 'B', 'E', 'L', '1'};
constexpr std::uint32_t kVersion = 1;

void put_pca(BinaryWriter& w, const PcaBasis& p) {
    w.put_vector(p.mean);
    w.put_matrix(p.components);
    w.put_vector(p.explained);
    w.put_vector(p.spectrum);
    w.put_f64(p.total_variance);
    w.put_u32(static_cast<std::uint32_t>(p.rank));
    w.put_u8(p.truncated_to_rank ? 1 : 0);
}

PcaBasis get_pca(BinaryReader& r) {
    PcaBasis p;
    p.mean = r.get_vector();
    p.components = r.get_matrix();
    p.explained = r.get_vector();
    p.spectrum = r.get_vector();
    p.total_variance = r.get_f64();
    p.rank = static_cast<int>(r.get_u32());
    p.truncated_to_rank = r.get_u8() != 0;
    return p;
}

void put_norm(BinaryWriter& w, const NormalizerParams& n) {
    w.put_u32(static_cast<std::uint32_t>(n.dims.size()));
    for (const YeoJohnsonDim& d : n.dims) {
        w.put_f64(d.lambda);
        w.put_f64(d.mean);
        w.put_f64(d.std_dev);
        w.put_u8(d.identity ? 1 : 0);
    }
}

NormalizerParams get_norm(BinaryReader& r) {
    NormalizerParams n;
    const std::uint32_t count = r.get_u32();
    n.dims.resize(count);
    for (YeoJohnsonDim& d : n.dims) {
        d.lambda = r.get_f64();
        d.mean = r.get_f64();
        d.std_dev = r.get_f64();
        d.identity = r.get_u8() != 0;
    }
    return n;
}

}  // namespace

void save_model(const BelModel& m, std::uint64_t config_fingerprint,
                const std::string& path) {
    BinaryWriter w(path);
    w.put_bytes(kMagic, sizeof kMagic);
    w.put_u32(kVersion);
    w.put_u64(config_fingerprint);

    w.put_f64(m.sub.x_min);
    w.put_f64(m.sub.x_max);
    w.put_f64(m.sub.y_min);
    w.put_f64(m.sub.y_max);
    w.put_f64(m.sub.cell);
    w.put_u32(static_cast<std::uint32_t>(m.n_wells));
    w.put_u32(static_cast<std::uint32_t>(m.curve_len));
    w.put_f64(m.curve_duration);
    w.put_u32(static_cast<std::uint32_t>(m.well_subset.size()));
    for (int idx : m.well_subset) w.put_u32(static_cast<std::uint32_t>(idx));

    put_pca(w, m.d_pca);
    put_pca(w, m.h_pca);

    w.put_vector(m.cca.d_mean);
    w.put_vector(m.cca.h_mean);
    w.put_matrix(m.cca.d_weights);
    w.put_matrix(m.cca.h_weights);
    w.put_matrix(m.cca.h_back);
    w.put_vector(m.cca.correlations);
    w.put_u8(m.cca.regularized ? 1 : 0);

    put_norm(w, m.d_norm);
    put_norm(w, m.h_norm);

    w.put_matrix(m.terms.G);
    w.put_matrix(m.terms.noise_cov);
    w.put_vector(m.terms.noise_mean);
    w.put_vector(m.terms.hc_mean);
    w.put_matrix(m.terms.hc_cov);
    w.put_matrix(m.terms.post_cov);
    w.put_matrix(m.terms.gain);
    w.put_u8(m.terms.jittered ? 1 : 0);

    w.put_u64(static_cast<std::uint64_t>(m.prior_mask.rows()));
    w.put_u64(static_cast<std::uint64_t>(m.prior_mask.cols()));
    for (Eigen::Index i = 0; i < m.prior_mask.rows(); ++i)
        for (Eigen::Index j = 0; j < m.prior_mask.cols(); ++j)
            w.put_u8(m.prior_mask(i, j) ? 1 : 0);

    w.put_u64(m.training_fingerprint);
    w.close();
}

LoadedModel load_model(const std::string& path) {
    BinaryReader r(path);
    char magic[8];
    r.get_bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw std::runtime_error("not a model file: " + path);
    if (r.get_u32() != kVersion)
        throw std::runtime_error("unsupported model version in " + path);

    LoadedModel out;
    out.config_fingerprint = r.get_u64();
    BelModel& m = out.model;

    m.sub.x_min = r.get_f64();
    m.sub.x_max = r.get_f64();
    m.sub.y_min = r.get_f64();
    m.sub.y_max = r.get_f64();
    m.sub.cell = r.get_f64();
    m.n_wells = static_cast<int>(r.get_u32());
    m.curve_len = static_cast<int>(r.get_u32());
    m.curve_duration = r.get_f64();
    const std::uint32_t subset = r.get_u32();
    m.well_subset.resize(subset);
    for (std::uint32_t i = 0; i < subset; ++i)
        m.well_subset[i] = static_cast<int>(r.get_u32());

    m.d_pca = get_pca(r);
    m.h_pca = get_pca(r);

    m.cca.d_mean = r.get_vector();
    m.cca.h_mean = r.get_vector();
    m.cca.d_weights = r.get_matrix();
    m.cca.h_weights = r.get_matrix();
    m.cca.h_back = r.get_matrix();
    m.cca.correlations = r.get_vector();
    m.cca.regularized = r.get_u8() != 0;

    m.d_norm = get_norm(r);
    m.h_norm = get_norm(r);

    m.terms.G = r.get_matrix();
    m.terms.noise_cov = r.get_matrix();
    m.terms.noise_mean = r.get_vector();
    m.terms.hc_mean = r.get_vector();
    m.terms.hc_cov = r.get_matrix();
    m.terms.post_cov = r.get_matrix();
    m.terms.gain = r.get_matrix();
    m.terms.jittered = r.get_u8() != 0;

    const auto rows = static_cast<Eigen::Index>(r.get_u64());
    const auto cols = static_cast<Eigen::Index>(r.get_u64());
    m.prior_mask.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m.prior_mask(i, j) = r.get_u8();

    m.training_fingerprint = r.get_u64();
    m.self_fingerprint = model_fingerprint(m);
    return out;
}

}  // namespace whpa
