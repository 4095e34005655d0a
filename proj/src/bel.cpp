#include "whpa/bel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "whpa/hash.hpp"

namespace whpa {

namespace {

constexpr double kRankTol = 1e-7;  ///< relative singular-value cutoff

/// SPD inverse with escalating diagonal jitter (starting at 1e-10 x trace).
Eigen::MatrixXd inv_spd(Eigen::MatrixXd m, bool& jittered) {
    const int n = static_cast<int>(m.rows());
    const double base = std::max(m.trace(), 1e-300);
    double jitter = 1e-10 * base;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() == Eigen::Success)
            return llt.solve(Eigen::MatrixXd::Identity(n, n));
        m.diagonal().array() += jitter;
        jitter *= 100.0;
        jittered = true;
    }
    throw std::runtime_error("inv_spd: matrix not positive definite after jitter");
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void hash_matrix(uint64_t& h, const Eigen::MatrixXd& m) {
    const uint64_t r = static_cast<uint64_t>(m.rows());
    const uint64_t c = static_cast<uint64_t>(m.cols());
    h = fnv1a64(&r, sizeof r, h);
    h = fnv1a64(&c, sizeof c, h);
    h = fnv1a64(m.data(), sizeof(double) * m.size(), h);
}

void hash_vector(uint64_t& h, const Eigen::VectorXd& v) {
    const uint64_t n = static_cast<uint64_t>(v.size());
    h = fnv1a64(&n, sizeof n, h);
    h = fnv1a64(v.data(), sizeof(double) * v.size(), h);
}

}  // namespace

Eigen::MatrixXd PcaBasis::project(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != mean.size())
        throw std::invalid_argument("PcaBasis::project: dimension mismatch");
    return (rows.rowwise() - mean.transpose()) * components.transpose();
}

Eigen::MatrixXd PcaBasis::reconstruct(const Eigen::MatrixXd& scores) const {
    if (scores.cols() != components.rows())
        throw std::invalid_argument("PcaBasis::reconstruct: dimension mismatch");
    return (scores * components).rowwise() + mean.transpose();
}

PcaBasis fit_pca(const Eigen::MatrixXd& rows, const PcaRetain& retain) {
    const int n = static_cast<int>(rows.rows());
    const int p = static_cast<int>(rows.cols());
    if (n < 2) throw std::invalid_argument("fit_pca: need at least 2 rows");

    PcaBasis out;
    out.mean = rows.colwise().mean();
    const Eigen::MatrixXd xc = rows.rowwise() - out.mean.transpose();

    // Eigendecompose the smaller Gram matrix; eigenvalues are squared
    // singular values of xc.
    Eigen::VectorXd eig;
    Eigen::MatrixXd vecs;  // columns, ascending order from Eigen
    const bool by_rows = n <= p;
    {
        const Eigen::MatrixXd gram = by_rows ? Eigen::MatrixXd(xc * xc.transpose())
                                             : Eigen::MatrixXd(xc.transpose() * xc);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(gram));
        if (es.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigensolver failed");
        eig = es.eigenvalues();
        vecs = es.eigenvectors();
    }

    // Gram eigenvalues are squared singular values; divide by n so the
    // spectrum is the population-covariance one in both orientations.
    const int m = static_cast<int>(eig.size());
    out.total_variance = std::max(eig.sum(), 0.0) / n;
    const double s_max = std::sqrt(std::max(eig[m - 1], 0.0));
    out.rank = 0;
    out.spectrum.resize(m);
    for (int i = 0; i < m; ++i) {
        const double lam = std::max(eig[m - 1 - i], 0.0);
        out.spectrum[i] = lam / n;
        if (std::sqrt(lam) > kRankTol * s_max && lam > 0.0) ++out.rank;
    }
    out.spectrum.conservativeResize(out.rank > 0 ? out.rank : 1);

    int want = 0;
    if (retain.mode == PcaRetain::Mode::Count) {
        if (retain.count < 1) throw std::invalid_argument("fit_pca: retain count must be >= 1");
        want = retain.count;
    } else {
        if (!(retain.fraction > 0.0 && retain.fraction <= 1.0))
            throw std::invalid_argument("fit_pca: retain fraction must be in (0, 1]");
        want = min_components_for(out.spectrum, retain.fraction);
    }
    const int r = std::min(want, out.rank);
    out.truncated_to_rank = want > out.rank;

    out.components.resize(r, p);
    out.explained.resize(r);
    for (int i = 0; i < r; ++i) {
        const int src = m - 1 - i;
        const double s = std::sqrt(std::max(eig[src], 0.0));
        if (by_rows)
            out.components.row(i) = (xc.transpose() * vecs.col(src)).transpose() / s;
        else
            out.components.row(i) = vecs.col(src).transpose();
        out.explained[i] = out.total_variance > 0.0 ? eig[src] / (n * out.total_variance) : 0.0;
    }
    return out;
}

int min_components_for(const Eigen::VectorXd& spectrum, double fraction) {
    const double total = spectrum.sum();
    if (total <= 0.0) return 1;
    double acc = 0.0;
    for (int i = 0; i < spectrum.size(); ++i) {
        acc += spectrum[i];
        if (acc / total >= fraction) return i + 1;
    }
    return static_cast<int>(spectrum.size());
}

Eigen::MatrixXd CcaModel::project_d(const Eigen::MatrixXd& rows) const {
    return (rows.rowwise() - d_mean.transpose()) * d_weights;
}

Eigen::MatrixXd CcaModel::project_h(const Eigen::MatrixXd& rows) const {
    return (rows.rowwise() - h_mean.transpose()) * h_weights;
}

Eigen::MatrixXd CcaModel::backproject_h(const Eigen::MatrixXd& variates) const {
    return (variates * h_back).rowwise() + h_mean.transpose();
}

CcaModel fit_cca(const Eigen::MatrixXd& d_scores, const Eigen::MatrixXd& h_scores) {
    const int n = static_cast<int>(d_scores.rows());
    const int delta = static_cast<int>(d_scores.cols());
    const int v = static_cast<int>(h_scores.cols());
    if (h_scores.rows() != n) throw std::invalid_argument("fit_cca: row count mismatch");
    if (n <= std::max(delta, v))
        throw std::invalid_argument("fit_cca: need more rows than max(delta, v)");

    CcaModel out;
    out.d_mean = d_scores.colwise().mean();
    out.h_mean = h_scores.colwise().mean();
    const Eigen::MatrixXd dc = d_scores.rowwise() - out.d_mean.transpose();
    const Eigen::MatrixXd hc = h_scores.rowwise() - out.h_mean.transpose();

    Eigen::MatrixXd sdd = dc.transpose() * dc / n;
    Eigen::MatrixXd shh = hc.transpose() * hc / n;
    const Eigen::MatrixXd sdh = dc.transpose() * hc / n;

    const auto chol = [&out](Eigen::MatrixXd& s) {
        Eigen::LLT<Eigen::MatrixXd> llt(s);
        if (llt.info() == Eigen::Success) return llt;
        s.diagonal().array() += 1e-8 * s.trace();
        out.regularized = true;
        llt.compute(s);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("fit_cca: covariance not positive definite");
        return llt;
    };
    const Eigen::LLT<Eigen::MatrixXd> llt_d = chol(sdd);
    const Eigen::LLT<Eigen::MatrixXd> llt_h = chol(shh);
    const Eigen::MatrixXd ld = llt_d.matrixL();
    const Eigen::MatrixXd lh = llt_h.matrixL();

    // Whitened cross-covariance Ld^-1 Sdh Lh^-T, then its SVD.
    Eigen::MatrixXd m = ld.triangularView<Eigen::Lower>().solve(sdh);
    m = lh.triangularView<Eigen::Lower>().solve(m.transpose()).transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);

    const int eta = std::min(delta, v);
    out.correlations = svd.singularValues().head(eta).cwiseMin(1.0).cwiseMax(0.0);
    out.d_weights = ld.transpose().triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd(svd.matrixU().leftCols(eta)));
    out.h_weights = lh.transpose().triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd(svd.matrixV().leftCols(eta)));

    // Pseudo-inverse of the target-side weights for back-projection.
    Eigen::BDCSVD<Eigen::MatrixXd> wsvd(out.h_weights,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = wsvd.singularValues();
    Eigen::VectorXd inv_sv = Eigen::VectorXd::Zero(sv.size());
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > sv[0] * 1e-12) inv_sv[i] = 1.0 / sv[i];
    out.h_back = wsvd.matrixV() * inv_sv.asDiagonal() * wsvd.matrixU().transpose();
    return out;
}

double yj_apply(double x, double lambda) {
    if (x >= 0.0) {
        if (std::abs(lambda) < 1e-10) return std::log1p(x);
        return std::expm1(lambda * std::log1p(x)) / lambda;
    }
    const double two_l = 2.0 - lambda;
    if (std::abs(two_l) < 1e-10) return -std::log1p(-x);
    return -std::expm1(two_l * std::log1p(-x)) / two_l;
}

double yj_invert(double y, double lambda) {
    if (y >= 0.0) {
        if (std::abs(lambda) < 1e-10) return std::expm1(y);
        const double base = std::max(1.0 + lambda * y, 1e-12);
        return std::expm1(std::log(base) / lambda);
    }
    const double two_l = 2.0 - lambda;
    if (std::abs(two_l) < 1e-10) return -std::expm1(-y);
    const double base = std::max(1.0 - two_l * y, 1e-12);
    return -std::expm1(std::log(base) / two_l);
}

namespace {

/// Profile log-likelihood of the Yeo-Johnson parameter (constants dropped).
double yj_loglik(const Eigen::VectorXd& col, double lambda, double log_jacobian_sum) {
    const Eigen::Index n = col.size();
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = yj_apply(col[i], lambda);
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / static_cast<double>(n);
    if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
    return -0.5 * static_cast<double>(n) * std::log(var) + (lambda - 1.0) * log_jacobian_sum;
}

}  // namespace

YeoJohnsonDim fit_yeo_johnson(const Eigen::VectorXd& column) {
    YeoJohnsonDim out;
    const Eigen::Index n = column.size();
    if (n < 2) throw std::invalid_argument("fit_yeo_johnson: need at least 2 values");
    if (!column.allFinite()) throw std::invalid_argument("fit_yeo_johnson: non-finite input");

    if (column.maxCoeff() == column.minCoeff()) {
        out.identity = true;
        return out;
    }

    double jac = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        jac += (column[i] >= 0.0 ? 1.0 : -1.0) * std::log1p(std::abs(column[i]));

    constexpr double kLo = -5.0, kHi = 5.0;
    constexpr int kGrid = 101;
    int best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < kGrid; ++g) {
        const double lam = kLo + (kHi - kLo) * g / (kGrid - 1);
        const double ll = yj_loglik(column, lam, jac);
        if (ll > best_ll) {
            best_ll = ll;
            best = g;
        }
    }
    double lo = kLo + (kHi - kLo) * std::max(best - 1, 0) / (kGrid - 1);
    double hi = kLo + (kHi - kLo) * std::min(best + 1, kGrid - 1) / (kGrid - 1);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - gr * (hi - lo);
    double b = lo + gr * (hi - lo);
    double fa = yj_loglik(column, a, jac);
    double fb = yj_loglik(column, b, jac);
    for (int it = 0; it < 80 && hi - lo > 1e-11; ++it) {
        if (fa > fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = yj_loglik(column, a, jac);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = yj_loglik(column, b, jac);
        }
    }
    out.lambda = 0.5 * (lo + hi);

    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = yj_apply(column[i], out.lambda);
    out.mean = y.mean();
    out.std_dev = std::sqrt((y.array() - out.mean).square().sum() / static_cast<double>(n));
    if (!(out.std_dev > 0.0)) {
        out = YeoJohnsonDim{};
        out.identity = true;
    }
    return out;
}

Eigen::MatrixXd NormalizerParams::apply(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != static_cast<Eigen::Index>(dims.size()))
        throw std::invalid_argument("NormalizerParams::apply: dimension mismatch");
    Eigen::MatrixXd out(rows.rows(), rows.cols());
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        const YeoJohnsonDim& d = dims[static_cast<size_t>(j)];
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            out(i, j) = d.identity
                            ? rows(i, j)
                            : (yj_apply(rows(i, j), d.lambda) - d.mean) / d.std_dev;
        }
    }
    return out;
}

Eigen::MatrixXd NormalizerParams::invert(const Eigen::MatrixXd& rows) const {
    if (rows.cols() != static_cast<Eigen::Index>(dims.size()))
        throw std::invalid_argument("NormalizerParams::invert: dimension mismatch");
    Eigen::MatrixXd out(rows.rows(), rows.cols());
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        const YeoJohnsonDim& d = dims[static_cast<size_t>(j)];
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            out(i, j) = d.identity ? rows(i, j)
                                   : yj_invert(rows(i, j) * d.std_dev + d.mean, d.lambda);
        }
    }
    return out;
}

NormalizerParams normalize_fit(const Eigen::MatrixXd& variates) {
    NormalizerParams out;
    out.dims.reserve(static_cast<size_t>(variates.cols()));
    for (Eigen::Index j = 0; j < variates.cols(); ++j)
        out.dims.push_back(fit_yeo_johnson(variates.col(j)));
    return out;
}

PosteriorTerms fit_posterior_terms(const Eigen::MatrixXd& hc_norm,
                                   const Eigen::MatrixXd& dc_norm) {
    const int n = static_cast<int>(hc_norm.rows());
    const int eta = static_cast<int>(hc_norm.cols());
    if (dc_norm.rows() != n || dc_norm.cols() != eta)
        throw std::invalid_argument("fit_posterior_terms: shape mismatch");
    if (n <= eta) throw std::invalid_argument("fit_posterior_terms: need n > eta");

    PosteriorTerms out;
    out.G = hc_norm.colPivHouseholderQr().solve(dc_norm).transpose();

    // Residuals of G h^c = d^c + eps, i.e. eps = G h^c - d^c.
    const Eigen::MatrixXd resid = hc_norm * out.G.transpose() - dc_norm;
    out.noise_mean = resid.colwise().mean();
    const Eigen::MatrixXd rc = resid.rowwise() - out.noise_mean.transpose();
    out.noise_cov = symmetrized(rc.transpose() * rc / n);

    out.hc_mean = hc_norm.colwise().mean();
    const Eigen::MatrixXd hcn = hc_norm.rowwise() - out.hc_mean.transpose();
    out.hc_cov = symmetrized(hcn.transpose() * hcn / n);

    const Eigen::MatrixXd noise_inv = inv_spd(out.noise_cov, out.jittered);
    const Eigen::MatrixXd h_inv = inv_spd(out.hc_cov, out.jittered);
    const Eigen::MatrixXd lambda11 =
        symmetrized(h_inv + out.G.transpose() * noise_inv * out.G);
    out.post_cov = symmetrized(inv_spd(lambda11, out.jittered));
    out.gain = out.post_cov * out.G.transpose() * noise_inv;
    return out;
}

void condition(const BelModel& model, const Eigen::VectorXd& d_obs_norm,
               Eigen::VectorXd& mu_post, Eigen::MatrixXd& sigma_post) {
    const PosteriorTerms& t = model.terms;
    if (d_obs_norm.size() != t.G.rows())
        throw std::invalid_argument("condition: observation dimension mismatch");
    if (!d_obs_norm.allFinite())
        throw std::invalid_argument("condition: non-finite observation");
    mu_post = t.hc_mean + t.gain * (d_obs_norm - t.G * t.hc_mean + t.noise_mean);
    sigma_post = t.post_cov;
}

Eigen::MatrixXd sample_posterior(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                 int zeta, RngStream& rng) {
    const int eta = static_cast<int>(mu.size());
    if (sigma.rows() != eta || sigma.cols() != eta)
        throw std::invalid_argument("sample_posterior: shape mismatch");
    if (zeta < 1) throw std::invalid_argument("sample_posterior: zeta must be >= 1");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(sigma));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("sample_posterior: eigensolver failed");
    const double trace = std::max(sigma.trace(), 0.0);
    if (es.eigenvalues().minCoeff() < -1e-8 * std::max(trace, 1e-12))
        throw std::invalid_argument("sample_posterior: covariance has negative eigenvalues");

    const Eigen::MatrixXd l =
        es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    Eigen::MatrixXd samples(zeta, eta);
    Eigen::VectorXd z(eta);
    for (int s = 0; s < zeta; ++s) {
        for (int j = 0; j < eta; ++j) z[j] = rng.normal();
        samples.row(s) = (mu + l * z).transpose();
    }
    return samples;
}

BelModel fit_bel(const Eigen::MatrixXd& d_rows, const Eigen::MatrixXd& h_rows,
                 const BelFitOptions& opt, const PcaBasis* shared_h_pca) {
    if (d_rows.rows() != h_rows.rows())
        throw std::invalid_argument("fit_bel: predictor/target row count mismatch");
    opt.sub.validate();
    const int nr = opt.sub.n_rows();
    const int nc = opt.sub.n_cols();
    if (h_rows.cols() != static_cast<Eigen::Index>(nr) * nc)
        throw std::invalid_argument("fit_bel: target width does not match subgrid");
    if (opt.n_wells < 1 || opt.curve_len < 1 ||
        d_rows.cols() != static_cast<Eigen::Index>(opt.n_wells) * opt.curve_len)
        throw std::invalid_argument("fit_bel: predictor width does not match n_wells x k");

    BelModel m;
    m.sub = opt.sub;
    m.n_wells = opt.n_wells;
    m.curve_len = opt.curve_len;
    m.curve_duration = opt.curve_duration;
    m.well_subset = opt.well_subset;

    m.d_pca = fit_pca(d_rows, opt.d_retain);
    if (shared_h_pca) {
        if (shared_h_pca->mean.size() != h_rows.cols())
            throw std::invalid_argument("fit_bel: shared target basis width mismatch");
        m.h_pca = *shared_h_pca;
    } else {
        m.h_pca = fit_pca(h_rows, opt.h_retain);
    }
    const Eigen::MatrixXd ds = m.d_pca.project(d_rows);
    const Eigen::MatrixXd hs = m.h_pca.project(h_rows);
    m.cca = fit_cca(ds, hs);
    const Eigen::MatrixXd dc = m.cca.project_d(ds);
    const Eigen::MatrixXd hc = m.cca.project_h(hs);
    m.d_norm = normalize_fit(dc);
    m.h_norm = normalize_fit(hc);
    m.terms = fit_posterior_terms(m.h_norm.apply(hc), m.d_norm.apply(dc));

    m.prior_mask = Eigen::MatrixXi::Zero(nr, nc);
    for (Eigen::Index r = 0; r < h_rows.rows(); ++r)
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nc; ++j)
                if (h_rows(r, static_cast<Eigen::Index>(i) * nc + j) > 0.0)
                    m.prior_mask(i, j) = 1;

    uint64_t fp = kFnvOffset;
    hash_matrix(fp, d_rows);
    hash_matrix(fp, h_rows);
    m.training_fingerprint = fp;
    m.self_fingerprint = model_fingerprint(m);
    return m;
}

PosteriorEnsemble backtransform(const BelModel& model, const Eigen::MatrixXd& samples_c) {
    const int zeta = static_cast<int>(samples_c.rows());
    if (zeta < 1) throw std::invalid_argument("backtransform: empty sample set");

    const Eigen::MatrixXd variates = model.h_norm.invert(samples_c);
    const Eigen::MatrixXd h_pc = model.cca.backproject_h(variates);
    const Eigen::MatrixXd flat = model.h_pca.reconstruct(h_pc);

    const int nr = model.sub.n_rows();
    const int nc = model.sub.n_cols();

    PosteriorEnsemble out;
    out.sub = model.sub;
    out.images.reserve(zeta);
    out.contours.reserve(zeta);
    SdImage sd;
    sd.sub = model.sub;
    for (int s = 0; s < zeta; ++s) {
        Eigen::MatrixXd img(nr, nc);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nc; ++j) img(i, j) = flat(s, static_cast<Eigen::Index>(i) * nc + j);
        sd.psi = img;
        out.contours.push_back(extract_zero_contour(sd));
        out.images.push_back(std::move(img));
    }
    out.model_fingerprint = model_fingerprint(model);
    return out;
}

Eigen::VectorXd project_observation(const BelModel& model, const Eigen::VectorXd& d_row) {
    if (d_row.size() != model.predictor_len())
        throw std::invalid_argument(
            "project_observation: expected length " + std::to_string(model.predictor_len()) +
            ", got " + std::to_string(d_row.size()));
    const Eigen::MatrixXd score = model.d_pca.project(d_row.transpose());
    const Eigen::MatrixXd dc = model.cca.project_d(score);
    return model.d_norm.apply(dc).row(0);
}

Eigen::VectorXd project_target(const BelModel& model, const Eigen::VectorXd& h_row) {
    const Eigen::MatrixXd score = model.h_pca.project(h_row.transpose());
    const Eigen::MatrixXd hc = model.cca.project_h(score);
    return model.h_norm.apply(hc).row(0);
}

PosteriorEnsemble predict(const BelModel& model, const Eigen::VectorXd& d_row, int zeta,
                          RngStream& rng) {
    const Eigen::VectorXd d_obs = project_observation(model, d_row);
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    condition(model, d_obs, mu, sigma);
    const Eigen::MatrixXd samples = sample_posterior(mu, sigma, zeta, rng);
    PosteriorEnsemble out = backtransform(model, samples);
    out.observation_fingerprint = fnv1a64(d_row.data(), sizeof(double) * d_row.size());
    return out;
}

uint64_t model_fingerprint(const BelModel& model) {
    if (model.self_fingerprint != 0) return model.self_fingerprint;
    uint64_t h = kFnvOffset;
    const auto mix_int = [&h](int64_t v) { h = fnv1a64(&v, sizeof v, h); };
    mix_int(model.n_wells);
    mix_int(model.curve_len);
    const double dur = model.curve_duration;
    h = fnv1a64(&dur, sizeof dur, h);
    for (int w : model.well_subset) mix_int(w);

    hash_vector(h, model.d_pca.mean);
    hash_matrix(h, model.d_pca.components);
    hash_vector(h, model.h_pca.mean);
    hash_matrix(h, model.h_pca.components);
    hash_vector(h, model.cca.d_mean);
    hash_vector(h, model.cca.h_mean);
    hash_matrix(h, model.cca.d_weights);
    hash_matrix(h, model.cca.h_weights);
    hash_matrix(h, model.cca.h_back);
    hash_vector(h, model.cca.correlations);
    for (const auto& dims : {model.d_norm.dims, model.h_norm.dims})
        for (const YeoJohnsonDim& d : dims) {
            h = fnv1a64(&d.lambda, sizeof d.lambda, h);
            h = fnv1a64(&d.mean, sizeof d.mean, h);
            h = fnv1a64(&d.std_dev, sizeof d.std_dev, h);
            mix_int(d.identity ? 1 : 0);
        }
    hash_matrix(h, model.terms.G);
    hash_matrix(h, model.terms.noise_cov);
    hash_vector(h, model.terms.noise_mean);
    hash_vector(h, model.terms.hc_mean);
    hash_matrix(h, model.terms.hc_cov);
    hash_matrix(h, model.terms.post_cov);
    hash_matrix(h, model.terms.gain);
    mix_int(model.training_fingerprint);
    return h;
}

}  // namespace whpa
