#include "whpa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace whpa {

const char* metric_name(MetricKind m) {
    switch (m) {
        case MetricKind::MHD: return "mhd";
        case MetricKind::NegSSIM: return "neg_ssim";
    }
    return "unknown";
}

namespace {

/// Mean over a of the distance to the nearest point of b. b_sorted holds
/// indices of b ordered by x so the scan can stop once the x gap alone
/// exceeds the best squared distance.
double directed_mean_min(const std::vector<Point>& a, const std::vector<Point>& b,
                         const std::vector<int>& b_sorted) {
    const int w = static_cast<int>(b.size());
    double sum = 0.0;
    for (const Point& p : a) {
        int lo = 0, hi = w;
        while (lo < hi) {
            const int mid = (lo + hi) / 2;
            if (b[b_sorted[mid]].x < p.x)
                lo = mid + 1;
            else
                hi = mid;
        }
        double best = std::numeric_limits<double>::infinity();
        for (int k = lo; k < w; ++k) {
            const Point& q = b[b_sorted[k]];
            const double dx = q.x - p.x;
            if (dx * dx >= best) break;
            const double dy = q.y - p.y;
            best = std::min(best, dx * dx + dy * dy);
        }
        for (int k = lo - 1; k >= 0; --k) {
            const Point& q = b[b_sorted[k]];
            const double dx = q.x - p.x;
            if (dx * dx >= best) break;
            const double dy = q.y - p.y;
            best = std::min(best, dx * dx + dy * dy);
        }
        sum += std::sqrt(best);
    }
    return sum / static_cast<double>(a.size());
}

std::vector<int> sort_by_x(const std::vector<Point>& pts) {
    std::vector<int> idx(pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int i, int j) {
        if (pts[i].x != pts[j].x) return pts[i].x < pts[j].x;
        return pts[i].y < pts[j].y;
    });
    return idx;
}

}  // namespace

double mhd(const std::vector<Point>& a, const std::vector<Point>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("mhd: point sets must be nonempty");
    const std::vector<int> sa = sort_by_x(a);
    const std::vector<int> sb = sort_by_x(b);
    return std::max(directed_mean_min(a, b, sb), directed_mean_min(b, a, sa));
}

double ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const SsimParams& p) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("ssim: shape mismatch");
    if (p.window < 1) throw std::invalid_argument("ssim: window must be positive");
    const int nr = static_cast<int>(a.rows());
    const int nc = static_cast<int>(a.cols());
    if (nr < p.window || nc < p.window)
        throw std::invalid_argument("ssim: image smaller than window");

    const double range =
        std::max(a.maxCoeff(), b.maxCoeff()) - std::min(a.minCoeff(), b.minCoeff());
    if (range == 0.0) {
        if (a == b) return 1.0;
        throw std::invalid_argument("ssim: zero joint dynamic range on unequal images");
    }
    const double c1 = (p.k1 * range) * (p.k1 * range);
    const double c2 = (p.k2 * range) * (p.k2 * range);

    // Prefix sums with a zero row/column so window sums are 4 lookups.
    const auto prefix = [nr, nc](const auto& expr) {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(nr + 1, nc + 1);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nc; ++j)
                s(i + 1, j + 1) = expr(i, j) + s(i, j + 1) + s(i + 1, j) - s(i, j);
        return s;
    };
    const Eigen::MatrixXd sa = prefix(a);
    const Eigen::MatrixXd sb = prefix(b);
    const Eigen::MatrixXd saa = prefix(a.array().square());
    const Eigen::MatrixXd sbb = prefix(b.array().square());
    const Eigen::MatrixXd sab = prefix((a.array() * b.array()));

    const auto box = [&](const Eigen::MatrixXd& s, int i, int j) {
        return s(i + p.window, j + p.window) - s(i, j + p.window) - s(i + p.window, j) + s(i, j);
    };

    const double inv_n = 1.0 / (static_cast<double>(p.window) * p.window);
    double total = 0.0;
    int count = 0;
    for (int i = 0; i + p.window <= nr; ++i) {
        for (int j = 0; j + p.window <= nc; ++j) {
            const double mu1 = box(sa, i, j) * inv_n;
            const double mu2 = box(sb, i, j) * inv_n;
            const double var1 = box(saa, i, j) * inv_n - mu1 * mu1;
            const double var2 = box(sbb, i, j) * inv_n - mu2 * mu2;
            const double cov = box(sab, i, j) * inv_n - mu1 * mu2;
            const double num = (2.0 * mu1 * mu2 + c1) * (2.0 * cov + c2);
            const double den = (mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2);
            total += num / den;
            ++count;
        }
    }
    return total / count;
}

StandardizedValues standardize(const Eigen::VectorXd& x) {
    if (x.size() < 2) throw std::invalid_argument("standardize: need at least 2 values");
    StandardizedValues out;
    out.mean = x.mean();
    out.std_dev = std::sqrt((x.array() - out.mean).square().sum() / x.size());
    if (out.std_dev == 0.0) {
        out.zero_variance = true;
        out.values = Eigen::VectorXd::Zero(x.size());
        return out;
    }
    out.values = (x.array() - out.mean) / out.std_dev;
    return out;
}

}  // namespace whpa
