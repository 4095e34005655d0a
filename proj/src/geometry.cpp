#include "whpa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace whpa {

namespace {

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double tour_length_of(const std::vector<Point>& v) {
    double len = 0.0;
    for (size_t i = 0; i < v.size(); ++i) len += dist(v[i], v[(i + 1) % v.size()]);
    return len;
}

/// Held-Karp over subsets, anchored at point 0. Single-start 2-opt can end
/// up several percent above the optimum, so tiny sets are solved exactly.
std::vector<int> tsp_exact_small(const std::vector<Point>& pts) {
    const int m = static_cast<int>(pts.size()) - 1;  // points 1..m, anchor 0
    const int n_masks = 1 << m;
    std::vector<double> cost(static_cast<size_t>(n_masks) * m,
                             std::numeric_limits<double>::infinity());
    std::vector<int> parent(static_cast<size_t>(n_masks) * m, -1);

    for (int j = 0; j < m; ++j)
        cost[static_cast<size_t>(1 << j) * m + j] = dist(pts[0], pts[j + 1]);

    for (int mask = 1; mask < n_masks; ++mask)
        for (int j = 0; j < m; ++j) {
            if (!(mask & (1 << j))) continue;
            const double base = cost[static_cast<size_t>(mask) * m + j];
            if (!std::isfinite(base)) continue;
            for (int k = 0; k < m; ++k) {
                if (mask & (1 << k)) continue;
                const int next = mask | (1 << k);
                const double cand = base + dist(pts[j + 1], pts[k + 1]);
                if (cand < cost[static_cast<size_t>(next) * m + k]) {
                    cost[static_cast<size_t>(next) * m + k] = cand;
                    parent[static_cast<size_t>(next) * m + k] = j;
                }
            }
        }

    const int full = n_masks - 1;
    int best_j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
        const double total = cost[static_cast<size_t>(full) * m + j] + dist(pts[j + 1], pts[0]);
        if (total < best) {
            best = total;
            best_j = j;
        }
    }

    std::vector<int> order(pts.size());
    int mask = full;
    int j = best_j;
    for (int at = m; at >= 1; --at) {
        order[static_cast<size_t>(at)] = j + 1;
        const int pj = parent[static_cast<size_t>(mask) * m + j];
        mask ^= 1 << j;
        j = pj;
    }
    order[0] = 0;
    return order;
}

}  // namespace

bool point_in_polygon(const std::vector<Point>& poly, double x, double y) {
    bool inside = false;
    const size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = poly[i];
        const Point& b = poly[j];
        if ((a.y > y) != (b.y > y)) {
            const double x_cross = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (x < x_cross) inside = !inside;
        }
    }
    return inside;
}

WhpaContour order_endpoints_tsp(const EndpointSet& points) {
    std::vector<Point> pts;
    pts.reserve(points.points.size());
    int dropped = 0;
    for (const Point& p : points.points) {
        bool dup = false;
        for (const Point& q : pts)
            if (q.x == p.x && q.y == p.y) {
                dup = true;
                break;
            }
        if (dup)
            ++dropped;
        else
            pts.push_back(p);
    }
    const size_t n = pts.size();
    if (n < 3)
        throw std::invalid_argument("order_endpoints_tsp: need at least 3 distinct points");

    if (n <= 12) {
        WhpaContour out;
        out.duplicates_removed = dropped;
        for (int k : tsp_exact_small(pts)) out.vertices.push_back(pts[static_cast<size_t>(k)]);
        out.tour_length = tour_length_of(out.vertices);
        return out;
    }

    // Nearest-neighbor tour from the first point; ties keep the lowest index.
    std::vector<int> order;
    order.reserve(n);
    std::vector<bool> used(n, false);
    order.push_back(0);
    used[0] = true;
    for (size_t step = 1; step < n; ++step) {
        const Point& cur = pts[order.back()];
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double d = dist(cur, pts[j]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(j);
            }
        }
        order.push_back(best);
        used[best] = true;
    }

    // 2-opt: reverse order[i..j] while any exchange shortens the tour.
    const auto d_at = [&](int a, int b) { return dist(pts[order[a]], pts[order[b]]); };
    const int m = static_cast<int>(n);
    bool improved = true;
    while (improved) {
        improved = false;
        for (int i = 0; i < m - 1; ++i) {
            for (int j = i + 1; j < m; ++j) {
                const int i_prev = (i + m - 1) % m;
                const int j_next = (j + 1) % m;
                if (i_prev == j) continue;
                const double before = d_at(i_prev, i) + d_at(j, j_next);
                const double after = d_at(i_prev, j) + d_at(i, j_next);
                if (after < before - 1e-12 * std::max(1.0, before)) {
                    std::reverse(order.begin() + i, order.begin() + j + 1);
                    improved = true;
                }
            }
        }
    }

    WhpaContour out;
    out.duplicates_removed = dropped;
    out.vertices.reserve(n);
    for (int k : order) out.vertices.push_back(pts[k]);
    out.tour_length = tour_length_of(out.vertices);
    return out;
}

BinaryImage rasterize(const WhpaContour& contour, const SubgridSpec& sub) {
    sub.validate();
    if (contour.vertices.size() < 3)
        throw std::invalid_argument("rasterize: contour needs at least 3 vertices");

    BinaryImage img;
    img.sub = sub;
    const int nr = sub.n_rows();
    const int nc = sub.n_cols();
    img.values = Eigen::MatrixXi::Zero(nr, nc);

    int count = 0;
    for (int i = 0; i < nr; ++i) {
        const double y = sub.y_min + (i + 0.5) * sub.cell;
        for (int j = 0; j < nc; ++j) {
            const double x = sub.x_min + (j + 0.5) * sub.cell;
            if (point_in_polygon(contour.vertices, x, y)) {
                img.values(i, j) = 1;
                ++count;
            }
        }
    }
    img.all_outside = (count == 0);
    return img;
}

SdImage signed_distance(const BinaryImage& img) {
    const int nr = static_cast<int>(img.values.rows());
    const int nc = static_cast<int>(img.values.cols());
    const double h = img.sub.cell;
    const int n_inside = img.values.sum();
    if (n_inside == 0 || n_inside == nr * nc)
        throw std::invalid_argument("signed_distance: image must contain both phases");

    constexpr double kFar = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(nr, nc, kFar);
    Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic> accepted(nr, nc);
    accepted.setZero();

    struct Node {
        double d;
        int i, j;
        bool operator>(const Node& o) const { return d > o.d; }
    };
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> heap;

    static const int di[4] = {-1, 1, 0, 0};
    static const int dj[4] = {0, 0, -1, 1};

    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j)
            for (int k = 0; k < 4; ++k) {
                const int ni = i + di[k];
                const int nj = j + dj[k];
                if (ni < 0 || ni >= nr || nj < 0 || nj >= nc) continue;
                if (img.values(ni, nj) != img.values(i, j)) {
                    d(i, j) = 0.5 * h;
                    heap.push({d(i, j), i, j});
                    break;
                }
            }

    // Upwind Eikonal update from accepted neighbors.
    const auto update = [&](int i, int j) {
        double a = kFar, b = kFar;
        if (i > 0 && accepted(i - 1, j)) a = std::min(a, d(i - 1, j));
        if (i + 1 < nr && accepted(i + 1, j)) a = std::min(a, d(i + 1, j));
        if (j > 0 && accepted(i, j - 1)) b = std::min(b, d(i, j - 1));
        if (j + 1 < nc && accepted(i, j + 1)) b = std::min(b, d(i, j + 1));
        if (a > b) std::swap(a, b);
        if (a == kFar) return kFar;
        if (b == kFar || b - a >= h) return a + h;
        return 0.5 * (a + b + std::sqrt(2.0 * h * h - (a - b) * (a - b)));
    };

    while (!heap.empty()) {
        const Node top = heap.top();
        heap.pop();
        if (accepted(top.i, top.j)) continue;
        accepted(top.i, top.j) = 1;
        for (int k = 0; k < 4; ++k) {
            const int ni = top.i + di[k];
            const int nj = top.j + dj[k];
            if (ni < 0 || ni >= nr || nj < 0 || nj >= nc) continue;
            if (accepted(ni, nj)) continue;
            const double cand = update(ni, nj);
            if (cand < d(ni, nj)) {
                d(ni, nj) = cand;
                heap.push({cand, ni, nj});
            }
        }
    }

    SdImage sd;
    sd.sub = img.sub;
    sd.psi.resize(nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) sd.psi(i, j) = img.values(i, j) ? d(i, j) : -d(i, j);
    return sd;
}

std::vector<Point> extract_zero_contour(const SdImage& sd) {
    const int nr = static_cast<int>(sd.psi.rows());
    const int nc = static_cast<int>(sd.psi.cols());
    const double h = sd.sub.cell;
    std::vector<Point> pts;

    const auto center_x = [&](int j) { return sd.sub.x_min + (j + 0.5) * h; };
    const auto center_y = [&](int i) { return sd.sub.y_min + (i + 0.5) * h; };
    const auto pos = [](double v) { return v >= 0.0; };

    for (int i = 0; i < nr; ++i)
        for (int j = 0; j + 1 < nc; ++j) {
            const double a = sd.psi(i, j);
            const double b = sd.psi(i, j + 1);
            if (pos(a) != pos(b)) {
                const double t = a / (a - b);
                pts.push_back(Point{center_x(j) + t * h, center_y(i)});
            }
        }
    for (int i = 0; i + 1 < nr; ++i)
        for (int j = 0; j < nc; ++j) {
            const double a = sd.psi(i, j);
            const double b = sd.psi(i + 1, j);
            if (pos(a) != pos(b)) {
                const double t = a / (a - b);
                pts.push_back(Point{center_x(j), center_y(i) + t * h});
            }
        }
    return pts;
}

}  // namespace whpa
