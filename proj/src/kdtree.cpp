#include "gpocc/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "gpocc/simd/kernels.hpp"

namespace gpocc {

namespace {
constexpr std::uint32_t kLeafSize = 16;
}

void KdTree2D::clear() {
    nodes_.clear();
    xs_.clear();
    ys_.clear();
    ids_.clear();
    root_ = 0;
}

void KdTree2D::build(const std::vector<Point2>& points) {
    clear();
    const auto n = static_cast<std::uint32_t>(points.size());
    if (n == 0) return;
    xs_.resize(n);
    ys_.resize(n);
    ids_.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        xs_[i] = points[i].x;
        ys_[i] = points[i].y;
        ids_[i] = i;
    }
    nodes_.reserve(2 * (n / kLeafSize + 2));
    root_ = build_node(0, n, 0);
}

std::uint32_t KdTree2D::build_node(std::uint32_t begin, std::uint32_t end, int axis) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    if (end - begin <= kLeafSize) {
        nodes_[id].axis = -1;
        nodes_[id].begin = begin;
        nodes_[id].end = end;
        return id;
    }

    const std::uint32_t mid = begin + (end - begin) / 2;
    // Full (value, x, y) ordering keeps the layout deterministic.
    auto cmp = [&](std::uint32_t a, std::uint32_t b) {
        const double va = axis == 0 ? xs_[a] : ys_[a];
        const double vb = axis == 0 ? xs_[b] : ys_[b];
        if (va != vb) return va < vb;
        if (xs_[a] != xs_[b]) return xs_[a] < xs_[b];
        return ys_[a] < ys_[b];
    };

    // Sort index triples through a scratch permutation of the range.
    std::vector<std::uint32_t> perm(end - begin);
    std::iota(perm.begin(), perm.end(), begin);
    std::nth_element(perm.begin(), perm.begin() + (mid - begin), perm.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return cmp(a, b); });

    // Apply the permutation to the SoA arrays over [begin, end).
    {
        std::vector<double> tx(perm.size()), ty(perm.size());
        std::vector<std::uint32_t> ti(perm.size());
        for (std::size_t k = 0; k < perm.size(); ++k) {
            tx[k] = xs_[perm[k]];
            ty[k] = ys_[perm[k]];
            ti[k] = ids_[perm[k]];
        }
        std::copy(tx.begin(), tx.end(), xs_.begin() + begin);
        std::copy(ty.begin(), ty.end(), ys_.begin() + begin);
        std::copy(ti.begin(), ti.end(), ids_.begin() + begin);
    }

    nodes_[id].axis = axis;
    nodes_[id].split = axis == 0 ? xs_[mid] : ys_[mid];
    const std::uint32_t l = build_node(begin, mid, 1 - axis);
    const std::uint32_t r = build_node(mid, end, 1 - axis);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
}

void KdTree2D::search(std::uint32_t node_id, Point2 q, Hit& best) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        const std::size_t count = node.end - node.begin;
        if (count == 0) return;
        double d2 = 0.0;
        const std::size_t off = simd::active().argmin_sqdist(
            xs_.data() + node.begin, ys_.data() + node.begin, count, q.x, q.y, &d2);
        if (d2 < best.dist2) best = {ids_[node.begin + off], d2};
        return;
    }
    const double qv = node.axis == 0 ? q.x : q.y;
    const double delta = qv - node.split;
    const std::uint32_t near = delta < 0.0 ? node.left : node.right;
    const std::uint32_t far = delta < 0.0 ? node.right : node.left;
    search(near, q, best);
    if (delta * delta < best.dist2) search(far, q, best);
}

std::optional<KdTree2D::Hit> KdTree2D::nearest(Point2 q) const {
    if (empty()) return std::nullopt;
    Hit best{0, std::numeric_limits<double>::infinity()};
    search(root_, q, best);
    return best;
}

std::optional<KdTree2D::Hit> KdTree2D::nearest_within(Point2 q, double max_dist) const {
    if (empty()) return std::nullopt;
    Hit best{0, max_dist * max_dist * (1.0 + 1e-15) + 1e-300};
    search(root_, q, best);
    if (best.dist2 > max_dist * max_dist) return std::nullopt;
    return best;
}

void KdTree2D::collect(std::uint32_t node_id, Point2 q, double r2, std::vector<Hit>& out) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const double dx = q.x - xs_[i];
            const double dy = q.y - ys_[i];
            const double d2 = dx * dx + dy * dy;
            if (d2 <= r2) out.push_back({ids_[i], d2});
        }
        return;
    }
    const double qv = node.axis == 0 ? q.x : q.y;
    const double delta = qv - node.split;
    if (delta < 0.0) {
        collect(node.left, q, r2, out);
        if (delta * delta <= r2) collect(node.right, q, r2, out);
    } else {
        collect(node.right, q, r2, out);
        if (delta * delta <= r2) collect(node.left, q, r2, out);
    }
}

void KdTree2D::radius_search(Point2 q, double radius, std::vector<Hit>& out) const {
    out.clear();
    if (empty() || !(radius > 0.0)) return;
    collect(root_, q, radius * radius, out);
}

}  // namespace gpocc
