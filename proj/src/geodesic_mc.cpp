#include "hypint/geodesic_mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include "hypint/defect.hpp"

#include "hypint/parallel.hpp"
#include "hypint/quadrature.hpp"
#include "hypint/rng.hpp"

namespace hypint {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Aabb {
    Vec3 lo{1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};

    void grow(const Vec3& p) {
        lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
        hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
    }
    void grow(const Aabb& b) { grow(b.lo); grow(b.hi); }

    bool segment_overlaps(const Vec3& a, const Vec3& b) const {
        // slab test
        double t0 = 0.0, t1 = 1.0;
        const double d[3] = {b.x - a.x, b.y - a.y, b.z - a.z};
        const double o[3] = {a.x, a.y, a.z};
        const double l[3] = {lo.x, lo.y, lo.z};
        const double h[3] = {hi.x, hi.y, hi.z};
        for (int i = 0; i < 3; ++i) {
            if (std::abs(d[i]) < 1e-300) {
                if (o[i] < l[i] || o[i] > h[i]) return false;
                continue;
            }
            double ta = (l[i] - o[i]) / d[i];
            double tb = (h[i] - o[i]) / d[i];
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
        return true;
    }
};

} // namespace

// ---------------------------------------------------------------- MeshAccel

struct MeshAccel::Impl {
    struct Node {
        Aabb box;
        int left = -1, right = -1;
        int begin = 0, end = 0; // leaf triangle range
    };

    std::vector<Vec3> va, vb, vc; // triangle vertices
    std::vector<Vec3> normal;
    std::vector<int> order;
    std::vector<Node> nodes;
    double zmin = 1e300, zmax = -1e300;
    double edge_typ = 0.0;

    int build(std::vector<int>& idx, int begin, int end,
              const std::vector<Vec3>& centroid, int depth) {
        Node node;
        for (int i = begin; i < end; ++i) {
            const int t = idx[i];
            node.box.grow(va[t]); node.box.grow(vb[t]); node.box.grow(vc[t]);
        }
        const int id = static_cast<int>(nodes.size());
        nodes.push_back(node);
        if (end - begin <= 8 || depth > 40) {
            nodes[id].begin = begin;
            nodes[id].end = end;
            return id;
        }
        const Vec3 ext = node.box.hi - node.box.lo;
        int axis = 0;
        if (ext.y > ext.x) axis = 1;
        if (ext.z > (axis == 0 ? ext.x : ext.y)) axis = 2;
        const int mid = (begin + end) / 2;
        std::nth_element(idx.begin() + begin, idx.begin() + mid, idx.begin() + end,
                         [&](int a, int b) {
                             const Vec3& ca = centroid[a];
                             const Vec3& cb = centroid[b];
                             return (axis == 0 ? ca.x : axis == 1 ? ca.y : ca.z) <
                                    (axis == 0 ? cb.x : axis == 1 ? cb.y : cb.z);
                         });
        const int l = build(idx, begin, mid, centroid, depth + 1);
        const int r = build(idx, mid, end, centroid, depth + 1);
        nodes[id].left = l;
        nodes[id].right = r;
        return id;
    }

    void query(int node_id, const Vec3& a, const Vec3& b, double s0, double s1,
               std::vector<Hit>& out) const {
        const Node& node = nodes[node_id];
        if (!node.box.segment_overlaps(a, b)) return;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int t = order[i];
                hit_triangle(t, a, b, s0, s1, out);
            }
            return;
        }
        query(node.left, a, b, s0, s1, out);
        query(node.right, a, b, s0, s1, out);
    }

    void hit_triangle(int t, const Vec3& a, const Vec3& b, double s0, double s1,
                      std::vector<Hit>& out) const {
        // Moller-Trumbore, segment version
        const Vec3 dir = b - a;
        const Vec3 e1 = vb[t] - va[t];
        const Vec3 e2 = vc[t] - va[t];
        const Vec3 p = dir.cross(e2);
        const double det = p.dot(e1);
        const double eps = 1e-12;
        if (std::abs(det) < eps * e1.norm() * e2.norm() * dir.norm()) return;
        const Vec3 tv = a - va[t];
        const double u = tv.dot(p) / det;
        if (u < 0.0 || u > 1.0) return;
        const Vec3 q = tv.cross(e1);
        const double v = dir.dot(q) / det;
        if (v < 0.0 || u + v > 1.0) return;
        const double tt = e2.dot(q) / det;
        if (tt < 0.0 || tt > 1.0) return;
        Hit h;
        h.triangle = t;
        h.point = a + dir * tt;
        h.sign = normal[t].dot(dir) > 0 ? +1 : -1;
        h.along = s0 + (s1 - s0) * tt;
        const double bnd = 1e-9;
        h.degenerate = (u < bnd || v < bnd || u + v > 1.0 - bnd || tt < bnd ||
                        tt > 1.0 - bnd);
        out.push_back(h);
    }
};

MeshAccel::MeshAccel(const MeshedSurface& m) : impl_(std::make_unique<Impl>()) {
    const int n = static_cast<int>(m.triangles.size());
    impl_->va.resize(n);
    impl_->vb.resize(n);
    impl_->vc.resize(n);
    impl_->normal.resize(n);
    std::vector<Vec3> centroid(n);
    double edge_sum = 0.0;
    for (int t = 0; t < n; ++t) {
        const auto& tr = m.triangles[t];
        impl_->va[t] = m.vertices[tr[0]];
        impl_->vb[t] = m.vertices[tr[1]];
        impl_->vc[t] = m.vertices[tr[2]];
        impl_->normal[t] =
            (impl_->vb[t] - impl_->va[t]).cross(impl_->vc[t] - impl_->va[t]);
        centroid[t] = (impl_->va[t] + impl_->vb[t] + impl_->vc[t]) / 3.0;
        edge_sum += (impl_->vb[t] - impl_->va[t]).norm();
        for (const Vec3& p : {impl_->va[t], impl_->vb[t], impl_->vc[t]}) {
            impl_->zmin = std::min(impl_->zmin, p.z);
            impl_->zmax = std::max(impl_->zmax, p.z);
        }
    }
    impl_->edge_typ = n > 0 ? edge_sum / n : 0.0;
    impl_->order.resize(n);
    for (int t = 0; t < n; ++t) impl_->order[t] = t;
    if (n > 0) impl_->build(impl_->order, 0, n, centroid, 0);
}

MeshAccel::~MeshAccel() = default;
MeshAccel::MeshAccel(MeshAccel&&) noexcept = default;

void MeshAccel::segment_hits(Vec3 a, Vec3 b, double s0, double s1,
                             std::vector<Hit>& out) const {
    if (impl_->nodes.empty()) return;
    impl_->query(0, a, b, s0, s1, out);
}

double MeshAccel::z_min() const { return impl_->zmin; }
double MeshAccel::z_max() const { return impl_->zmax; }
double MeshAccel::typical_edge() const { return impl_->edge_typ; }

// ------------------------------------------------------- geodesic vs mesh

namespace {

// alpha ranges of the semicircle with heights in [z0, z1]
int alpha_windows(double rho, double z0, double z1, double out[2][2]) {
    z0 = std::max(z0, 0.0);
    if (rho <= z0) return 0;
    const double a_lo = std::asin(std::min(1.0, z0 / rho)); // lowest angle of interest
    if (rho <= z1) {
        out[0][0] = a_lo;
        out[0][1] = kPi - a_lo;
        return 1;
    }
    const double a_hi = std::asin(z1 / rho);
    out[0][0] = a_lo;
    out[0][1] = a_hi;
    out[1][0] = kPi - a_hi;
    out[1][1] = kPi - a_lo;
    return 2;
}

struct GeodFrame {
    Vec2 mid, e;
    double rho = 0.0;
    bool vertical = false;
    Vec2 base;

    Vec3 at_alpha(double a) const {
        const double c = std::cos(a), s = std::sin(a);
        return {mid.x + rho * c * e.x, mid.y + rho * c * e.y, rho * s};
    }
};

GeodFrame frame_of(const Geodesic& g) {
    GeodFrame f;
    if (g.vertical) {
        f.vertical = true;
        f.base = g.base;
        return f;
    }
    f.mid = g.base;
    f.rho = g.radius;
    f.e = (g.end.p - g.start.p).normalized();
    return f;
}

IntersectionRecord count_against_mesh(const GeodFrame& f, const MeshAccel& mesh) {
    IntersectionRecord rec;
    std::vector<MeshAccel::Hit> hits;
    if (f.vertical) {
        const double z0 = std::max(1e-12, mesh.z_min() * 0.999);
        const double z1 = mesh.z_max() * 1.001;
        mesh.segment_hits({f.base.x, f.base.y, z0}, {f.base.x, f.base.y, z1}, z0, z1,
                          hits);
    } else {
        double win[2][2];
        const int nw = alpha_windows(f.rho, mesh.z_min() * 0.999,
                                     mesh.z_max() * 1.001, win);
        const double sagitta_target =
            std::max(1e-9, 0.25 * std::max(mesh.typical_edge(), 1e-6));
        for (int w = 0; w < nw; ++w) {
            const double span = win[w][1] - win[w][0];
            if (span <= 0) continue;
            // sagitta of an arc of angle da is ~ rho*da^2/8
            int nseg = static_cast<int>(
                std::ceil(span / std::sqrt(8.0 * sagitta_target / f.rho)));
            nseg = std::max(nseg, 64);
            Vec3 prev = f.at_alpha(win[w][0]);
            for (int i = 1; i <= nseg; ++i) {
                const double a = win[w][0] + span * i / nseg;
                const Vec3 cur = f.at_alpha(a);
                mesh.segment_hits(prev, cur, a - span / nseg, a, hits);
                prev = cur;
            }
        }
    }
    for (const auto& h : hits) {
        if (h.degenerate) {
            rec.jittered = true; // caller decides on retry
        }
        rec.count += 1;
        rec.signed_sum += h.sign;
        rec.hits.push_back(h);
    }
    return rec;
}

} // namespace

IntersectionRecord count_intersections(const Geodesic& g, const MeshAccel& mesh) {
    GeodFrame f = frame_of(g);
    for (int attempt = 0; attempt < 5; ++attempt) {
        IntersectionRecord rec = count_against_mesh(f, mesh);
        bool degenerate = false;
        for (const auto& h : rec.hits) degenerate |= h.degenerate;
        if (!degenerate) {
            rec.jittered = attempt > 0;
            return rec;
        }
        // deterministic endpoint jitter
        const double eps = 1e-9 * (attempt + 1);
        if (f.vertical) {
            f.base += Vec2(eps, 1.3 * eps);
        } else {
            f.mid += Vec2(eps, 1.3 * eps);
            f.rho *= 1.0 + eps;
        }
    }
    throw std::runtime_error("count_intersections: persistent degenerate hits");
}

int linking_compact(const Geodesic& g, const MeshAccel& mesh) {
    return count_intersections(g, mesh).signed_sum;
}

int linking_sq_ideal(const Geodesic& g, const IdealCurve& c) {
    auto winding_parity = [&](const BoundaryPoint& b, int attempt) {
        if (b.at_infinity) return 0; // infinity is outside every bounded curve
        Vec2 p = b.p;
        p += Vec2(1e-9 * attempt, 1.3e-9 * attempt);
        return c.winding_number(p) % 2 != 0 ? 1 : 0;
    };
    for (int attempt = 0; attempt < 5; ++attempt) {
        try {
            const int pz = winding_parity(g.start, attempt);
            const int pw = winding_parity(g.end, attempt);
            return pz != pw ? 1 : 0;
        } catch (const OnCurveError&) {
            continue;
        }
    }
    throw std::runtime_error("linking_sq_ideal: endpoint stuck on the curve");
}

// -------------------------------------------------------------------- scenes

namespace {

class HemisphereScene final : public IntersectionScene {
public:
    HemisphereScene(Vec2 center, double radius, double disk_rho)
        : o_(center), r_(radius), disk_rho_(disk_rho) {}

    Counts count(Vec2 z, Vec2 w) const override {
        Counts c;
        const Vec2 mid = (z + w) * 0.5;
        const double rho = 0.5 * (w - z).norm();
        const Vec2 e = (w - z) / (2.0 * rho);
        const Vec2 mo = mid - o_;
        const double denom = 2.0 * e.dot(mo);
        if (std::abs(denom) < 1e-14 * (r_ + rho)) {
            c.degenerate = true;
            return c;
        }
        const double u = (r_ * r_ - rho * rho - mo.norm2()) / denom;
        if (std::abs(u) >= rho) return c; // no crossing
        const double h = std::sqrt(std::max(0.0, rho * rho - u * u));
        if (h <= 0) {
            c.degenerate = true;
            return c;
        }
        if (disk_rho_ > 0.0) {
            // crossing point within hyperbolic distance disk_rho of the apex
            const Vec2 px = mid + e * u;
            const double dx = px.x - o_.x, dy = px.y - o_.y, dz = h - r_;
            const double cosh_d = 1.0 + (dx * dx + dy * dy + dz * dz) / (2.0 * h * r_);
            if (cosh_d > std::cosh(disk_rho_)) return c;
            const double margin = 1e-9 * std::cosh(disk_rho_);
            if (std::abs(cosh_d - std::cosh(disk_rho_)) < margin) {
                c.degenerate = true;
                return c;
            }
        }
        c.count = 1;
        c.signed_sum = denom > 0 ? 1 : -1;
        return c;
    }

    Vec2 o_;
    double r_, disk_rho_;
};

class CappedCylinderScene final : public IntersectionScene {
public:
    CappedCylinderScene(std::shared_ptr<const ParamSurface> s, double floor_h,
                        int mesh_resolution)
        : surf_(std::move(s)), floor_(floor_h) {
        const auto info = capped_cylinder_info(*surf_);
        if (!info) throw std::invalid_argument("scene: not a capped cylinder");
        info_ = *info;
        if (floor_ >= info_.wall_top)
            throw std::invalid_argument("scene: floor above the wall top");
        band_mesh_ = std::make_unique<MeshedSurface>(
            mesh_band(*surf_, info_.wall_top, surf_->v_max(), mesh_resolution));
        accel_ = std::make_unique<MeshAccel>(*band_mesh_);
        curve_ = surf_->end_curve();
    }

    Counts count(Vec2 z, Vec2 w) const override {
        Counts out;
        const double rho = 0.5 * (w - z).norm();
        const Vec2 mid = (z + w) * 0.5;
        const Vec2 e = (w - z) / (2.0 * rho);
        const Vec2 n = e.perp();

        // wall crossings: 2D chord-curve hits whose geodesic height falls in
        // (floor, wall_top]
        if (rho > floor_) {
            const double level = n.dot(z);
            for (double t : curve_->level_crossings(n, level)) {
                const double u = (curve_->eval(t) - mid).dot(e);
                if (std::abs(u) >= rho) continue;
                const double h = std::sqrt(rho * rho - u * u);
                if (h <= floor_ || h > info_.wall_top) {
                    if (std::abs(h - floor_) < 1e-11 || std::abs(h - info_.wall_top) < 1e-11)
                        out.degenerate = true;
                    continue;
                }
                // sign relative to the outward wall normal
                Vec2 outward = curve_->d1(t).perp() * (curve_->is_ccw() ? -1.0 : 1.0);
                const double d = e.dot(outward);
                if (std::abs(d) < 1e-12 * outward.norm()) {
                    out.degenerate = true;
                    continue;
                }
                out.count += 1;
                out.signed_sum += d > 0 ? 1 : -1;
            }
        }

        // band + dome crossings (only geodesics tall enough can reach)
        if (rho > info_.wall_top) {
            Geodesic g{BoundaryPoint(z), BoundaryPoint(w)};
            const IntersectionRecord rec = count_intersections(g, *accel_);
            out.count += rec.count;
            out.signed_sum += rec.signed_sum;
        }
        return out;
    }

    std::shared_ptr<const ParamSurface> surf_;
    double floor_;
    CappedCylinderInfo info_;
    std::unique_ptr<MeshedSurface> band_mesh_;
    std::unique_ptr<MeshAccel> accel_;
    const IdealCurve* curve_ = nullptr;
};

class MeshScene final : public IntersectionScene {
public:
    explicit MeshScene(std::shared_ptr<MeshedSurface> m)
        : mesh_(std::move(m)), accel_(*mesh_) {}

    Counts count(Vec2 z, Vec2 w) const override {
        Geodesic g{BoundaryPoint(z), BoundaryPoint(w)};
        const IntersectionRecord rec = count_intersections(g, accel_);
        Counts c;
        c.count = rec.count;
        c.signed_sum = rec.signed_sum;
        return c;
    }

    std::shared_ptr<MeshedSurface> mesh_;
    MeshAccel accel_;
};

} // namespace

std::unique_ptr<IntersectionScene> make_hemisphere_scene(Vec2 center, double radius,
                                                         double disk_rho) {
    return std::make_unique<HemisphereScene>(center, radius, disk_rho);
}

std::unique_ptr<IntersectionScene> make_capped_cylinder_scene(
    std::shared_ptr<const ParamSurface> s, double floor_h, int mesh_resolution) {
    return std::make_unique<CappedCylinderScene>(std::move(s), floor_h,
                                                 mesh_resolution);
}

std::unique_ptr<IntersectionScene> make_mesh_scene(std::shared_ptr<MeshedSurface> m) {
    return std::make_unique<MeshScene>(std::move(m));
}

// ---------------------------------------------------------------- estimators

namespace {

struct Stratum {
    double a = 0.0, b = 0.0;
    bool log_law = false;
    double alloc = 0.0;
};

// geometric decomposition of [rho_lo, rho_max]: rho^-3 law where the measure
// piles up at small chords, log-uniform across the wide upper decades
std::vector<Stratum> build_strata(const ShadowRegion& region, double rho_lo,
                                  double rho_max) {
    const double R = region.radius;
    std::vector<double> edges{rho_lo};
    for (double cand : {0.3 * R, 3.0 * R,
                        std::max(6.0 * R, 0.55 * std::max(region.height_hint, 0.0))}) {
        if (cand > edges.back() * 1.5 && cand < rho_max * 0.7) edges.push_back(cand);
    }
    edges.push_back(rho_max);
    std::vector<Stratum> strata;
    double alloc_sum = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Stratum s;
        s.a = edges[i];
        s.b = edges[i + 1];
        s.log_law = s.a >= 0.3 * R;
        s.alloc = (s.a < 0.3 * R) ? 1.0 : (s.a < 3.0 * R ? 3.0 : 1.6);
        alloc_sum += s.alloc;
        strata.push_back(s);
    }
    for (auto& s : strata) s.alloc /= alloc_sum;
    return strata;
}

std::pair<double, double> combine_blocks(const std::vector<double>& means) {
    const std::size_t b = means.size();
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(b);
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= static_cast<double>(b) * static_cast<double>(b - 1);
    return {m, std::sqrt(var)};
}

// tail of the invariant measure beyond rho_max for geodesics still able to
// touch heights <= hh over the shadow disk
double high_tail_bound(const ShadowRegion& region, double rho_max,
                       double integrand_sup) {
    const double R = region.radius;
    const double hh = std::max(region.height_hint, R);
    const double mu = 4.0 * kPi * R * hh * hh / (3.0 * rho_max * rho_max * rho_max) +
                      8.0 * kPi * R * R / (rho_max * rho_max);
    return integrand_sup * mu / (2.0 * kPi);
}

// oriented-measure integral of fn over geodesics with half-chord in
// [rho_lo, rho_max] whose chord meets the region disk
template <class Fn>
Estimate oriented_integral(const ShadowRegion& region, double rho_lo,
                           GeodesicEstimatorOptions opt, Fn&& fn) {
    const double rho_max = GeodesicSampler::rho_max_for(region);
    const auto strata = build_strata(region, rho_lo, rho_max);
    double total = 0.0, var = 0.0;
    long long used = 0;

    for (std::size_t s = 0; s < strata.size(); ++s) {
        const Stratum& st = strata[s];
        const long long ns =
            std::max<long long>(opt.blocks, static_cast<long long>(st.alloc * opt.n));
        const long long per_block = std::max<long long>(1, ns / opt.blocks);
        std::vector<double> block_mean(opt.blocks, 0.0);

        parallel_blocks(opt.blocks, [&](int blk) {
            Substream rng(opt.seed, (static_cast<std::uint64_t>(s + 1) << 40) ^
                                        static_cast<std::uint64_t>(blk));
            double acc = 0.0;
            for (long long i = 0; i < per_block; ++i) {
                double rho, base_w;
                if (st.log_law) {
                    const double L = std::log(st.b / st.a);
                    rho = st.a * std::exp(L * rng.next_double());
                    base_w = L / (rho * rho);
                } else {
                    const double ia = 1.0 / (st.a * st.a), ib = 1.0 / (st.b * st.b);
                    rho = 1.0 / std::sqrt(ia - rng.next_double() * (ia - ib));
                    base_w = 0.5 * (ia - ib);
                }
                // chord midpoint uniform over the reachable disk
                const double cr = (region.radius + rho) * std::sqrt(rng.next_double());
                const double ca = rng.uniform(0.0, kTwoPi);
                const Vec2 mid = region.center + Vec2(cr * std::cos(ca), cr * std::sin(ca));
                const double phi = rng.uniform(0.0, kTwoPi);
                const Vec2 e{std::cos(phi), std::sin(phi)};
                const Vec2 z = mid - e * rho;
                const Vec2 w = mid + e * rho;
                const double val = fn(z, w);
                if (val == 0.0) continue;
                const double rr = region.radius + rho;
                acc += val * base_w * kPi * rr * rr * kTwoPi;
            }
            block_mean[blk] = acc / static_cast<double>(per_block);
        });

        const auto [m, se] = combine_blocks(block_mean);
        total += m;
        var += se * se;
        used += per_block * opt.blocks;
    }

    Estimate e;
    e.value = total;
    e.std_err = std::sqrt(var);
    e.n_samples = used;
    e.method = "monte-carlo";
    return e;
}

} // namespace

namespace {

IntersectionScene::Counts robust_count(const IntersectionScene& scene, Vec2 z,
                                       Vec2 w) {
    auto c = scene.count(z, w);
    for (int attempt = 1; c.degenerate && attempt < 5; ++attempt) {
        const double eps = 1e-9 * attempt;
        c = scene.count(z + Vec2(eps, 1.3 * eps), w + Vec2(1.1 * eps, 0.7 * eps));
    }
    return c;
}

double rho_floor(const ShadowRegion& region) {
    // nothing of the scene lies below floor_height, so no geodesic with a
    // smaller half-chord can touch it
    return std::max(1e-3 * region.radius, 0.8 * region.floor_height);
}

} // namespace

Estimate crofton_area(const IntersectionScene& scene, ShadowRegion region,
                      GeodesicEstimatorOptions opt) {
    Estimate e = oriented_integral(region, rho_floor(region), opt,
                                   [&](Vec2 z, Vec2 w) {
                                       return static_cast<double>(
                                           robust_count(scene, z, w).count);
                                   });
    // unoriented measure is half the oriented one; Crofton divides by pi
    e.value /= 2.0 * kPi;
    e.std_err /= 2.0 * kPi;
    e.error_bound =
        high_tail_bound(region, GeodesicSampler::rho_max_for(region), 2.0);
    return e;
}

Estimate banchoff_pohl_area(const IntersectionScene& scene, ShadowRegion region,
                            GeodesicEstimatorOptions opt) {
    Estimate e = oriented_integral(region, rho_floor(region), opt,
                                   [&](Vec2 z, Vec2 w) {
                                       const auto c = robust_count(scene, z, w);
                                       const double lam =
                                           static_cast<double>(c.signed_sum);
                                       return lam * lam;
                                   });
    e.value /= 2.0 * kPi;
    e.std_err /= 2.0 * kPi;
    e.error_bound =
        high_tail_bound(region, GeodesicSampler::rho_max_for(region), 2.0);
    return e;
}

Estimate banchoff_pohl_area(const MeshedSurface& m, GeodesicEstimatorOptions opt) {
    if (m.boundary_loops.empty())
        throw std::domain_error("banchoff_pohl_area: mesh has no boundary");
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    double zmax = 0.0;
    for (const Vec3& v : m.vertices) {
        lo.x = std::min(lo.x, v.x); lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x); hi.y = std::max(hi.y, v.y);
        zmax = std::max(zmax, v.z);
    }
    ShadowRegion region;
    region.center = (lo + hi) * 0.5;
    region.radius = 0.5 * std::hypot(hi.x - lo.x, hi.y - lo.y) + 1e-6;
    region.height_hint = zmax;
    auto mesh_copy = std::make_shared<MeshedSurface>(m);
    const auto scene = make_mesh_scene(mesh_copy);
    return banchoff_pohl_area(*scene, region, opt);
}

Estimate geodesic_term(const IntersectionScene& scene, const IdealCurve& c,
                       LinkingMode mode, ShadowRegion region,
                       GeodesicEstimatorOptions opt) {
    std::atomic<long long> audit{0};
    Estimate e = oriented_integral(region, rho_floor(region), opt,
                                   [&](Vec2 z, Vec2 w) {
        const auto rec = robust_count(scene, z, w);
        if (rec.count == 0) return 0.0;
        double lam_sq;
        if (mode == LinkingMode::CompactSigned) {
            lam_sq = static_cast<double>(rec.signed_sum) *
                     static_cast<double>(rec.signed_sum);
        } else {
            // for an exactly counted embedded surface the crossing parity
            // equals the endpoint separation; audit a subsample against the
            // winding test
            lam_sq = rec.count % 2 == 1 ? 1.0 : 0.0;
            if (audit.fetch_add(1) % 64 == 0) {
                try {
                    const int sep = c.separation(z, w);
                    if (sep != static_cast<int>(lam_sq))
                        throw std::runtime_error(
                            "geodesic_term: crossing parity disagrees with "
                            "separation (mesh/curve mismatch)");
                } catch (const OnCurveError&) {
                    // endpoint on the curve: measure-zero, skip the audit
                }
            }
        }
        const double val = static_cast<double>(rec.count) - lam_sq;
        if (val < 0.0)
            throw std::runtime_error(
                "geodesic_term: negative integrand sample (mesh/curve mismatch)");
        return val;
    });
    e.value /= 2.0 * kPi;
    e.std_err /= 2.0 * kPi;
    e.error_bound =
        high_tail_bound(region, GeodesicSampler::rho_max_for(region), 4.0);
    return e;
}

// ---------------------------------------- complete capped cylinder estimator

namespace detail {

namespace {
double safe_inv(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }
} // namespace

// int_{s in (a,b)} int_{t in (c,d), 0 < t-s <= gap} (t-s)^{-3} dt ds
// for cells strictly left of the diagonal (b <= c); a may be -inf, d +inf
double cell_integral(double a, double b, double c, double d, double gap) {
    // region A: t clipped by the window at s+gap
    const double a0 = std::max(a, c - gap);
    const double a1 = std::min(b, d - gap);
    double total = 0.0;
    if (a1 > a0) {
        total += 0.5 * (safe_inv(c - a1) - safe_inv(c - a0)) -
                 0.5 * (a1 - a0) / (gap * gap);
    }
    // region B: full t range (c,d)
    const double b0 = std::max(a, d - gap);
    if (b > b0) {
        total += 0.5 * (safe_inv(c - b) - safe_inv(c - b0)) -
                 0.5 * (safe_inv(d - b) - safe_inv(d - b0));
    }
    return total;
}

// per-line kernel: both-order pair sum of (#between - parity) over chords of
// length at most gap
double line_kernel(const std::vector<double>& s, double gap) {
    const int m = static_cast<int>(s.size());
    const double inf = std::numeric_limits<double>::infinity();
    double j = 0.0;
    for (int i = -1; i < m; ++i) {
        const double sa = i < 0 ? -inf : s[i];
        const double sb = i + 1 < m ? s[i + 1] : inf;
        if (!(sb > sa)) continue;
        for (int k = i + 1; k < m; ++k) {
            const int between = k - i;          // hits strictly inside (s,t)
            const int f = between - (between % 2);
            if (f == 0) continue;
            const double tc = s[k];
            const double td = k + 1 < m ? s[k + 1] : inf;
            if (!(td > tc)) continue;
            if (tc - sb >= gap) break; // farther cells are outside the window
            j += f * cell_integral(sa, sb, tc, td, gap);
        }
    }
    return 2.0 * j; // both orderings
}

} // namespace

Estimate geodesic_term_capped_full(std::shared_ptr<const ParamSurface> s,
                                   const IdealCurve& c,
                                   GeodesicEstimatorOptions opt,
                                   int mesh_resolution) {
    const auto info = capped_cylinder_info(*s);
    if (!info) throw std::invalid_argument("geodesic_term_capped_full: wrong surface");
    const double W = info->wall_top;

    // region covering curve, morph band and dome shadows
    const auto disk = c.bounding_disk();
    ShadowRegion region;
    region.center = disk.center;
    region.radius = std::max(disk.radius,
                             (info->section_center - disk.center).norm() +
                                 info->section_radius) +
                    1e-6;
    region.height_hint = info->cap_top;
    region.floor_height = 0.0;

    // piece 1: geodesics with half-chord <= W stay inside the vertical wall
    // zone, where 3D crossings project to 2D chord-curve crossings; the pair
    // kernel integrates the invariant measure over each line in closed form
    const long long n_lines = std::max<long long>(1000, opt.n / 2);
    const detail::ArcsineLineSampler sampler(c);
    const int blocks = opt.blocks;
    const long long per_block = std::max<long long>(1, n_lines / blocks);
    std::vector<double> block_mean(blocks, 0.0);
    parallel_blocks(blocks, [&](int blk) {
        Substream rng(opt.seed, 0x4c494e45ULL ^ static_cast<std::uint64_t>(blk));
        double acc = 0.0;
        for (long long i = 0; i < per_block; ++i) {
            const auto draw = sampler.draw(rng);
            const auto hits = line_curve_intersections(c, draw.line);
            if (hits.size() < 2) continue;
            std::vector<double> sv;
            sv.reserve(hits.size());
            for (const auto& h : hits) sv.push_back(h.s);
            acc += line_kernel(sv, 2.0 * W) * draw.weight;
        }
        block_mean[blk] = acc / static_cast<double>(per_block);
    });
    const auto [line_mean, line_se] = combine_blocks(block_mean);
    // oriented pair measure 4 dz dw / r^4 over the window, over pi, halved
    const double piece1 = 4.0 * line_mean / (2.0 * kPi);
    const double piece1_se = 4.0 * line_se / (2.0 * kPi);

    // piece 2: tall geodesics against the exact wall + meshed band and dome
    const auto scene = make_capped_cylinder_scene(s, 0.0, mesh_resolution);
    GeodesicEstimatorOptions opt2 = opt;
    opt2.n = std::max<long long>(1000, opt.n - n_lines);
    opt2.seed = opt.seed ^ 0x746f70ULL;
    Estimate high = oriented_integral(region, W, opt2, [&](Vec2 z, Vec2 w) {
        const auto rec = robust_count(*scene, z, w);
        if (rec.count == 0) return 0.0;
        const double lam_sq = rec.count % 2 == 1 ? 1.0 : 0.0;
        const double val = static_cast<double>(rec.count) - lam_sq;
        if (val < 0.0)
            throw std::runtime_error(
                "geodesic_term: negative integrand sample (mesh/curve mismatch)");
        return val;
    });

    Estimate e;
    e.value = piece1 + high.value / (2.0 * kPi);
    e.std_err = std::hypot(piece1_se, high.std_err / (2.0 * kPi));
    e.n_samples = per_block * blocks + high.n_samples;
    e.method = "monte-carlo";
    e.error_bound =
        high_tail_bound(region, GeodesicSampler::rho_max_for(region), 4.0);
    return e;
}

// ------------------------------------------------------------------ sampler

struct GeodesicSampler::Impl {
    ShadowRegion region;
    std::vector<Stratum> strata;
    double rho_max = 0.0;
    Substream rng;
    std::vector<double> cum_alloc;

    Impl(ShadowRegion r, std::uint64_t seed)
        : region(r), rng(seed, 0xabcdef1234ULL) {
        rho_max = GeodesicSampler::rho_max_for(r);
        strata = build_strata(r, rho_floor(r), rho_max);
        double c = 0.0;
        for (const auto& s : strata) {
            c += s.alloc;
            cum_alloc.push_back(c);
        }
        for (auto& v : cum_alloc) v /= c;
    }
};

GeodesicSampler::GeodesicSampler(ShadowRegion region, std::uint64_t master_seed)
    : impl_(std::make_shared<Impl>(region, master_seed)) {}

double GeodesicSampler::rho_max_for(const ShadowRegion& r) {
    return std::max(20.0 * r.radius, 2.0 * (r.height_hint + 2.0 * r.radius));
}

GeodesicSampler::Draw GeodesicSampler::next() {
    Impl& im = *impl_;
    const double pick = im.rng.next_double();
    std::size_t s = 0;
    while (s + 1 < im.strata.size() && pick > im.cum_alloc[s]) ++s;
    const Stratum& st = im.strata[s];
    const double frac = st.alloc / im.cum_alloc.back();
    double rho, base_w;
    if (st.log_law) {
        const double L = std::log(st.b / st.a);
        rho = st.a * std::exp(L * im.rng.next_double());
        base_w = L / (rho * rho);
    } else {
        const double ia = 1.0 / (st.a * st.a), ib = 1.0 / (st.b * st.b);
        rho = 1.0 / std::sqrt(ia - im.rng.next_double() * (ia - ib));
        base_w = 0.5 * (ia - ib);
    }
    const double cr = (im.region.radius + rho) * std::sqrt(im.rng.next_double());
    const double ca = im.rng.uniform(0.0, kTwoPi);
    const Vec2 mid =
        im.region.center + Vec2(cr * std::cos(ca), cr * std::sin(ca));
    const double phi = im.rng.uniform(0.0, kTwoPi);
    const Vec2 e{std::cos(phi), std::sin(phi)};
    Draw d;
    d.z = mid - e * rho;
    d.w = mid + e * rho;
    const double rr = im.region.radius + rho;
    d.weight = base_w * kPi * rr * rr * kTwoPi / frac;
    return d;
}

} // namespace hypint
