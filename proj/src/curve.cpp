#include "hypint/curve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace hypint {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap01(double t) {
    t -= std::floor(t);
    return t;
}

// wrapped distance on the parameter circle
double torus_dist(double a, double b) {
    double d = std::abs(wrap01(a) - wrap01(b));
    return std::min(d, 1.0 - d);
}

class FourierShape final : public CurveShape {
public:
    FourierShape(std::vector<std::pair<double, double>> hx,
                 std::vector<std::pair<double, double>> hy)
        : hx_(std::move(hx)), hy_(std::move(hy)) {}

    Vec2 eval(double t) const override { return sum(t, 0); }
    Vec2 d1(double t) const override { return sum(t, 1); }
    Vec2 d2(double t) const override { return sum(t, 2); }

private:
    Vec2 sum(double t, int order) const {
        double x = 0.0, y = 0.0;
        const std::size_t n = std::max(hx_.size(), hy_.size());
        for (std::size_t k = 0; k < n; ++k) {
            const double w = kTwoPi * static_cast<double>(k);
            const double c = std::cos(w * t), s = std::sin(w * t);
            double fc = 1.0, fs = 1.0; // factors applied to (cos, sin) pair
            double cc = c, ss = s;
            switch (order) {
                case 0: break;
                case 1: fc = -w; fs = w; cc = s; ss = c; break;     // d/dt
                case 2: fc = -w * w; fs = -w * w; break;            // d2/dt2
            }
            if (k < hx_.size()) x += hx_[k].first * fc * cc + hx_[k].second * fs * ss;
            if (k < hy_.size()) y += hy_[k].first * fc * cc + hy_[k].second * fs * ss;
        }
        return {x, y};
    }

    std::vector<std::pair<double, double>> hx_, hy_;
};

class MobiusShape final : public CurveShape {
public:
    MobiusShape(MobiusMap m, std::shared_ptr<const CurveShape> base)
        : m_(m), base_(std::move(base)) {}

    Vec2 eval(double t) const override { return m_.apply(base_->eval(t)); }
    Vec2 d1(double t) const override {
        const auto z = to_complex(base_->eval(t));
        return to_vec(m_.derivative(z) * to_complex(base_->d1(t)));
    }
    Vec2 d2(double t) const override {
        const auto z = to_complex(base_->eval(t));
        const auto z1 = to_complex(base_->d1(t));
        const auto z2 = to_complex(base_->d2(t));
        return to_vec(m_.second_derivative(z) * z1 * z1 + m_.derivative(z) * z2);
    }

private:
    MobiusMap m_;
    std::shared_ptr<const CurveShape> base_;
};

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const auto side = [](Vec2 p, Vec2 q, Vec2 r) {
        return (q - p).cross(r - p);
    };
    const double s1 = side(a, b, c), s2 = side(a, b, d);
    const double s3 = side(c, d, a), s4 = side(c, d, b);
    return ((s1 > 0) != (s2 > 0)) && ((s3 > 0) != (s4 > 0));
}

double point_segment_dist(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    double u = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return (p - (a + ab * u)).norm();
}

} // namespace

// ------------------------------------------------------------------ locator

// Node-parity grid with exact ray-cast fallback in cells touching the curve.
struct IdealCurve::Locator {
    Vec2 lo, hi;
    int nx = 0, ny = 0;
    double dx = 0.0, dy = 0.0;
    std::vector<unsigned char> cell; // 0 outside, 1 inside, 2 needs exact test

    bool cell_known(int ix, int iy, bool& inside) const {
        const unsigned char c = cell[static_cast<std::size_t>(iy) * nx + ix];
        if (c == 2) return false;
        inside = (c == 1);
        return true;
    }
};

// ------------------------------------------------------------- construction

IdealCurve::IdealCurve(std::shared_ptr<const CurveShape> shape, CurveParams params)
    : shape_(std::move(shape)), params_(params) {
    validate_and_cache();
}

IdealCurve IdealCurve::from_harmonics(const std::vector<std::pair<double, double>>& hx,
                                      const std::vector<std::pair<double, double>>& hy,
                                      bool ccw, CurveParams params) {
    auto flip = [](std::vector<std::pair<double, double>> h) {
        for (auto& [c, s] : h) s = -s; // t -> -t
        return h;
    };
    IdealCurve c(std::make_shared<FourierShape>(hx, hy), params);
    if (c.is_ccw() != ccw) {
        c = IdealCurve(std::make_shared<FourierShape>(flip(hx), flip(hy)), params);
        c.hx_ = flip(hx);
        c.hy_ = flip(hy);
        return c;
    }
    c.hx_ = hx;
    c.hy_ = hy;
    return c;
}

IdealCurve IdealCurve::circle(Vec2 center, double radius, CurveParams params) {
    return from_harmonics({{center.x, 0.0}, {radius, 0.0}},
                          {{center.y, 0.0}, {0.0, radius}}, true, params);
}

IdealCurve IdealCurve::ellipse(double a, double b, CurveParams params) {
    return from_harmonics({{0.0, 0.0}, {a, 0.0}}, {{0.0, 0.0}, {0.0, b}}, true, params);
}

IdealCurve IdealCurve::mobius_image(const MobiusMap& m) const {
    const BoundaryPoint pole = m.pole();
    if (pole.finite()) {
        const auto [t, d] = closest_point(pole.p);
        if (d <= params_.eps_on)
            throw std::domain_error("mobius_image: pole lies on the curve");
        if (inside(pole.p))
            throw std::domain_error("mobius_image: pole inside the curve (image unbounded)");
    }
    return IdealCurve(std::make_shared<MobiusShape>(m, shape_), params_);
}

void IdealCurve::validate_and_cache() {
    const int n = params_.dense_samples;
    samples_.resize(n);
    double min_speed = std::numeric_limits<double>::max();
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        samples_[i] = shape_->eval(t);
        min_speed = std::min(min_speed, shape_->d1(t).norm());
    }
    if (min_speed < params_.eps_imm)
        throw std::domain_error("IdealCurve: not an immersion (|C'| too small)");

    // arc length and signed area by trapezoid on exact derivatives:
    // spectrally accurate for smooth periodic integrands
    double len = 0.0, area2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / n;
        const Vec2 p = samples_[i];
        const Vec2 v = shape_->d1(t);
        len += v.norm();
        area2 += p.cross(v);
    }
    arc_length_ = len / n;
    signed_area_ = 0.5 * area2 / n;

    Vec2 lo = samples_[0], hi = samples_[0];
    for (const Vec2& p : samples_) {
        lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y);
    }
    bounding_disk_.center = (lo + hi) * 0.5;
    double r = 0.0;
    for (const Vec2& p : samples_) r = std::max(r, (p - bounding_disk_.center).norm());
    const double seg = arc_length_ / n;
    bounding_disk_.radius = r + seg; // sagitta margin

    // simplicity scan: crossing test plus near-touch distance on the polyline
    {
        const double cell = std::max(4.0 * seg, 1e-12);
        const int gx = std::max(1, static_cast<int>((hi.x - lo.x) / cell) + 1);
        const int gy = std::max(1, static_cast<int>((hi.y - lo.y) / cell) + 1);
        std::vector<std::vector<int>> buckets(static_cast<std::size_t>(gx) * gy);
        auto bucket_of = [&](Vec2 p) {
            int ix = std::clamp(static_cast<int>((p.x - lo.x) / cell), 0, gx - 1);
            int iy = std::clamp(static_cast<int>((p.y - lo.y) / cell), 0, gy - 1);
            return static_cast<std::size_t>(iy) * gx + ix;
        };
        for (int i = 0; i < n; ++i) buckets[bucket_of(samples_[i])].push_back(i);
        const int guard = std::max(2, n / 512); // parameter-adjacent arcs excluded
        for (int i = 0; i < n; ++i) {
            const Vec2 a = samples_[i];
            const Vec2 b = samples_[(i + 1) % n];
            const int bx = static_cast<int>((a.x - lo.x) / cell);
            const int by = static_cast<int>((a.y - lo.y) / cell);
            for (int oy = -1; oy <= 1; ++oy) {
                for (int ox = -1; ox <= 1; ++ox) {
                    const int cx = bx + ox, cy = by + oy;
                    if (cx < 0 || cy < 0 || cx >= gx || cy >= gy) continue;
                    for (int j : buckets[static_cast<std::size_t>(cy) * gx + cx]) {
                        if (j <= i) continue;
                        const int gap = std::min(j - i, n - (j - i));
                        if (gap <= guard) continue;
                        const Vec2 cpt = samples_[j];
                        const Vec2 dpt = samples_[(j + 1) % n];
                        if (segments_cross(a, b, cpt, dpt))
                            throw std::domain_error("IdealCurve: self-intersection detected");
                        if (point_segment_dist(cpt, a, b) < params_.eps_self)
                            throw std::domain_error("IdealCurve: self-distance below tolerance");
                    }
                }
            }
        }
    }

    // locator grid: node parities by batched scanlines, cells crossed by the
    // polyline (with a sagitta margin) deferred to the exact test
    {
        auto loc = std::make_shared<Locator>();
        const double margin = 2.0 * seg;
        loc->lo = lo - Vec2(margin, margin);
        loc->hi = hi + Vec2(margin, margin);
        loc->nx = 192;
        loc->ny = 192;
        loc->dx = (loc->hi.x - loc->lo.x) / loc->nx;
        loc->dy = (loc->hi.y - loc->lo.y) / loc->ny;
        loc->cell.assign(static_cast<std::size_t>(loc->nx) * loc->ny, 0);

        // mark boundary cells (inflated by one cell around each sample segment)
        auto mark = [&](int ix, int iy) {
            if (ix < 0 || iy < 0 || ix >= loc->nx || iy >= loc->ny) return;
            loc->cell[static_cast<std::size_t>(iy) * loc->nx + ix] = 2;
        };
        for (int i = 0; i < n; ++i) {
            const Vec2 a = samples_[i];
            const Vec2 b = samples_[(i + 1) % n];
            const int steps = 1 + static_cast<int>((b - a).norm() /
                                                   std::min(loc->dx, loc->dy));
            for (int s = 0; s <= steps; ++s) {
                const Vec2 p = a + (b - a) * (static_cast<double>(s) / steps);
                const int ix = static_cast<int>((p.x - loc->lo.x) / loc->dx);
                const int iy = static_cast<int>((p.y - loc->lo.y) / loc->dy);
                for (int oy = -1; oy <= 1; ++oy)
                    for (int ox = -1; ox <= 1; ++ox) mark(ix + ox, iy + oy);
            }
        }
        // classify remaining cells by the parity of their center via scanline
        // against the polyline (cells away from the curve: polyline parity is exact)
        for (int iy = 0; iy < loc->ny; ++iy) {
            const double y = loc->lo.y + (iy + 0.5) * loc->dy;
            std::vector<double> xs;
            for (int i = 0; i < n; ++i) {
                const Vec2 a = samples_[i];
                const Vec2 b = samples_[(i + 1) % n];
                if ((a.y > y) == (b.y > y)) continue;
                xs.push_back(a.x + (b.x - a.x) * (y - a.y) / (b.y - a.y));
            }
            std::sort(xs.begin(), xs.end());
            for (int ix = 0; ix < loc->nx; ++ix) {
                auto& c = loc->cell[static_cast<std::size_t>(iy) * loc->nx + ix];
                if (c == 2) continue;
                const double x = loc->lo.x + (ix + 0.5) * loc->dx;
                const std::size_t crossings =
                    xs.end() - std::upper_bound(xs.begin(), xs.end(), x);
                c = (crossings % 2 == 1) ? 1 : 0;
            }
        }
        locator_ = std::move(loc);
    }

    theta_once_ = std::make_shared<std::once_flag>();
}

double IdealCurve::curvature(double t) const {
    const Vec2 v = shape_->d1(t);
    const Vec2 a = shape_->d2(t);
    const double sp = v.norm();
    return v.cross(a) / (sp * sp * sp);
}

// ------------------------------------------------------------------ queries

std::vector<double> IdealCurve::level_crossings(Vec2 n, double c) const {
    const int N = params_.dense_samples;
    std::vector<double> roots;
    auto g = [&](double t) { return shape_->eval(t).dot(n) - c; };
    auto dg = [&](double t) { return shape_->d1(t).dot(n); };
    // sign scan on the cached polyline (hot path), exact refinement after
    double g0 = samples_[0].dot(n) - c;
    for (int i = 0; i < N; ++i) {
        const double t0 = static_cast<double>(i) / N;
        const double t1 = static_cast<double>(i + 1) / N;
        const double g1 = (i + 1 < N ? samples_[i + 1].dot(n) : samples_[0].dot(n)) - c;
        if ((g0 > 0) != (g1 > 0)) {
            double lo = t0, hi = t1, glo = g0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double gm = g(mid);
                if ((glo > 0) != (gm > 0)) hi = mid;
                else { lo = mid; glo = gm; }
                if (hi - lo < 1e-15) break;
            }
            double root = 0.5 * (lo + hi);
            for (int it = 0; it < 3; ++it) { // Newton polish
                const double d = dg(root);
                if (std::abs(d) < 1e-14) break;
                root -= g(root) / d;
            }
            roots.push_back(wrap01(root));
        }
        g0 = g1;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

std::pair<double, double> IdealCurve::closest_point(Vec2 p) const {
    const int N = params_.dense_samples;
    int best = 0;
    double bd = std::numeric_limits<double>::max();
    for (int i = 0; i < N; ++i) {
        const double d = (samples_[i] - p).norm2();
        if (d < bd) { bd = d; best = i; }
    }
    // Newton on f(t) = |C(t)-p|^2 / 2
    double t = static_cast<double>(best) / N;
    for (int it = 0; it < 40; ++it) {
        const Vec2 r = shape_->eval(t) - p;
        const Vec2 v = shape_->d1(t);
        const Vec2 a = shape_->d2(t);
        const double f1 = r.dot(v);
        const double f2 = v.dot(v) + r.dot(a);
        if (f2 <= 0) break;
        const double step = f1 / f2;
        t -= step;
        if (std::abs(step) < 1e-15) break;
    }
    t = wrap01(t);
    return {t, (shape_->eval(t) - p).norm()};
}

std::pair<double, double> IdealCurve::support(Vec2 n) const {
    const int N = params_.dense_samples;
    int best = 0;
    double bv = -std::numeric_limits<double>::max();
    for (int i = 0; i < N; ++i) {
        const double v = samples_[i].dot(n);
        if (v > bv) { bv = v; best = i; }
    }
    double t = static_cast<double>(best) / N;
    for (int it = 0; it < 40; ++it) {
        const double f1 = shape_->d1(t).dot(n);
        const double f2 = shape_->d2(t).dot(n);
        if (f2 >= 0) break; // not concave here; keep grid value
        const double step = f1 / f2;
        t -= step;
        if (std::abs(step) < 1e-15) break;
    }
    t = wrap01(t);
    const double val = shape_->eval(t).dot(n);
    return {t, std::max(val, bv)};
}

int IdealCurve::winding_number(Vec2 p) const {
    const auto [tc, dist] = closest_point(p);
    if (dist < params_.eps_on)
        throw OnCurveError("winding_number: point within eps_on of the curve");
    // exact horizontal ray cast: roots of C_y(t) = p.y, keep x > p.x
    int w = 0;
    for (double t : level_crossings({0.0, 1.0}, p.y)) {
        if (shape_->eval(t).x <= p.x) continue;
        const double dy = shape_->d1(t).y;
        w += (dy > 0) ? 1 : -1;
    }
    return w;
}

bool IdealCurve::inside(Vec2 p) const {
    const Locator& L = *locator_;
    if (p.x <= L.lo.x || p.y <= L.lo.y || p.x >= L.hi.x || p.y >= L.hi.y) return false;
    const int ix = std::min(static_cast<int>((p.x - L.lo.x) / L.dx), L.nx - 1);
    const int iy = std::min(static_cast<int>((p.y - L.lo.y) / L.dy), L.ny - 1);
    bool in = false;
    if (L.cell_known(ix, iy, in)) return in;
    // boundary cell: exact ray cast (points exactly on the curve count as outside)
    int w = 0;
    for (double t : level_crossings({0.0, 1.0}, p.y)) {
        if (shape_->eval(t).x <= p.x) continue;
        const double dy = shape_->d1(t).y;
        w += (dy > 0) ? 1 : -1;
    }
    return w % 2 != 0;
}

int IdealCurve::separation(Vec2 z, Vec2 w) const {
    const int wz = winding_number(z);
    const int ww = winding_number(w);
    return ((wz % 2 != 0) != (ww % 2 != 0)) ? 1 : 0;
}

OrientedCircleOrLine IdealCurve::tangent_circle(double t_y, Vec2 x) const {
    const Vec2 y = shape_->eval(t_y);
    const Vec2 d = x - y;
    if (d.norm() < params_.eps_on)
        throw std::domain_error("tangent_circle: x coincides with C(t_y)");
    const Vec2 T = tangent(t_y);
    const Vec2 N = T.perp();
    const double denom = 2.0 * N.dot(d);
    OrientedCircleOrLine out;
    if (std::abs(denom) < 1e-14 * d.norm2() || denom == 0.0) {
        out.is_line = true;
        out.line_point = y;
        out.line_dir = T;
        return out;
    }
    const double rho = d.norm2() / denom; // signed: center at y + rho*N
    out.center = y + N * rho;
    out.radius = std::abs(rho);
    out.orientation = rho > 0 ? +1 : -1;
    return out;
}

// principal value of the angle at x from the curve to the tangent circle
double IdealCurve::theta_principal(double t_x, double t_y) const {
    const Vec2 x = shape_->eval(t_x);
    const OrientedCircleOrLine k = tangent_circle(t_y, x);
    const Vec2 Tx = tangent(t_x);
    Vec2 D;
    if (k.is_line) {
        D = k.line_dir;
    } else {
        D = (x - k.center).perp() * static_cast<double>(k.orientation);
    }
    return std::atan2(Tx.cross(D), Tx.dot(D));
}

void IdealCurve::build_theta_grid() const {
    int n = params_.theta_grid;
    while (true) {
        auto grid = std::make_shared<ThetaGrid>();
        grid->n = n;
        grid->val.assign(static_cast<std::size_t>(n) * n, 0.0);
        auto at = [&](int i, int k) -> double& {
            return grid->val[static_cast<std::size_t>(i) * n + k];
        };
        // k indexes the wrapped offset t_y - t_x in (0,1); k = 0 is the diagonal
        bool ok = true;
        double max_jump = 0.0;
        for (int k = 1; k < n && ok; ++k) {
            for (int i = 0; i < n; ++i) {
                const double tx = static_cast<double>(i) / n;
                const double ty = wrap01(tx + static_cast<double>(k) / n);
                const double pv = theta_principal(tx, ty);
                // references one offset closer to the diagonal
                const double ref1 = at(i, k - 1);
                const double ref2 = at((i + 1) % n, k - 1);
                const double ref = 0.5 * (ref1 + ref2);
                const double unwrapped = pv + kTwoPi * std::round((ref - pv) / kTwoPi);
                max_jump = std::max(max_jump, std::abs(unwrapped - ref1));
                max_jump = std::max(max_jump, std::abs(unwrapped - ref2));
                at(i, k) = unwrapped;
            }
        }
        // along-offset neighbors
        for (int k = 1; k < n && ok; ++k)
            for (int i = 0; i < n; ++i)
                max_jump = std::max(max_jump, std::abs(at(i, k) - at((i + 1) % n, k)));
        // far side must come back to the diagonal
        for (int i = 0; i < n; ++i)
            max_jump = std::max(max_jump, std::abs(at(i, n - 1)));
        ok = max_jump < 0.5 * std::numbers::pi;
        if (ok) {
            theta_grid_ = std::move(grid);
            return;
        }
        if (n >= params_.theta_grid_max)
            throw ResolutionError(
                "theta: unwrapping ambiguity at maximum grid resolution; "
                "refine theta_grid_max or smooth the curve");
        n *= 2;
    }
}

double IdealCurve::theta(double t_x, double t_y) const {
    if (torus_dist(t_x, t_y) < params_.near_diagonal) return 0.0;
    std::call_once(*theta_once_, [this] { build_theta_grid(); });
    const ThetaGrid& g = *theta_grid_;
    const int n = g.n;
    const double u = wrap01(t_x) * n;
    const double d = wrap01(t_y - t_x) * n; // offset in grid units, in (0, n)
    const int i0 = static_cast<int>(u) % n;
    const int k0 = std::min(static_cast<int>(d), n - 1);
    const double fu = u - std::floor(u);
    const double fk = d - k0;
    auto at = [&](int i, int k) {
        if (k >= n) return 0.0; // offset n is the diagonal again
        return g.val[static_cast<std::size_t>(i % n) * n + k];
    };
    const double ref = (1 - fu) * ((1 - fk) * at(i0, k0) + fk * at(i0, k0 + 1)) +
                       fu * ((1 - fk) * at(i0 + 1, k0) + fk * at(i0 + 1, k0 + 1));
    const double pv = theta_principal(t_x, t_y);
    return pv + kTwoPi * std::round((ref - pv) / kTwoPi);
}

bool IdealCurve::is_convex() const {
    const int N = params_.dense_samples;
    double lo = std::numeric_limits<double>::max();
    double hi = -lo;
    for (int i = 0; i < N; ++i) {
        const double k = curvature(static_cast<double>(i) / N);
        lo = std::min(lo, k);
        hi = std::max(hi, k);
    }
    return lo >= 0.0 || hi <= 0.0;
}

Vec2 IdealCurve::interior_point() const {
    // walk inward from the curve along the normal until strictly inside
    const Vec2 p0 = shape_->eval(0.0);
    const Vec2 N = tangent(0.0).perp() * (is_ccw() ? 1.0 : -1.0); // inward for ccw
    double step = bounding_disk_.radius * 0.1;
    for (int it = 0; it < 60; ++it) {
        const Vec2 cand = p0 + N * step;
        const auto [t, d] = closest_point(cand);
        if (d > 4.0 * params_.eps_on && inside(cand)) return cand;
        step *= 0.7;
    }
    throw std::runtime_error("interior_point: search failed");
}

// ---------------------------------------------------------------------- io

IdealCurve curve_from_json_text(const std::string& text, CurveParams params) {
    const auto j = nlohmann::json::parse(text);
    std::vector<std::pair<double, double>> hx, hy;
    for (const auto& p : j.at("harmonics_x"))
        hx.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    for (const auto& p : j.at("harmonics_y"))
        hy.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    const std::string orient = j.value("orientation", "ccw");
    if (orient != "ccw" && orient != "cw")
        throw std::invalid_argument("curve file: orientation must be ccw or cw");
    return IdealCurve::from_harmonics(hx, hy, orient == "ccw", params);
}

std::string curve_to_json_text(const IdealCurve& c) {
    nlohmann::json j;
    j["harmonics_x"] = nlohmann::json::array();
    j["harmonics_y"] = nlohmann::json::array();
    for (const auto& [a, b] : c.harmonics_x()) j["harmonics_x"].push_back({a, b});
    for (const auto& [a, b] : c.harmonics_y()) j["harmonics_y"].push_back({a, b});
    j["orientation"] = c.is_ccw() ? "ccw" : "cw";
    return j.dump(2);
}

} // namespace hypint
