#include "hypint/surface.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "hypint/quadrature.hpp"

namespace hypint {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Forms {
    double E, F, G;   // first fundamental form
    double L, M, N;   // second fundamental form w.r.t. unit normal
    Vec3 normal;
    double det1() const { return E * G - F * F; }
};

Forms fundamental_forms(const Jet2& j) {
    Forms f;
    f.E = j.ru.dot(j.ru);
    f.F = j.ru.dot(j.rv);
    f.G = j.rv.dot(j.rv);
    Vec3 n = j.ru.cross(j.rv);
    const double nn = n.norm();
    if (nn <= 0.0) throw std::domain_error("surface: degenerate first fundamental form");
    n = n / nn;
    f.normal = n;
    f.L = j.ruu.dot(n);
    f.M = j.ruv.dot(n);
    f.N = j.rvv.dot(n);
    return f;
}

// quintic-plus smoothstep: first three derivatives vanish at both ends
double sstep(double w) { return ((( -20 * w + 70) * w - 84) * w + 35) * w * w * w * w; }
double sstep1(double w) {
    const double a = w * (1 - w);
    return 140.0 * a * a * a;
}
double sstep2(double w) {
    const double a = w * (1 - w);
    return 420.0 * a * a * (1.0 - 2.0 * w);
}
// integral of sstep from 0 to x
double sstep_int(double x) {
    return (((-2.5 * x + 10) * x - 14) * x + 7) * x * x * x * x * x;
}

} // namespace

// ------------------------------------------------------------- curvature ops

std::pair<double, double> principal_curvatures(const ParamSurface& s, double u,
                                               double v) {
    const Jet2 j = s.jet(u, v);
    const Forms f = fundamental_forms(j);
    const double x3 = j.p.z;
    const double n3 = f.normal.z;
    const double det = f.det1();
    const double Ke = (f.L * f.N - f.M * f.M) / det;
    const double He = (f.E * f.N - 2.0 * f.F * f.M + f.G * f.L) / (2.0 * det);
    // hyperbolic shape operator x3 S_e + n3 Id: trace/det in closed form
    const double tr = 2.0 * (x3 * He + n3);
    const double dt = x3 * x3 * Ke + 2.0 * x3 * n3 * He + n3 * n3;
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - dt));
    return {0.5 * tr - disc, 0.5 * tr + disc};
}

double extrinsic_curvature(const ParamSurface& s, double u, double v) {
    const Jet2 j = s.jet(u, v);
    const Forms f = fundamental_forms(j);
    const double x3 = j.p.z;
    const double n3 = f.normal.z;
    const double det = f.det1();
    const double Ke = (f.L * f.N - f.M * f.M) / det;
    const double He = (f.E * f.N - 2.0 * f.F * f.M + f.G * f.L) / (2.0 * det);
    return x3 * x3 * Ke + 2.0 * x3 * n3 * He + n3 * n3;
}

double area_density(const ParamSurface& s, double u, double v) {
    const Jet2 j = s.jet(u, v);
    const Forms f = fundamental_forms(j);
    return std::sqrt(f.det1()) / (j.p.z * j.p.z);
}

// --------------------------------------------------------------- generators

namespace {

class HemisphereSurface final : public ParamSurface {
public:
    HemisphereSurface(Vec2 center, double radius)
        : c_(center), r_(radius),
          end_(IdealCurve::circle(center, radius)) {
        if (!(radius > 0)) throw std::invalid_argument("hemisphere: radius must be > 0");
    }

    Jet2 jet(double u, double v) const override {
        const double a = kTwoPi * u;
        const double ca = std::cos(a), sa = std::sin(a);
        const double cv = std::cos(v), sv = std::sin(v);
        Jet2 j;
        j.p = {c_.x + r_ * sv * ca, c_.y + r_ * sv * sa, r_ * cv};
        j.ru = {-r_ * sv * sa * kTwoPi, r_ * sv * ca * kTwoPi, 0.0};
        j.rv = {r_ * cv * ca, r_ * cv * sa, -r_ * sv};
        j.ruu = {-r_ * sv * ca * kTwoPi * kTwoPi, -r_ * sv * sa * kTwoPi * kTwoPi, 0.0};
        j.ruv = {-r_ * cv * sa * kTwoPi, r_ * cv * ca * kTwoPi, 0.0};
        j.rvv = {-r_ * sv * ca, -r_ * sv * sa, -r_ * cv};
        return j;
    }

    SurfaceKind kind() const override { return SurfaceKind::Hemisphere; }
    double v_min() const override { return 0.0; }
    double v_max() const override { return 0.5 * std::numbers::pi; }
    bool pole_at_v_min() const override { return true; }
    bool end_at_v_max() const override { return true; }
    std::pair<double, double> v_range_above(double h) const override {
        if (h >= r_) throw std::domain_error("truncate: height above the surface top");
        return {0.0, std::acos(h / r_)};
    }
    const IdealCurve* end_curve() const override { return &end_; }

    Vec2 c_;
    double r_;
    IdealCurve end_;
};

class GeodesicSphereSurface final : public ParamSurface {
public:
    GeodesicSphereSurface(const HPoint& center, double rho) {
        cz_ = center.x3 * std::cosh(rho);
        re_ = center.x3 * std::sinh(rho);
        cx_ = {center.x1, center.x2};
        if (!(re_ > 0)) throw std::invalid_argument("geodesic sphere: rho must be > 0");
    }

    Jet2 jet(double u, double v) const override {
        const double a = kTwoPi * u;
        const double ca = std::cos(a), sa = std::sin(a);
        const double cv = std::cos(v), sv = std::sin(v);
        Jet2 j;
        j.p = {cx_.x + re_ * sv * ca, cx_.y + re_ * sv * sa, cz_ + re_ * cv};
        j.ru = {-re_ * sv * sa * kTwoPi, re_ * sv * ca * kTwoPi, 0.0};
        j.rv = {re_ * cv * ca, re_ * cv * sa, -re_ * sv};
        j.ruu = {-re_ * sv * ca * kTwoPi * kTwoPi, -re_ * sv * sa * kTwoPi * kTwoPi, 0.0};
        j.ruv = {-re_ * cv * sa * kTwoPi, re_ * cv * ca * kTwoPi, 0.0};
        j.rvv = {-re_ * sv * ca, -re_ * sv * sa, -re_ * cv};
        return j;
    }

    SurfaceKind kind() const override { return SurfaceKind::GeodesicSphere; }
    double v_min() const override { return 0.0; }
    double v_max() const override { return std::numbers::pi; }
    bool pole_at_v_min() const override { return true; }
    bool pole_at_v_max() const override { return true; }
    std::pair<double, double> v_range_above(double h) const override {
        if (h <= cz_ - re_) return {0.0, std::numbers::pi};
        if (h >= cz_ + re_) throw std::domain_error("truncate: height above the sphere");
        return {0.0, std::acos((h - cz_) / re_)};
    }

    Vec2 cx_;
    double cz_ = 0.0, re_ = 0.0;
};

class SphericalCapSurface final : public ParamSurface {
public:
    explicit SphericalCapSurface(double beta) : beta_(beta) {
        if (!(beta > 0.0 && beta <= 0.5 * std::numbers::pi))
            throw std::invalid_argument("spherical cap: beta in (0, pi/2]");
        cz_ = std::cos(beta);
        vmax_ = std::numbers::pi - beta; // x3 = cz + cos(v) > 0
    }

    Jet2 jet(double u, double v) const override {
        const double a = kTwoPi * u;
        const double ca = std::cos(a), sa = std::sin(a);
        const double cv = std::cos(v), sv = std::sin(v);
        Jet2 j;
        j.p = {sv * ca, sv * sa, cz_ + cv};
        j.ru = {-sv * sa * kTwoPi, sv * ca * kTwoPi, 0.0};
        j.rv = {cv * ca, cv * sa, -sv};
        j.ruu = {-sv * ca * kTwoPi * kTwoPi, -sv * sa * kTwoPi * kTwoPi, 0.0};
        j.ruv = {-cv * sa * kTwoPi, cv * ca * kTwoPi, 0.0};
        j.rvv = {-sv * ca, -sv * sa, -cv};
        return j;
    }

    SurfaceKind kind() const override { return SurfaceKind::SphericalCap; }
    double v_min() const override { return 0.0; }
    double v_max() const override { return vmax_; }
    bool pole_at_v_min() const override { return true; }
    bool end_at_v_max() const override { return true; } // non-orthogonal end fixture
    std::pair<double, double> v_range_above(double h) const override {
        if (h >= cz_ + 1.0) throw std::domain_error("truncate: height above the cap");
        return {0.0, std::acos(std::max(-1.0, h - cz_))};
    }

    double beta_, cz_ = 0.0, vmax_ = 0.0;
};

class VerticalPlaneSurface final : public ParamSurface {
public:
    VerticalPlaneSurface(Vec2 base, Vec2 dir, double half_width, double v_lo, double v_hi)
        : base_(base), dir_(dir.normalized()), w_(half_width), lo_(v_lo), hi_(v_hi) {
        if (!(v_lo > 0)) throw std::invalid_argument("plane patch: v_lo must be > 0");
    }

    Jet2 jet(double u, double v) const override {
        const double x = (2.0 * u - 1.0) * w_;
        Jet2 j;
        j.p = {base_.x + x * dir_.x, base_.y + x * dir_.y, v};
        j.ru = {2.0 * w_ * dir_.x, 2.0 * w_ * dir_.y, 0.0};
        j.rv = {0.0, 0.0, 1.0};
        j.ruu = j.ruv = j.rvv = {0.0, 0.0, 0.0};
        return j;
    }

    SurfaceKind kind() const override { return SurfaceKind::VerticalPlanePatch; }
    double v_min() const override { return lo_; }
    double v_max() const override { return hi_; }
    bool u_periodic() const override { return false; }
    std::pair<double, double> v_range_above(double h) const override {
        return {std::max(lo_, h), hi_};
    }

    Vec2 base_, dir_;
    double w_, lo_, hi_;
};

// Cylinder over the curve closed by a shape morph to a round section and a
// C^3 profile-of-revolution dome: wall exactly vertical below wall_top.
class CappedCylinderSurface final : public ParamSurface {
public:
    CappedCylinderSurface(const IdealCurve& c, double cap_height, double blend)
        : curve_(c), H_(cap_height) {
        if (!(cap_height > 0) || !(blend > 0) || !(blend < 1))
            throw std::invalid_argument("capped cylinder: bad cap_height/blend");
        v0_ = H_ * (1.0 - blend);
        c0_ = c.bounding_disk().center;
        // mean section radius about the axis
        double r = 0.0;
        for (const Vec2& p : c.samples()) r += (p - c0_).norm();
        r0_ = r / static_cast<double>(c.samples().size());

        // star-shaped sections keep the morph embedded
        for (double w : {0.25, 0.5, 0.75}) {
            double prev = std::atan2((section(0.0, w) - c0_).y, (section(0.0, w) - c0_).x);
            double turn = 0.0;
            const int n = 1024;
            for (int i = 1; i <= n; ++i) {
                const Vec2 d = section(static_cast<double>(i) / n, w) - c0_;
                double a = std::atan2(d.y, d.x);
                double da = a - prev;
                while (da > std::numbers::pi) da -= kTwoPi;
                while (da < -std::numbers::pi) da += kTwoPi;
                if (c.is_ccw() ? (da <= 0) : (da >= 0))
                    throw std::runtime_error(
                        "capped cylinder: morph section not star-shaped (self-intersection)");
                turn += da;
            }
            (void)turn;
        }

        // dome profile: curvature ramps 0 -> k1 over arc length L1, then a
        // circular arc closes onto the axis with horizontal tangent
        const double lambda = 0.8;
        QuadResult jl = integrate_gk(
            [&](double x) { return std::sin(lambda * sstep_int(x)); }, 0.0, 1.0, 1e-14);
        k1_ = (lambda * jl.value + std::cos(0.5 * lambda)) / r0_;
        lambda_ = lambda;
        L1_ = lambda / k1_;
        s_end_ = L1_ + (0.5 * std::numbers::pi - 0.5 * lambda) / k1_;

        // cumulative ramp position table
        const int K = 512;
        knots_.resize(K + 1);
        cum_sin_.assign(K + 1, 0.0);
        cum_cos_.assign(K + 1, 0.0);
        for (int i = 0; i <= K; ++i) knots_[i] = L1_ * i / K;
        for (int i = 1; i <= K; ++i) {
            cum_sin_[i] = cum_sin_[i - 1] +
                          integrate_gk([&](double s) { return std::sin(phi(s)); },
                                       knots_[i - 1], knots_[i], 1e-15).value;
            cum_cos_[i] = cum_cos_[i - 1] +
                          integrate_gk([&](double s) { return std::cos(phi(s)); },
                                       knots_[i - 1], knots_[i], 1e-15).value;
        }
        rho_L1_ = r0_ - cum_sin_[K];
        z_L1_ = H_ + cum_cos_[K];
        arc_cr_ = rho_L1_ - std::cos(0.5 * lambda) / k1_; // ~0 by construction
        arc_cz_ = z_L1_ - std::sin(0.5 * lambda) / k1_;
        apex_z_ = arc_cz_ + 1.0 / k1_;
    }

    double phi(double s) const {
        if (s <= L1_) return lambda_ * sstep_int(s / L1_);
        return 0.5 * lambda_ + k1_ * (s - L1_);
    }
    double kappa(double s) const {
        if (s <= L1_) return k1_ * sstep(s / L1_);
        return k1_;
    }

    // dome profile (rho, z) at arc length s from the rim
    void profile(double s, double& rho, double& z) const {
        if (s <= L1_) {
            const int K = static_cast<int>(knots_.size()) - 1;
            int i = std::clamp(static_cast<int>(s / L1_ * K), 0, K - 1);
            const double s0 = knots_[i];
            const double ds_sin = integrate_gk(
                [&](double x) { return std::sin(phi(x)); }, s0, s, 1e-15).value;
            const double ds_cos = integrate_gk(
                [&](double x) { return std::cos(phi(x)); }, s0, s, 1e-15).value;
            rho = r0_ - (cum_sin_[i] + ds_sin);
            z = H_ + (cum_cos_[i] + ds_cos);
            return;
        }
        const double ph = phi(s);
        rho = arc_cr_ + std::cos(ph) / k1_;
        z = arc_cz_ + std::sin(ph) / k1_;
    }

    Vec2 section(double t, double w) const {
        const Vec2 e{std::cos(kTwoPi * t), std::sin(kTwoPi * t)};
        const Vec2 c = curve_.eval(t);
        return c + (c0_ + e * r0_ - c) * sstep(w);
    }

    Jet2 jet(double u, double v) const override {
        Jet2 j;
        if (v <= v0_) { // wall
            const Vec2 c = curve_.eval(u), c1 = curve_.d1(u), c2 = curve_.d2(u);
            j.p = {c.x, c.y, v};
            j.ru = {c1.x, c1.y, 0.0};
            j.rv = {0.0, 0.0, 1.0};
            j.ruu = {c2.x, c2.y, 0.0};
            j.ruv = j.rvv = {0.0, 0.0, 0.0};
            return j;
        }
        if (v <= H_) { // morph band
            const double span = H_ - v0_;
            const double w = (v - v0_) / span;
            const Vec2 e{std::cos(kTwoPi * u), std::sin(kTwoPi * u)};
            const Vec2 e1 = e.perp() * kTwoPi;
            const Vec2 e2 = -e * kTwoPi * kTwoPi;
            const Vec2 c = curve_.eval(u), c1 = curve_.d1(u), c2 = curve_.d2(u);
            const Vec2 D = c0_ + e * r0_ - c;
            const Vec2 D1 = e1 * r0_ - c1;
            const Vec2 D2 = e2 * r0_ - c2;
            const double b = sstep(w), b1 = sstep1(w) / span, b2 = sstep2(w) / (span * span);
            const Vec2 P = c + D * b;
            const Vec2 Pu = c1 + D1 * b;
            const Vec2 Pv = D * b1;
            const Vec2 Puu = c2 + D2 * b;
            const Vec2 Puv = D1 * b1;
            const Vec2 Pvv = D * b2;
            j.p = {P.x, P.y, v};
            j.ru = {Pu.x, Pu.y, 0.0};
            j.rv = {Pv.x, Pv.y, 1.0};
            j.ruu = {Puu.x, Puu.y, 0.0};
            j.ruv = {Puv.x, Puv.y, 0.0};
            j.rvv = {Pvv.x, Pvv.y, 0.0};
            return j;
        }
        // dome: v = H + s, surface of revolution about the axis through c0
        const double s = std::min(v - H_, s_end_);
        double rho = 0.0, z = 0.0;
        profile(s, rho, z);
        const double ph = phi(s), kp = kappa(s);
        const double cph = std::cos(ph), sph = std::sin(ph);
        const Vec2 e{std::cos(kTwoPi * u), std::sin(kTwoPi * u)};
        const Vec2 e1 = e.perp() * kTwoPi;
        const Vec2 e2 = -e * kTwoPi * kTwoPi;
        j.p = {c0_.x + rho * e.x, c0_.y + rho * e.y, z};
        j.ru = {rho * e1.x, rho * e1.y, 0.0};
        j.rv = {-sph * e.x, -sph * e.y, cph};
        j.ruu = {rho * e2.x, rho * e2.y, 0.0};
        j.ruv = {-sph * e1.x, -sph * e1.y, 0.0};
        j.rvv = {-kp * cph * e.x, -kp * cph * e.y, -kp * sph};
        return j;
    }

    SurfaceKind kind() const override { return SurfaceKind::CappedCylinder; }
    double v_min() const override { return 0.0; }
    double v_max() const override { return H_ + s_end_; }
    bool pole_at_v_max() const override { return true; }
    bool end_at_v_min() const override { return true; }
    std::pair<double, double> v_range_above(double h) const override {
        if (h >= apex_z_) throw std::domain_error("truncate: height above the apex");
        return {h, v_max()};
    }
    const IdealCurve* end_curve() const override { return &curve_; }

    IdealCurve curve_;
    double H_, v0_ = 0.0;
    Vec2 c0_;
    double r0_ = 0.0;
    double lambda_ = 0.0, k1_ = 0.0, L1_ = 0.0, s_end_ = 0.0;
    double rho_L1_ = 0.0, z_L1_ = 0.0, arc_cr_ = 0.0, arc_cz_ = 0.0, apex_z_ = 0.0;
    std::vector<double> knots_, cum_sin_, cum_cos_;
};

} // namespace

std::shared_ptr<ParamSurface> make_hemisphere(Vec2 center, double radius) {
    return std::make_shared<HemisphereSurface>(center, radius);
}
std::shared_ptr<ParamSurface> make_capped_cylinder(const IdealCurve& c,
                                                   double cap_height, double blend) {
    return std::make_shared<CappedCylinderSurface>(c, cap_height, blend);
}
std::shared_ptr<ParamSurface> make_geodesic_sphere(const HPoint& center, double rho) {
    return std::make_shared<GeodesicSphereSurface>(center, rho);
}
std::shared_ptr<ParamSurface> make_spherical_cap(double beta) {
    return std::make_shared<SphericalCapSurface>(beta);
}
std::shared_ptr<ParamSurface> make_vertical_plane_patch(Vec2 base, Vec2 dir,
                                                        double half_width, double v_lo,
                                                        double v_hi) {
    return std::make_shared<VerticalPlaneSurface>(base, dir, half_width, v_lo, v_hi);
}

std::optional<CappedCylinderInfo> capped_cylinder_info(const ParamSurface& s) {
    const auto* cc = dynamic_cast<const CappedCylinderSurface*>(&s);
    if (!cc) return std::nullopt;
    CappedCylinderInfo info;
    info.wall_top = cc->v0_;
    info.cap_top = cc->apex_z_;
    info.section_center = cc->c0_;
    info.section_radius = cc->r0_;
    return info;
}

// -------------------------------------------------------------- quadrature

namespace {

Estimate integrate_k(const ParamSurface& s, double v_lo, double v_hi, double tol) {
    auto f = [&](double u, double v) {
        return extrinsic_curvature(s, u, v) * area_density(s, u, v);
    };
    const QuadResult q = integrate_2d(f, 0.0, 1.0, v_lo, v_hi, tol);
    Estimate e;
    e.value = q.value;
    e.error_bound = q.error;
    e.n_samples = q.evals;
    e.method = "quadrature";
    return e;
}

} // namespace

Estimate total_curvature(const ParamSurface& s, double tol) {
    switch (s.kind()) {
        case SurfaceKind::SphericalCap:
            throw std::domain_error(
                "total_curvature: spherical cap has a non-orthogonal end (divergent)");
        case SurfaceKind::CappedCylinder: {
            // wall is ruled by vertical geodesics: K = 0 exactly below wall_top
            const auto info = capped_cylinder_info(s);
            return integrate_k(s, info->wall_top, s.v_max(), tol);
        }
        case SurfaceKind::Hemisphere: {
            const double clip = 1e-9;
            return integrate_k(s, s.v_min(), s.v_max() - clip, tol);
        }
        default:
            return integrate_k(s, s.v_min(), s.v_max(), tol);
    }
}

Estimate total_curvature_truncated(const ParamSurface& s, double h, double tol) {
    const auto [lo, hi] = s.v_range_above(h);
    if (s.kind() == SurfaceKind::CappedCylinder) {
        const auto info = capped_cylinder_info(s);
        return integrate_k(s, std::max(lo, info->wall_top), hi, tol);
    }
    return integrate_k(s, lo, hi, tol);
}

Truncation truncate(std::shared_ptr<const ParamSurface> s, double h) {
    if (!(h > 0)) throw std::invalid_argument("truncate: h must be > 0");
    Truncation t;
    t.parent = std::move(s);
    t.h = h;
    std::tie(t.v_lo, t.v_hi) = t.parent->v_range_above(h);
    return t;
}

Estimate area(const Truncation& t, double tol) {
    const ParamSurface& s = *t.parent;
    const QuadResult q = integrate_2d(
        [&](double u, double v) { return area_density(s, u, v); }, 0.0, 1.0, t.v_lo,
        t.v_hi, tol);
    Estimate e;
    e.value = q.value;
    e.error_bound = q.error;
    e.n_samples = q.evals;
    e.method = "quadrature";
    return e;
}

namespace {

Vec3 covariant_acc(const Vec3& pos, const Vec3& vel, const Vec3& acc) {
    const double x3 = pos.z;
    return {acc.x - 2.0 * vel.x * vel.z / x3, acc.y - 2.0 * vel.y * vel.z / x3,
            acc.z + (vel.x * vel.x + vel.y * vel.y - vel.z * vel.z) / x3};
}

} // namespace

Estimate geodesic_curvature_integral(const Truncation& t, double tol) {
    const ParamSurface& s = *t.parent;
    // boundary sits on the side where the clip happened; conormal points into
    // the surface interior
    const bool clip_hi = t.v_hi < s.v_max() - 1e-15;
    const bool clip_lo = t.v_lo > s.v_min() + 1e-15;
    if (clip_hi == clip_lo)
        throw std::domain_error("geodesic_curvature_integral: expected one boundary");
    const double vb = clip_hi ? t.v_hi : t.v_lo;
    const double inward = clip_hi ? -1.0 : +1.0;

    auto integrand = [&](double u) {
        const Jet2 j = s.jet(u, vb);
        const double x3 = j.p.z;
        const auto iph = [x3](const Vec3& a, const Vec3& b) {
            return a.dot(b) / (x3 * x3);
        };
        const Vec3 vel = j.ru;
        const Vec3 cov = covariant_acc(j.p, vel, j.ruu);
        Vec3 w = j.rv * inward;
        const double vv = iph(vel, vel);
        w = w - vel * (iph(w, vel) / vv);
        const double wn = std::sqrt(iph(w, w));
        const Vec3 nu = w / wn;
        const double kg = iph(cov, nu) / vv;
        return kg * std::sqrt(vv); // times ds = |vel| du
    };
    const QuadResult q = integrate_periodic(integrand, tol, 32);
    Estimate e;
    e.value = q.value;
    e.error_bound = q.error;
    e.n_samples = q.evals;
    e.method = "quadrature";
    return e;
}

// ------------------------------------------------------------------- meshes

int euler_characteristic(const MeshedSurface& m) {
    std::set<std::pair<int, int>> edges;
    for (const auto& tr : m.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tr[k], b = tr[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.insert({a, b});
        }
    }
    return static_cast<int>(m.vertices.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(m.triangles.size());
}

MeshedSurface mesh_band(const ParamSurface& s, double v_lo, double v_hi,
                        int resolution) {
    if (resolution < 8)
        throw std::runtime_error("mesh: resolution too coarse for embedding checks");
    const int nu = resolution;
    const int nv = resolution;
    const bool pole_lo = s.pole_at_v_min() && v_lo <= s.v_min() + 1e-15;
    const bool pole_hi = s.pole_at_v_max() && v_hi >= s.v_max() - 1e-15;
    const bool periodic = s.u_periodic();

    MeshedSurface m;
    std::vector<std::vector<int>> row_ids;

    const int iu_count = periodic ? nu : nu + 1;
    for (int iv = 0; iv <= nv; ++iv) {
        const double v = v_lo + (v_hi - v_lo) * iv / nv;
        const bool pole = (iv == 0 && pole_lo) || (iv == nv && pole_hi);
        std::vector<int> ids;
        if (pole) {
            Vec3 c{0, 0, 0};
            for (int iu = 0; iu < iu_count; ++iu) {
                const double u = static_cast<double>(iu) / nu;
                c += s.position(u, v);
            }
            c = c / iu_count;
            const int id = static_cast<int>(m.vertices.size());
            m.vertices.push_back(c);
            ids.assign(iu_count, id);
        } else {
            for (int iu = 0; iu < iu_count; ++iu) {
                const double u = static_cast<double>(iu) / nu;
                ids.push_back(static_cast<int>(m.vertices.size()));
                m.vertices.push_back(s.position(u, v));
            }
        }
        row_ids.push_back(std::move(ids));
    }

    auto at = [&](int iv, int iu) {
        const auto& row = row_ids[iv];
        if (periodic) return row[iu % nu];
        return row[iu];
    };
    for (int iv = 0; iv < nv; ++iv) {
        for (int iu = 0; iu < nu; ++iu) {
            const int a = at(iv, iu), b = at(iv, iu + 1);
            const int c = at(iv + 1, iu), d = at(iv + 1, iu + 1);
            if (a != b) {
                if (c != d) {
                    m.triangles.push_back({a, b, d});
                    m.triangles.push_back({a, d, c});
                } else {
                    m.triangles.push_back({a, b, c});
                }
            } else if (c != d) {
                m.triangles.push_back({a, d, c});
            }
        }
    }

    // boundary loops: edges incident to exactly one triangle, chained
    std::map<std::pair<int, int>, int> edge_count;
    std::map<int, int> boundary_next;
    for (const auto& tr : m.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tr[k], b = tr[(k + 1) % 3];
            int lo = std::min(a, b), hi = std::max(a, b);
            edge_count[{lo, hi}]++;
        }
    }
    for (const auto& tr : m.triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = tr[k], b = tr[(k + 1) % 3];
            int lo = std::min(a, b), hi = std::max(a, b);
            if (edge_count[{lo, hi}] == 1) boundary_next[a] = b; // oriented as in face
        }
    }
    std::set<int> seen;
    for (const auto& [start, next] : boundary_next) {
        if (seen.count(start)) continue;
        std::vector<int> loop;
        int cur = start;
        while (!seen.count(cur)) {
            seen.insert(cur);
            loop.push_back(cur);
            auto it = boundary_next.find(cur);
            if (it == boundary_next.end()) break;
            cur = it->second;
        }
        if (loop.size() >= 3) m.boundary_loops.push_back(std::move(loop));
    }

    // orientation consistency: no directed edge may repeat
    {
        std::set<std::pair<int, int>> directed;
        for (const auto& tr : m.triangles) {
            for (int k = 0; k < 3; ++k) {
                const auto e = std::make_pair(tr[k], tr[(k + 1) % 3]);
                if (!directed.insert(e).second)
                    throw std::runtime_error("mesh: inconsistent orientation");
            }
        }
    }

    m.euler_char = euler_characteristic(m);
    return m;
}

MeshedSurface mesh_surface(const ParamSurface& s, int resolution) {
    double lo = s.v_min();
    if (s.end_at_v_min()) lo = std::max(lo, 1e-3); // open end: mesh from a floor
    double hi = s.v_max();
    if (s.end_at_v_max()) hi = hi - 1e-3;
    return mesh_band(s, lo, hi, resolution);
}

MeshedSurface mesh_truncation(const Truncation& t, int resolution) {
    return mesh_band(*t.parent, t.v_lo, t.v_hi, resolution);
}

std::string mesh_to_text(const MeshedSurface& m) {
    std::ostringstream os;
    os.precision(17);
    for (const Vec3& v : m.vertices) os << "v " << v.x << " " << v.y << " " << v.z << "\n";
    for (const auto& t : m.triangles)
        os << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    return os.str();
}

} // namespace hypint
