#include "hypint/quadrature.hpp"

#include <cmath>
#include <vector>

namespace hypint {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1,1]
const double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
const double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
const double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct GkEval {
    double value;
    double err;
};

GkEval gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kXgk[i]);
        fv[14 - i] = f(c + h * kXgk[i]);
    }
    fv[7] = f(c);
    double kr = 0.0;
    for (int i = 0; i < 7; ++i) kr += kWgk[i] * (fv[i] + fv[14 - i]);
    kr += kWgk[7] * fv[7];
    double gs = kWg[3] * fv[7];
    for (int i = 0; i < 3; ++i) gs += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    return {kr * h, std::abs(kr - gs) * h};
}

void gk_adapt(const std::function<double(double)>& f, double a, double b, double tol,
              int depth, QuadResult& out) {
    const GkEval e = gk15(f, a, b);
    out.evals += 15;
    if (e.err <= tol || depth <= 0) {
        out.value += e.value;
        out.error += e.err;
        return;
    }
    const double m = 0.5 * (a + b);
    gk_adapt(f, a, m, 0.5 * tol, depth - 1, out);
    gk_adapt(f, m, b, 0.5 * tol, depth - 1, out);
}

} // namespace

QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
    QuadResult out;
    gk_adapt(f, a, b, abs_tol, max_depth, out);
    return out;
}

QuadResult integrate_periodic(const std::function<double(double)>& f, double abs_tol,
                              int n0, int n_max) {
    QuadResult out;
    int n = n0;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += f(static_cast<double>(i) / n);
    out.evals += n;
    double prev = sum / n;
    while (n < n_max) {
        // add midpoints of the current grid
        double add = 0.0;
        for (int i = 0; i < n; ++i) add += f((i + 0.5) / n);
        out.evals += n;
        sum += add;
        n *= 2;
        const double cur = sum / n;
        const double diff = std::abs(cur - prev);
        prev = cur;
        if (diff <= abs_tol) {
            out.value = cur;
            out.error = diff;
            return out;
        }
    }
    throw BudgetError("integrate_periodic: did not converge within budget");
}

namespace {

const double kG4x[2] = {0.339981043584856, 0.861136311594053};
const double kG4w[2] = {0.652145154862546, 0.347854845137454};

double gauss4x4(const std::function<double(double, double)>& f, double u0, double u1,
                double v0, double v1) {
    const double uc = 0.5 * (u0 + u1), uh = 0.5 * (u1 - u0);
    const double vc = 0.5 * (v0 + v1), vh = 0.5 * (v1 - v0);
    double s = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int si = -1; si <= 1; si += 2) {
            const double u = uc + si * uh * kG4x[i];
            for (int j = 0; j < 2; ++j) {
                for (int sj = -1; sj <= 1; sj += 2) {
                    const double v = vc + sj * vh * kG4x[j];
                    s += kG4w[i] * kG4w[j] * f(u, v);
                }
            }
        }
    }
    return s * uh * vh;
}

void adapt2d(const std::function<double(double, double)>& f, double u0, double u1,
             double v0, double v1, double tol, int depth, QuadResult& out) {
    const double coarse = gauss4x4(f, u0, u1, v0, v1);
    const double um = 0.5 * (u0 + u1), vm = 0.5 * (v0 + v1);
    const double fine = gauss4x4(f, u0, um, v0, vm) + gauss4x4(f, um, u1, v0, vm) +
                        gauss4x4(f, u0, um, vm, v1) + gauss4x4(f, um, u1, vm, v1);
    out.evals += 5 * 16;
    const double err = std::abs(fine - coarse);
    if (err <= tol || depth <= 0) {
        out.value += fine;
        out.error += err;
        return;
    }
    adapt2d(f, u0, um, v0, vm, 0.25 * tol, depth - 1, out);
    adapt2d(f, um, u1, v0, vm, 0.25 * tol, depth - 1, out);
    adapt2d(f, u0, um, vm, v1, 0.25 * tol, depth - 1, out);
    adapt2d(f, um, u1, vm, v1, 0.25 * tol, depth - 1, out);
}

} // namespace

QuadResult integrate_2d(const std::function<double(double, double)>& f, double u0,
                        double u1, double v0, double v1, double abs_tol, int max_depth) {
    QuadResult out;
    adapt2d(f, u0, u1, v0, v1, abs_tol, max_depth, out);
    return out;
}

} // namespace hypint
