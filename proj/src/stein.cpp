#include "htq/stein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "htq/errors.hpp"

namespace htq {

namespace {

// Weight e^{-beta t} is considered negligible below this.
constexpr double kWeightFloor = 1e-14;

struct QuadStatus {
    bool converged = true;
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                     double tol, int depth, QuadStatus& status) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol || (b - a) < 1e-13) {
        if (depth <= 0 && std::abs(err) > 15.0 * tol) status.converged = false;
        return left + right + err / 15.0;
    }
    if (depth <= 0) {
        status.converged = false;
        return left + right + err / 15.0;
    }
    return adaptive_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1, status) +
           adaptive_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1, status);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, QuadStatus& status) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = simpson(a, b, fa, fm, fb);
    return adaptive_step(f, a, b, fa, fm, fb, whole, tol, 48, status);
}

// Integrates f over [a,b] splitting at the sorted knot list first.
template <class F>
double integrate_with_knots(const F& f, double a, double b, const std::vector<double>& knots,
                            double tol, QuadStatus& status) {
    if (b <= a) return 0.0;
    double acc = 0.0;
    double lo = a;
    for (double k : knots) {
        if (k <= lo) continue;
        if (k >= b) break;
        acc += adaptive_simpson(f, lo, k, tol, status);
        lo = k;
    }
    acc += adaptive_simpson(f, lo, b, tol, status);
    return acc;
}

double log1p_exp(double y) {
    // log(1 + e^y) without overflow
    if (y > 36.0) return y;
    if (y < -36.0) return std::exp(y);
    return std::log1p(std::exp(y));
}

}  // namespace

void SteinParams::validate() const {
    if (sigma2 <= 0.0) throw ValidationError("stein: sigma2 must be > 0");
    if (theta <= 0.0) throw ValidationError("stein: theta must be > 0");
}

double stein_rate(const SteinParams& params) {
    params.validate();
    return 2.0 * params.theta / params.sigma2;
}

TestFunction TestFunction::identity() {
    TestFunction tf;
    tf.name = "identity";
    tf.h = [](double x) { return x; };
    tf.dh = [](double) { return 1.0; };
    tf.lip = 1.0;
    return tf;
}

TestFunction TestFunction::constant(double value) {
    TestFunction tf;
    tf.name = "constant";
    tf.h = [value](double) { return value; };
    tf.dh = [](double) { return 0.0; };
    tf.lip = 0.0;
    return tf;
}

TestFunction TestFunction::piecewise_linear(std::vector<double> knots,
                                            std::vector<double> slopes) {
    if (slopes.size() != knots.size() + 1)
        throw ValidationError("piecewise_linear: need one more slope than knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (knots[i] <= 0.0 || (i > 0 && knots[i] <= knots[i - 1]))
            throw ValidationError("piecewise_linear: knots must be positive and increasing");
    }
    // h at each knot, accumulated from h(0) = 0
    std::vector<double> hk(knots.size() + 1, 0.0);
    double prev = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        hk[i + 1] = hk[i] + slopes[i] * (knots[i] - prev);
        prev = knots[i];
    }
    double lip = 0.0;
    for (double s : slopes) lip = std::max(lip, std::abs(s));

    TestFunction tf;
    tf.name = "piecewise_linear";
    tf.knots = knots;
    tf.lip = lip;
    auto segment = [knots](double x) {
        std::size_t i = 0;
        while (i < knots.size() && x >= knots[i]) ++i;
        return i;
    };
    tf.h = [knots, slopes, hk, segment](double x) {
        const std::size_t i = segment(x);
        const double base = (i == 0) ? 0.0 : knots[i - 1];
        return hk[i] + slopes[i] * (x - base);
    };
    tf.dh = [slopes, segment](double x) { return slopes[segment(x)]; };
    return tf;
}

TestFunction TestFunction::soft_clip(double sharp, double center) {
    if (sharp <= 0.0) throw ValidationError("soft_clip: sharpness must be > 0");
    TestFunction tf;
    tf.name = "soft_clip";
    tf.h = [sharp, center](double x) { return log1p_exp(sharp * (x - center)) / sharp; };
    tf.dh = [sharp, center](double x) { return 1.0 / (1.0 + std::exp(-sharp * (x - center))); };
    tf.lip = 1.0;
    return tf;
}

TestFunction TestFunction::random_lip1(Rng& rng, double x_hi, int n_knots) {
    std::vector<double> knots(static_cast<std::size_t>(n_knots));
    for (auto& k : knots) k = x_hi * (0.05 + 0.9 * rng.next_unit());
    std::sort(knots.begin(), knots.end());
    // nudge duplicates apart
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (knots[i] <= knots[i - 1]) knots[i] = knots[i - 1] + 1e-9 * x_hi;
    std::vector<double> slopes(knots.size() + 1);
    for (auto& s : slopes) s = 2.0 * rng.next_unit() - 1.0;
    auto tf = piecewise_linear(std::move(knots), std::move(slopes));
    tf.name = "random_lip1";
    return tf;
}

SteinSolution solve_stein(const TestFunction& tf, const SteinParams& params,
                          const GridSpec& gridspec) {
    params.validate();
    if (gridspec.points < 16) throw ValidationError("solve_stein: grid too small");
    const double beta = stein_rate(params);
    const double mean_z = 1.0 / beta;
    const double x_max = gridspec.x_max > 0.0 ? gridspec.x_max : 12.0 * mean_z;
    // past x_max, integrands carry weight e^{-beta (t - x_max)}
    const double tail_cut = x_max + std::log(1.0 / kWeightFloor) / beta;

    SteinSolution sol;
    sol.params = params;
    sol.lip = tf.lip;

    // exponentially graded grid, dense near the boundary at 0
    const std::size_t npts = gridspec.points;
    sol.grid.resize(npts);
    const double s = gridspec.stretch;
    const double denom = std::expm1(s);
    for (std::size_t i = 0; i < npts; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(npts - 1);
        sol.grid[i] = x_max * std::expm1(s * t) / denom;
    }
    sol.grid.front() = 0.0;
    sol.grid.back() = x_max;

    const double h0 = tf.h(0.0);  // h(0) = 0 normalization
    auto h_norm = [&](double x) { return tf.h(x) - h0; };

    QuadStatus status;
    const double quad_tol = 1e-12 * std::max(1.0, tf.lip * mean_z);

    // E[h(Z)] against the exponential density
    const double ehz = integrate_with_knots(
        [&](double t) { return h_norm(t) * beta * std::exp(-beta * t); }, 0.0, tail_cut, tf.knots,
        quad_tol, status);
    sol.ehz = ehz;
    auto h_hat = [&](double x) { return h_norm(x) - ehz; };

    // J(x) = int_x^inf h_hat(t) e^{-beta (t - x)} dt by backward recursion;
    // the rescaling keeps every factor bounded by 1.
    std::vector<double> j(npts, 0.0);
    j[npts - 1] = integrate_with_knots(
        [&](double t) { return h_hat(t) * std::exp(-beta * (t - x_max)); }, x_max, tail_cut,
        tf.knots, quad_tol, status);
    for (std::size_t i = npts - 1; i-- > 0;) {
        const double a = sol.grid[i], b = sol.grid[i + 1];
        const double local = integrate_with_knots(
            [&](double t) { return h_hat(t) * std::exp(-beta * (t - a)); }, a, b, tf.knots,
            quad_tol, status);
        j[i] = local + std::exp(-beta * (b - a)) * j[i + 1];
    }

    if (!status.converged || !std::isfinite(ehz) || !std::isfinite(j[0]))
        throw NumericalError("solve_stein: quadrature did not converge (h not integrable "
                             "against the exponential weight?)");

    sol.f1.resize(npts);
    sol.f2.resize(npts);
    sol.f3.resize(npts);
    sol.residual.resize(npts);
    const double two_over_s2 = 2.0 / params.sigma2;
    for (std::size_t i = 0; i < npts; ++i) {
        sol.f1[i] = -two_over_s2 * j[i];
        sol.f2[i] = two_over_s2 * (h_hat(sol.grid[i]) + params.theta * sol.f1[i]);
        sol.f3[i] = two_over_s2 * (tf.dh(sol.grid[i]) + params.theta * sol.f2[i]);
        sol.residual[i] =
            0.5 * params.sigma2 * sol.f2[i] - params.theta * sol.f1[i] - h_hat(sol.grid[i]);
    }
    sol.boundary_f1 = sol.f1[0];
    return sol;
}

GradientBoundReport gradient_bounds_check(const SteinSolution& sol, double lip_const) {
    GradientBoundReport rep;
    rep.excess_f1 = rep.excess_f2 = rep.excess_f3 = -std::numeric_limits<double>::infinity();
    const double s2 = sol.params.sigma2, th = sol.params.theta;
    for (std::size_t i = 0; i < sol.grid.size(); ++i) {
        const double bound1 = (s2 + 2.0 * th * sol.grid[i]) / (2.0 * th * th) * lip_const;
        rep.excess_f1 = std::max(rep.excess_f1, std::abs(sol.f1[i]) - bound1);
        rep.excess_f2 = std::max(rep.excess_f2, std::abs(sol.f2[i]) - lip_const / th);
        rep.excess_f3 = std::max(rep.excess_f3, std::abs(sol.f3[i]) - 4.0 * lip_const / s2);
    }
    return rep;
}

double characterizing_residual(const std::function<double(double)>& f1,
                               const std::function<double(double)>& f2, double f1_at_0,
                               const SteinParams& params) {
    params.validate();
    const double beta = stein_rate(params);
    const double tail_cut = std::log(1.0 / kWeightFloor) / beta;
    QuadStatus status;
    const double value = adaptive_simpson(
        [&](double z) {
            return (0.5 * params.sigma2 * f2(z) - params.theta * f1(z)) * beta *
                   std::exp(-beta * z);
        },
        0.0, tail_cut, 1e-12, status);
    if (!status.converged || !std::isfinite(value))
        throw NumericalError("characterizing_residual: quadrature diverged");
    return value + params.theta * f1_at_0;
}

}  // namespace htq
