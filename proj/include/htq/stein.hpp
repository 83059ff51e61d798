#pragma once

#include <functional>
#include <string>
#include <vector>

#include "htq/rng.hpp"

namespace htq {

// Generator parameters of the reflected Brownian motion whose stationary law
// is Exp(2*theta/sigma2), i.e. mean sigma2/(2*theta).
struct SteinParams {
    double sigma2 = 1.0;
    double theta = 1.0;

    void validate() const;
};

// Exponential rate 2*theta/sigma2.
double stein_rate(const SteinParams& params);

// Lipschitz test function h with (one-sided) derivative and quadrature hints.
struct TestFunction {
    std::string name;
    std::function<double(double)> h;
    std::function<double(double)> dh;   // right-derivative where h has kinks
    double lip = 1.0;                   // sup |h'|
    std::vector<double> knots;          // split points for quadrature

    static TestFunction identity();
    static TestFunction constant(double value = 0.0);
    // Segments [0,k1), [k1,k2), ..., [km,inf) with the given slopes; h(0) = 0.
    static TestFunction piecewise_linear(std::vector<double> knots, std::vector<double> slopes);
    // Smooth Lip(1) ramp h(x) = log(1 + e^{sharp (x - center)}) / sharp.
    static TestFunction soft_clip(double sharp, double center);
    // Random piecewise-linear member of Lip(1) with knots in (0, x_hi).
    static TestFunction random_lip1(Rng& rng, double x_hi, int n_knots);
};

struct GridSpec {
    std::size_t points = 2048;
    double x_max = 0.0;     // 0 = auto: 12 * mean(Z)
    double stretch = 3.0;   // exponential grading toward 0
};

// f1/f2/f3 = f_h', f_h'', f_h''' of the solution to
//   (1/2) sigma2 f''(x) - theta f'(x) = h(x) - E[h(Z)],   f'(0) = 0.
struct SteinSolution {
    std::vector<double> grid;
    std::vector<double> f1, f2, f3;
    std::vector<double> residual;   // (1/2) sigma2 f2 - theta f1 - (h - E[h(Z)])
    SteinParams params;
    double ehz = 0.0;               // E[h(Z)] by quadrature
    double lip = 1.0;
    double boundary_f1 = 0.0;       // f1 at x = 0
};

// f1 comes from the tail-integral representation of the solution (evaluated
// by a scaled backward recursion over the grid, tail cut where the exponential
// weight drops below 1e-14); f2 from the algebraic rearrangement of the
// equation itself; f3 from the differentiated equation
//   (1/2) sigma2 f''' - theta f'' = h'.
SteinSolution solve_stein(const TestFunction& h, const SteinParams& params,
                          const GridSpec& grid = {});

struct GradientBoundReport {
    // max over the grid of |f_k| minus its bound; <= 0 means the bound holds.
    double excess_f1 = 0.0;   // bound (sigma2 + 2 theta x) / (2 theta^2) * lip
    double excess_f2 = 0.0;   // bound lip / theta
    double excess_f3 = 0.0;   // bound 4 lip / sigma2
    double slack_f1() const { return -excess_f1; }
    double slack_f2() const { return -excess_f2; }
    double slack_f3() const { return -excess_f3; }
    bool ok(double tol = 1e-6) const {
        return excess_f1 <= tol && excess_f2 <= tol && excess_f3 <= tol;
    }
};

GradientBoundReport gradient_bounds_check(const SteinSolution& sol, double lip_const);

// E[(1/2) sigma2 f2(Z) - theta f1(Z)] + theta * f1_at_0 for Z ~ Exp(2 theta / sigma2);
// zero (up to quadrature tolerance) whenever f has a Lipschitz derivative.
double characterizing_residual(const std::function<double(double)>& f1,
                               const std::function<double(double)>& f2, double f1_at_0,
                               const SteinParams& params);

}  // namespace htq
