#include "htq/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "htq/errors.hpp"

namespace htq {

namespace {

constexpr double kFaceTol = 1e-9;

double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

// Phase-1 simplex feasibility check for { w >= 0 : A w = rhs }.
// Dimensions here are tiny (a handful of schedules, N <= 3 in practice).
bool lp_feasible(std::vector<std::vector<double>> a, std::vector<double> rhs) {
    const std::size_t rows = a.size();
    const std::size_t vars = rows == 0 ? 0 : a[0].size();
    if (rows == 0) return true;
    for (std::size_t r = 0; r < rows; ++r) {
        if (rhs[r] < 0.0) {
            rhs[r] = -rhs[r];
            for (auto& v : a[r]) v = -v;
        }
    }
    // tableau: vars real columns, then one artificial per row, then rhs
    const std::size_t cols = vars + rows + 1;
    std::vector<std::vector<double>> t(rows, std::vector<double>(cols, 0.0));
    std::vector<std::size_t> basis(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < vars; ++j) t[r][j] = a[r][j];
        t[r][vars + r] = 1.0;
        t[r][cols - 1] = rhs[r];
        basis[r] = vars + r;
    }
    // reduced costs for min(sum of artificials): z_j = -sum_r t[r][j] for real vars
    auto reduced = [&](std::size_t j) {
        double z = (j >= vars) ? 1.0 : 0.0;
        for (std::size_t r = 0; r < rows; ++r)
            if (basis[r] >= vars) z -= t[r][j];
        return z;
    };
    for (int iter = 0; iter < 10000; ++iter) {
        // Bland's rule: smallest index with negative reduced cost
        std::size_t enter = cols - 1;
        for (std::size_t j = 0; j < vars + rows; ++j) {
            if (reduced(j) < -1e-11) { enter = j; break; }
        }
        if (enter == cols - 1) break;
        std::size_t leave = rows;
        double best = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            if (t[r][enter] > 1e-11) {
                const double ratio = t[r][cols - 1] / t[r][enter];
                if (leave == rows || ratio < best - 1e-15 ||
                    (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
        }
        if (leave == rows) break;  // unbounded cannot happen in phase 1
        const double piv = t[leave][enter];
        for (auto& v : t[leave]) v /= piv;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == leave) continue;
            const double f = t[r][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) t[r][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        if (basis[r] >= vars) infeasibility += t[r][cols - 1];
    return infeasibility <= 1e-8;
}

}  // namespace

double CapacityFace::c_dot_c() const { return dot(c, c); }

void CapacityFace::validate() const {
    bool positive = false;
    for (double v : c) {
        if (v < 0.0) throw ValidationError("face: normal components must be >= 0");
        if (v > 0.0) positive = true;
    }
    if (!positive) throw ValidationError("face: normal has no strictly positive entry");
    if (anchor.size() != c.size())
        throw ValidationError("face: anchor dimension does not match normal");
    if (std::abs(dot(c, anchor) - b) > kFaceTol)
        throw ValidationError("face: anchor is not on the face (<c,anchor> != b)");
    if (delta && *delta <= 0.0) throw ValidationError("face: delta must be > 0");
}

std::vector<std::int64_t> dispatch_jsq(const std::vector<std::int64_t>& q, std::int64_t a_total,
                                       Rng& rng) {
    std::vector<std::int64_t> a(q.size(), 0);
    if (q.empty()) throw ValidationError("dispatch_jsq: empty queue vector");
    const std::int64_t qmin = *std::min_element(q.begin(), q.end());
    std::size_t chosen = 0, seen = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] != qmin) continue;
        ++seen;
        if (seen == 1) chosen = i;
    }
    if (seen > 1) {
        std::size_t pick = rng.next_below(seen);
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (q[i] == qmin && pick-- == 0) { chosen = i; break; }
        }
    }
    a[chosen] = a_total;
    return a;
}

std::vector<std::int64_t> dispatch_random(const std::vector<std::int64_t>& q,
                                          std::int64_t a_total, Rng& rng) {
    if (q.empty()) throw ValidationError("dispatch_random: empty queue vector");
    std::vector<std::int64_t> a(q.size(), 0);
    for (std::int64_t k = 0; k < a_total; ++k) ++a[rng.next_below(q.size())];
    return a;
}

std::vector<std::size_t> maxweight_argmax_set(const std::vector<std::int64_t>& q,
                                              const ServiceSet& sset) {
    if (sset.schedules.empty()) throw ValidationError("maxweight: empty service set");
    std::vector<std::size_t> best;
    std::int64_t best_w = 0;
    for (std::size_t i = 0; i < sset.schedules.size(); ++i) {
        const auto& s = sset.schedules[i];
        if (s.size() != q.size()) throw ValidationError("maxweight: schedule dimension mismatch");
        std::int64_t w = 0;
        for (std::size_t n = 0; n < q.size(); ++n) w += q[n] * s[n];
        if (best.empty() || w > best_w) {
            best_w = w;
            best.clear();
        }
        if (w == best_w) best.push_back(i);
    }
    return best;
}

std::size_t maxweight_index(const std::vector<std::int64_t>& q, const ServiceSet& sset, Rng& rng) {
    const auto best = maxweight_argmax_set(q, sset);
    if (best.size() == 1) return best[0];
    return best[rng.next_below(best.size())];
}

std::vector<double> heavy_arrival_rates(const CapacityFace& face, double epsilon) {
    face.validate();
    if (epsilon < 0.0) throw ValidationError("heavy_arrival_rates: epsilon must be >= 0");
    std::vector<double> rates(face.c.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
        rates[i] = face.anchor[i] - epsilon * face.c[i];
        if (rates[i] < 0.0)
            throw ValidationError("heavy_arrival_rates: negative rate at queue " +
                                  std::to_string(i));
    }
    return rates;
}

std::pair<std::vector<double>, std::vector<double>> project_onto_face(
    const std::vector<double>& q, const CapacityFace& face) {
    face.validate();
    if (q.size() != face.c.size())
        throw ValidationError("project_onto_face: dimension mismatch");
    const double scale = dot(face.c, q) / face.c_dot_c();
    std::vector<double> par(q.size()), perp(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        par[i] = scale * face.c[i];
        perp[i] = q[i] - par[i];
    }
    return {std::move(par), std::move(perp)};
}

FaceValidation validate_face(const ServiceSet& sset, const CapacityFace& face) {
    face.validate();
    if (sset.schedules.empty()) throw ValidationError("validate_face: empty service set");
    FaceValidation report;
    report.all_within = true;
    for (std::size_t i = 0; i < sset.schedules.size(); ++i) {
        const auto& s = sset.schedules[i];
        if (s.size() != face.c.size())
            throw ValidationError("validate_face: schedule dimension mismatch");
        double v = 0.0;
        for (std::size_t n = 0; n < s.size(); ++n) v += face.c[n] * static_cast<double>(s[n]);
        if (v > face.b + kFaceTol) {
            report.all_within = false;
            report.violating.push_back(i);
        } else if (std::abs(v - face.b) <= kFaceTol) {
            report.on_face.push_back(i);
        }
    }
    if (report.on_face.empty())
        throw ValidationError("validate_face: no schedule attains <c,S> = b; face is invalid");

    // anchor in conv{face schedules}: A w = anchor, 1'w = 1, w >= 0
    const std::size_t n = face.c.size();
    std::vector<std::vector<double>> a(n + 1, std::vector<double>(report.on_face.size(), 0.0));
    std::vector<double> rhs(n + 1, 0.0);
    for (std::size_t col = 0; col < report.on_face.size(); ++col) {
        const auto& s = sset.schedules[report.on_face[col]];
        for (std::size_t r = 0; r < n; ++r) a[r][col] = static_cast<double>(s[r]);
        a[n][col] = 1.0;
    }
    for (std::size_t r = 0; r < n; ++r) rhs[r] = face.anchor[r];
    rhs[n] = 1.0;
    report.anchor_in_hull = lp_feasible(std::move(a), std::move(rhs));
    return report;
}

}  // namespace htq
