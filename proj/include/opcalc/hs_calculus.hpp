// nu-dimensional Helffer-Sjostrand functional calculus by quadrature:
//
//   f(A) = C_nu sum_l int_{C^nu} dbar_l f~(z) (A_l - conj(z_l)) |A-z|^(-2 nu) dz,
//   C_nu = (nu-1)! / pi^nu.
//
// The u integration uses composite Gauss-Legendre panels graded
// geometrically out to a truncation radius; for each u node the v axes use
// geometrically graded panels on [-c<u>, c<u>], the support cone of f~.
// Nodes never touch v = 0.  Node evaluations are independent; the node set
// is partitioned across threads with a fixed reduction order.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "opcalc/almost_analytic.hpp"
#include "opcalc/operator_model.hpp"

namespace opcalc {

inline double hs_constant(int nu) {
    if (nu < 1) throw std::domain_error("hs_constant: nu must be >= 1");
    double r = static_cast<double>(integer_factorial(nu - 1));
    for (int k = 0; k < nu; ++k) r /= 3.14159265358979323846264338327950288;
    return r;
}

struct QuadratureSpec {
    double u_radius = 256.0;     // truncation of each u axis
    double u_panel_base = 2.0;   // panels [0,b],[b,2b],[2b,4b],... mirrored
    int u_nodes_per_panel = 12;
    int v_depth = 5;             // v panels [0,R/2^d],...,[R/2,R] per half axis
    int v_nodes_per_panel = 8;
    int refine_levels = 1;

    QuadratureSpec refined() const {
        QuadratureSpec r = *this;
        r.u_radius *= 2.0;
        r.u_nodes_per_panel = u_nodes_per_panel + (u_nodes_per_panel + 1) / 2;
        r.v_nodes_per_panel = v_nodes_per_panel + (v_nodes_per_panel + 1) / 2;
        r.v_depth += 1;
        return r;
    }
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1], Newton on the Legendre recurrence.
inline void gauss_legendre(int q, std::vector<double>& x, std::vector<double>& w) {
    x.resize(static_cast<std::size_t>(q));
    w.resize(static_cast<std::size_t>(q));
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < q; ++i) {
        double t = std::cos(pi * (i + 0.75) / (q + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= q; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = q * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = t;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

struct Grid1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline Grid1D panelled_grid(const std::vector<double>& breakpoints, int q) {
    std::vector<double> gx, gw;
    gauss_legendre(q, gx, gw);
    Grid1D g;
    for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
        const double a = breakpoints[p], b = breakpoints[p + 1];
        const double mid = (a + b) / 2, half = (b - a) / 2;
        for (int i = 0; i < q; ++i) {
            g.nodes.push_back(mid + half * gx[static_cast<std::size_t>(i)]);
            g.weights.push_back(half * gw[static_cast<std::size_t>(i)]);
        }
    }
    return g;
}

// Symmetric u grid: geometric panels 0, b, 2b, ..., U, mirrored to negative.
inline Grid1D u_grid(const QuadratureSpec& spec) {
    std::vector<double> pts{0.0};
    double b = spec.u_panel_base;
    while (pts.back() < spec.u_radius) {
        pts.push_back(std::min(b, spec.u_radius));
        b *= 2.0;
    }
    std::vector<double> full;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) full.push_back(-*it);
    for (std::size_t i = 1; i < pts.size(); ++i) full.push_back(pts[i]);
    return panelled_grid(full, spec.u_nodes_per_panel);
}

// Symmetric v grid on [-R, R], geometric half-axis panels R/2^depth, ..., R.
inline Grid1D v_grid(double radius, const QuadratureSpec& spec) {
    std::vector<double> pts{0.0};
    for (int k = spec.v_depth; k >= 0; --k) pts.push_back(radius / std::pow(2.0, k));
    std::vector<double> full;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) full.push_back(-*it);
    for (std::size_t i = 1; i < pts.size(); ++i) full.push_back(pts[i]);
    return panelled_grid(full, spec.v_nodes_per_panel);
}

inline int thread_count() {
    if (const char* env = std::getenv("OPCALC_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

}  // namespace detail

// Runs fn(z, dbar f~(z), weight) over every quadrature node; dbar is
// evaluated here so the base partials are computed once per u column rather
// than per node.  The flattened u grid is split into a fixed layout of 64
// chunks with one accumulator each, combined in chunk order, so the result
// is bit-identical for any thread count.
template <typename Acc>
void quad_reduce(
    const QuadratureSpec& spec, const AlmostAnalytic& ext,
    const std::function<void(const Eigen::VectorXcd&, const Eigen::VectorXcd&, double, Acc&)>&
        fn,
    const std::function<Acc()>& make_zero,
    const std::function<void(Acc&, const Acc&)>& join, Acc& result) {
    const int nu = ext.nu();
    const detail::Grid1D ug = detail::u_grid(spec);
    const std::size_t un = ug.nodes.size();

    // Flatten the tensor u grid.
    std::size_t total_u = 1;
    for (int j = 0; j < nu; ++j) total_u *= un;

    // Fixed chunk layout: 64 chunks regardless of thread count.
    const std::size_t n_chunks = std::min<std::size_t>(64, total_u);
    std::vector<Acc> partial;
    partial.reserve(n_chunks);
    for (std::size_t c = 0; c < n_chunks; ++c) partial.push_back(make_zero());

    auto run_chunk = [&](std::size_t c) {
        const std::size_t lo = total_u * c / n_chunks;
        const std::size_t hi = total_u * (c + 1) / n_chunks;
        Acc& acc = partial[c];
        Eigen::VectorXd u(nu), v(nu);
        Eigen::VectorXcd z(nu);
        for (std::size_t flat = lo; flat < hi; ++flat) {
            std::size_t rem = flat;
            double wu = 1.0;
            for (int j = 0; j < nu; ++j) {
                const std::size_t idx = rem % un;
                rem /= un;
                u[j] = ug.nodes[idx];
                wu *= ug.weights[idx];
            }
            const double radius = ext.support_radius(u);
            const detail::Grid1D vg = detail::v_grid(radius, spec);
            const std::size_t vn = vg.nodes.size();
            std::size_t total_v = 1;
            for (int j = 0; j < nu; ++j) total_v *= vn;
            const AlmostAnalytic::UCache cache = ext.prepare_u(u);
            for (std::size_t vflat = 0; vflat < total_v; ++vflat) {
                std::size_t vrem = vflat;
                double wv = 1.0;
                for (int j = 0; j < nu; ++j) {
                    const std::size_t idx = vrem % vn;
                    vrem /= vn;
                    v[j] = vg.nodes[idx];
                    z[j] = std::complex<double>(u[j], v[j]);
                    wv *= vg.weights[idx];
                }
                fn(z, ext.dbar_all(cache, v), wu * wv, acc);
            }
        }
    };

    const int threads = detail::thread_count();
    if (threads <= 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        std::mutex mu;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                while (true) {
                    std::size_t c;
                    {
                        std::lock_guard<std::mutex> lk(mu);
                        if (next >= n_chunks) return;
                        c = next++;
                    }
                    run_chunk(c);
                }
            });
        for (auto& th : pool) th.join();
    }
    result = make_zero();
    for (std::size_t c = 0; c < n_chunks; ++c) join(result, partial[c]);
}

// Raw quadrature sum (without the C_nu prefactor), as diagonal values over
// the joint spectrum.  The kernel (A_l - conj(z_l)) |A-z|^(-2 nu) is diagonal
// in the shared basis, so the node loop works on scalars.
inline Eigen::VectorXcd hs_apply_raw_diag(const CommutingTuple& a, const AlmostAnalytic& ext,
                                          const QuadratureSpec& quad) {
    if (a.nu != ext.nu()) throw std::domain_error("hs_apply: dimension mismatch");
    const int nu = a.nu;
    const int d = a.dim;
    using Acc = Eigen::VectorXcd;
    Acc result;
    std::function<void(const Eigen::VectorXcd&, const Eigen::VectorXcd&, double, Acc&)> fn =
        [&](const Eigen::VectorXcd& z, const Eigen::VectorXcd& db, double w, Acc& acc) {
            if (db.isZero(0.0)) return;
            for (int k = 0; k < d; ++k) {
                const auto x = a.spectrum.row(k);
                double q = 0.0;
                for (int j = 0; j < nu; ++j) {
                    const double du = x[j] - z[j].real();
                    q += du * du + z[j].imag() * z[j].imag();
                }
                double rho = 1.0;
                for (int j = 0; j < nu; ++j) rho /= q;
                std::complex<double> s = 0.0;
                for (int l = 0; l < nu; ++l)
                    s += db[l] * std::complex<double>(x[l] - z[l].real(), z[l].imag());
                acc[k] += w * s * rho;
            }
        };
    quad_reduce<Acc>(
        quad, ext, fn, [d]() { return Acc(Acc::Zero(d)); },
        [](Acc& a1, const Acc& a2) { a1 += a2; }, result);
    return result;
}

inline Matrix hs_apply(const CommutingTuple& a, const AlmostAnalytic& ext,
                       const QuadratureSpec& quad) {
    const Eigen::VectorXcd diag = hs_constant(a.nu) * hs_apply_raw_diag(a, ext, quad);
    return a.basis * diag.asDiagonal() * a.basis.adjoint();
}

struct CalibrationResult {
    double constant = 0;       // least-squares scale against the spectral oracle
    double residual = 0;       // || c * raw - oracle ||_F
    double raw_norm = 0;
};

// Empirical determination of C_nu: the scalar c minimizing
// || c * (raw integral) - spectral_apply(A, f) ||_F.
inline CalibrationResult calibrate_constant(const CommutingTuple& a, const AlmostAnalytic& ext,
                                            const QuadratureSpec& quad) {
    const Eigen::VectorXcd raw = hs_apply_raw_diag(a, ext, quad);
    Eigen::VectorXd oracle(a.dim);
    for (int k = 0; k < a.dim; ++k)
        oracle[k] = ext.base()(a.spectrum.row(k).transpose());
    const double denom = raw.squaredNorm();
    CalibrationResult res;
    res.raw_norm = std::sqrt(denom);
    if (!(denom > 1e-24))
        throw std::domain_error("calibrate_constant: raw integral is numerically zero");
    double num = 0.0;
    for (int k = 0; k < a.dim; ++k) num += (std::conj(raw[k]) * oracle[k]).real();
    res.constant = num / denom;
    res.residual = (res.constant * raw - oracle.cast<std::complex<double>>()).norm();
    return res;
}

// Refinement-difference error proxy for the hs_apply result.
inline double quad_error_estimate(const CommutingTuple& a, const AlmostAnalytic& ext,
                                  const QuadratureSpec& quad) {
    QuadratureSpec fine = quad;
    for (int l = 0; l < std::max(1, quad.refine_levels); ++l) fine = fine.refined();
    return op_norm(hs_apply(a, ext, quad) - hs_apply(a, ext, fine));
}

}  // namespace opcalc
