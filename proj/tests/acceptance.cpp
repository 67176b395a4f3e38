// Acceptance gate: twelve go/no-go checks across the three rigor tiers
// (exact symbolic identities, machine-precision matrix identities at fixed z,
// and quadrature-tolerance functional-calculus checks).  Prints one
// [PASS]/[FAIL] line per criterion and exits with the failure count.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "opcalc/expansion.hpp"

using namespace opcalc;
using cd = std::complex<double>;
using clk = std::chrono::steady_clock;

namespace {

int failures = 0;

double secs(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] %02d %s (%s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

ComplexVector generic_z(int nu) {
    ComplexVector z(nu);
    for (int j = 0; j < nu; ++j) z[j] = cd(0.3 + 0.15 * j, 0.6 - 0.1 * j);
    return z;
}

double rel_residual(const Matrix& lhs, const Matrix& rhs) {
    const double scale = std::max(op_norm(lhs), 1e-30);
    return op_norm(lhs - rhs) / scale;
}

Matrix commutator(const Matrix& x, const Matrix& y) { return x * y - y * x; }

// --- tier 1: exact rational arithmetic ------------------------------------

void c01() {
    const auto t0 = clk::now();
    int checked = 0;
    bool ok = true;
    for (int nu = 1; nu <= 3; ++nu)
        for (int k = 0; k <= 6; ++k)
            for (const MultiIndex& alpha : enumerate_degree(nu, k)) {
                ok = ok && derivative_of_g(alpha) == lemma0_closed_form(alpha);
                ++checked;
            }
    const double el = secs(t0);
    ok = ok && el < 60.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d indices, nu<=3, |alpha|<=6, %.1fs", checked, el);
    report(1, "closed-form derivative of g equals the folded derivative, exactly", ok, buf);
}

void c02() {
    int checked = 0;
    bool ok = true;
    for (int nu = 1; nu <= 3; ++nu)
        for (int k = 0; k <= 6; ++k)
            for (const MultiIndex& alpha : enumerate_degree(nu, k))
                for (const MultiIndex& beta : enumerate_half(alpha))
                    for (int j = 1; j <= nu; ++j) {
                        ok = ok && check_h1(alpha, beta, j) && check_h2(alpha, beta, j);
                        ++checked;
                    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d (alpha, beta, axis) triples, exact", checked);
    report(2, "T-coefficient recursions hold exactly", ok, buf);
}

// --- tier 2: machine-precision matrix identities ---------------------------

void c03() {
    double worst = 0;
    for (int nu = 1; nu <= 3; ++nu)
        for (int d : {4, 8})
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                const auto a = make_commuting_tuple(seed, nu, d, 2.0);
                const Matrix b = random_bounded(seed + 100, d);
                const ComplexVector z = generic_z(nu);
                const Matrix lhs = commutator(b, resolvent_kernel(a, z));
                const Matrix rhs = remainder_g(a, b, MultiIndex(nu), 0, z);
                worst = std::max(worst, rel_residual(lhs, rhs));
            }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max residual %.2e, nu<=3, d<=8, 20 seeds", worst);
    report(3, "base step: order-0 remainder reproduces [B, g(A)]", worst < 1e-10, buf);
}

void c04() {
    double worst = 0;
    for (int nu = 1; nu <= 2; ++nu)
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto a = make_commuting_tuple(seed * 31, nu, 8, 2.0);
            const Matrix b = random_bounded(seed, 8);
            const ComplexVector z = generic_z(nu);
            for (int n = 0; n <= 3; ++n)
                for (int deg0 = 0; deg0 <= 2; ++deg0)
                    for (const MultiIndex& alpha0 : enumerate_degree(nu, deg0)) {
                        const Matrix adb = iterated_commutator(a, b, alpha0);
                        const Matrix lhs = commutator(adb, resolvent_kernel(a, z));
                        Matrix taylor = Matrix::Zero(8, 8);
                        for (int k = 1; k <= n; ++k)
                            for (const MultiIndex& alpha : enumerate_degree(nu, k))
                                taylor +=
                                    1.0 / static_cast<double>(factorial(alpha)) *
                                    spectral_term_sum(
                                        a, differentiate(g_kernel(nu), alpha), z) *
                                    iterated_commutator(a, b, alpha0.plus(alpha));
                        const Matrix rhs = taylor + remainder_g(a, b, alpha0, n, z);
                        worst = std::max(worst, rel_residual(lhs, rhs));
                    }
        }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max residual %.2e, n<=3, |alpha0|<=2, nu<=2, d=8", worst);
    report(4, "kernel lemma identity for [ad^a0(B), g(A)]", worst < 1e-9, buf);
}

void c05() {
    double worst = 0;
    for (int nu = 1; nu <= 2; ++nu) {
        const ComplexVector z = generic_z(nu);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto a = make_commuting_tuple(seed * 13, nu, 6, 2.0);
            const Matrix b = random_bounded(seed + 3, 6);
            for (int l = 1; l <= nu; ++l) {
                const TermCombo combo = TermCombo::from(TermSum(Term{1, MultiIndex(nu), nu}))
                                            .times_factor(KernelFactor::gl(l), z);
                const Matrix kl =
                    spectral_term_sum(a, TermSum(Term{1, MultiIndex(nu), nu}), z) *
                    shifted_component(a, l, std::conj(z[l - 1]));
                const Matrix lhs = commutator(b, kl);
                for (int n = 0; n <= 2; ++n) {
                    Matrix taylor = Matrix::Zero(6, 6);
                    for (int k = 1; k <= n; ++k)
                        for (const MultiIndex& alpha : enumerate_degree(nu, k))
                            taylor += 1.0 / static_cast<double>(factorial(alpha)) *
                                      spectral_term_combo(a, combo.differentiated(alpha), z) *
                                      iterated_commutator(a, b, alpha);
                    const Matrix rhs = taylor + remainder_kernel(a, b, l, n, z);
                    worst = std::max(worst, rel_residual(lhs, rhs));
                }
            }
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max residual %.2e, n<=2, nu<=2, d=6, 20 seeds", worst);
    report(5, "full kernel-commutator expansion with remainder_kernel", worst < 1e-9, buf);
}

void c06() {
    double worst = 0;
    const ComplexVector z1 = generic_z(1);
    const ComplexVector z2 = generic_z(2);
    struct Case {
        int nu;
        std::vector<KernelFactor> factors;
    };
    const std::vector<Case> cases = {
        {1, {KernelFactor::g(), KernelFactor::gl(1)}},
        {1, {KernelFactor::g(), KernelFactor::gl(1), KernelFactor::g()}},
        {2, {KernelFactor::g(), KernelFactor::gl(2)}},
        {2, {KernelFactor::g(), KernelFactor::g(), KernelFactor::gl(1)}},
    };
    for (const auto& c : cases) {
        const ComplexVector& z = c.nu == 1 ? z1 : z2;
        for (std::uint64_t seed : {1, 2, 3}) {
            const auto a = make_commuting_tuple(seed, c.nu, 6, 2.0);
            const Matrix b = random_bounded(seed + 7, 6);
            Matrix prod = Matrix::Identity(6, 6);
            for (const auto& f : c.factors)
                prod = (prod * kernel_factor_operator(a, f, z)).eval();
            const Matrix lhs = commutator(b, prod);
            for (int n = 0; n <= 2; ++n) {
                const auto [sum, rem] = leibniz_expand(a, b, c.factors, n, z);
                worst = std::max(worst, rel_residual(lhs, sum + rem));
            }
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max residual %.2e over 2- and 3-factor products", worst);
    report(6, "Leibniz combination for kernel-factor products", worst < 1e-9, buf);
}

// --- tier 3: quadrature-tolerance checks -----------------------------------

QuadratureSpec quick_nu1() { return QuadratureSpec{}; }

QuadratureSpec tight_nu1() {
    QuadratureSpec q;
    q.u_nodes_per_panel = 20;
    q.v_depth = 10;
    q.v_nodes_per_panel = 14;
    return q;
}

QuadratureSpec quick_nu2() {
    QuadratureSpec q;
    q.u_radius = 16.0;
    q.u_nodes_per_panel = 8;
    q.v_depth = 3;
    q.v_nodes_per_panel = 5;
    return q;
}

QuadratureSpec tight_nu2() {
    QuadratureSpec q;
    q.u_radius = 64.0;
    q.u_panel_base = 0.5;
    q.u_nodes_per_panel = 8;
    q.v_depth = 4;
    q.v_nodes_per_panel = 8;
    return q;
}

void c07() {
    const auto t0 = clk::now();
    const auto a1 = make_commuting_tuple(42, 1, 6, 2.0);
    const auto e1 = build_extension(bracket_power(1, -2.0), 4);
    const auto cal1 = calibrate_constant(a1, e1, quick_nu1());
    const double rel1 = std::abs(cal1.constant - hs_constant(1)) / hs_constant(1);
    const auto a2 = make_commuting_tuple(42, 2, 4, 2.0);
    const auto e2 = build_extension(bracket_power(2, -2.0), 3);
    const auto cal2 = calibrate_constant(a2, e2, quick_nu2());
    const double rel2 = std::abs(cal2.constant - hs_constant(2)) / hs_constant(2);
    const double el = secs(t0);
    const bool ok = rel1 < 1e-3 && rel2 < 1e-2 && el < 300.0;
    char buf[128];
    std::snprintf(buf, sizeof buf, "1/pi rel err %.2e, 1/pi^2 rel err %.2e, %.1fs",
                  rel1, rel2, el);
    report(7, "calibration recovers the functional-calculus constants", ok, buf);
}

void c08() {
    // nu = 1, d = 8, f = <x>^-2
    const auto a1 = make_commuting_tuple(3, 1, 8, 2.0);
    const auto f1 = bracket_power(1, -2.0);
    const auto e1 = build_extension(f1, 4);
    const Matrix oracle1 =
        spectral_apply_real(a1, [&](const RealVector& x) { return f1(x); });
    const double err1 = op_norm(hs_apply(a1, e1, tight_nu1()) - oracle1);
    const double errq1 = op_norm(hs_apply(a1, e1, quick_nu1()) - oracle1);
    const double est1 = quad_error_estimate(a1, e1, quick_nu1());
    // nu = 2, d = 6
    const auto a2 = make_commuting_tuple(5, 2, 6, 2.0);
    const auto f2 = bracket_power(2, -2.0);
    const auto e2 = build_extension(f2, 3);
    const Matrix oracle2 =
        spectral_apply_real(a2, [&](const RealVector& x) { return f2(x); });
    const double err2 = op_norm(hs_apply(a2, e2, tight_nu2()) - oracle2);
    const double errq2 = op_norm(hs_apply(a2, e2, quick_nu2()) - oracle2);
    const double est2 = quad_error_estimate(a2, e2, quick_nu2());
    // consistency: the refinement-difference proxy tracks the true error of
    // the spec it was computed at, within a small factor
    const bool consistent = std::isfinite(est1) && std::isfinite(est2) &&
                            errq1 <= 3.0 * est1 && errq2 <= 3.0 * est2;
    const bool ok = err1 <= 1e-4 && err2 <= 1e-3 && consistent;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "nu=1 err %.2e (est %.2e vs %.2e), nu=2 err %.2e (est %.2e vs %.2e)",
                  err1, est1, errq1, err2, est2, errq2);
    report(8, "hs_apply matches the spectral oracle with a consistent error proxy", ok, buf);
}

void c09() {
    bool ok = true;
    double worst_margin = 0;  // max of err / (3 est)
    char detail[160] = "";
    for (int nu = 1; nu <= 2; ++nu) {
        const int d = nu == 1 ? 6 : 4;
        const auto a = make_commuting_tuple(41, nu, d, 2.0);
        const Matrix b = random_bounded(43, d);
        QuadratureSpec q;
        if (nu == 1) {
            q.u_radius = 32.0;
            q.u_nodes_per_panel = 24;
            q.v_depth = 10;
            q.v_nodes_per_panel = 16;
        } else {
            q.u_radius = 4.0;
            q.u_panel_base = 0.5;
            q.u_nodes_per_panel = 4;
            q.v_depth = 2;
            q.v_nodes_per_panel = 4;
        }
        for (int n : {1, 2}) {
            for (double lam : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
                const auto f = shifted_inverse_bracket(nu, lam);
                const auto ext = build_extension_flat(f, n + 2 * nu + (nu == 1 ? 2 : 5));
                const Matrix direct = remainder_direct(a, b, f, n);
                const Matrix coarse = remainder_integral(a, b, ext, n, q);
                const Matrix fine = remainder_integral(a, b, ext, n, q.refined());
                const double est = op_norm(coarse - fine);
                const double err = op_norm(coarse - direct);
                const double margin = err / std::max(3.0 * est, 1e-300);
                worst_margin = std::max(worst_margin, margin);
                if (margin > 1.0 && ok) {
                    ok = false;
                    std::snprintf(detail, sizeof detail,
                                  "first failure nu=%d n=%d lam=%.1f: err %.2e > 3 x %.2e",
                                  nu, n, lam, err, est);
                }
            }
        }
    }
    char buf[224];
    std::snprintf(buf, sizeof buf,
                  "max err/(3 est) = %.2f over nu<=2, n<=2, 5-point lambda grid%s%s",
                  worst_margin, ok ? "" : "; ", detail);
    report(9, "quadrature route agrees with the direct remainder within 3x its own proxy",
           ok, buf);
}

void c10() {
    bool ok = true;
    char buf[160];
    std::string detail;
    struct Setting {
        int nu, n;
        double t1, t2;
    };
    for (const Setting s : {Setting{1, 2, 1.0, 1.0}, Setting{2, 1, 1.0, 0.5}}) {
        BoundExperimentConfig cfg;
        cfg.nu = s.nu;
        cfg.n = s.n;
        cfg.t1 = s.t1;
        cfg.t2 = s.t2;
        cfg.dims = {4, 8, 16};
        cfg.instances_per_dim = 50;
        const auto rep = bound_experiment(builtin_families(s.nu)[0], cfg);
        ok = ok && rep.stability_factor < 10.0;
        std::snprintf(buf, sizeof buf, "%snu=%d n=%d: spread %.2f over d in {4,8,16}",
                      detail.empty() ? "" : "; ", s.nu, s.n, rep.stability_factor);
        detail += buf;
    }
    report(10, "weighted remainder ratio is stable in the dimension", ok, detail);
}

void c11() {
    std::vector<double> path;
    for (int i = 0; i < 10; ++i) path.push_back(0.5 * std::pow(0.75, i));
    bool ok = true;
    std::string detail;
    char buf[96];
    struct Case {
        int nu, n;
    };
    for (const Case c : {Case{1, 1}, Case{1, 2}, Case{2, 1}}) {
        const auto a = make_commuting_tuple(31 + c.nu, c.nu, 6, 2.0);
        const Matrix b = random_bounded(37, 6);
        RealVector u0(c.nu);
        for (int j = 0; j < c.nu; ++j) u0[j] = 0.4 + 0.2 * j;
        const auto res =
            hadamard_probe(a, b, 1, c.n, 1.0, c.nu == 2 ? 0.5 : 1.0, path, u0);
        const double floor = -(c.n + 2 * c.nu) - 0.2;
        ok = ok && !res.degenerate && res.fitted_slope >= floor;
        std::snprintf(buf, sizeof buf, "%s(%d,%d): slope %.2f >= %.1f",
                      detail.empty() ? "" : "; ", c.nu, c.n, res.fitted_slope, floor);
        detail += buf;
    }
    report(11, "weighted kernel-remainder norm decays no faster than the predicted power",
           ok, detail);
}

void c12() {
    bool ok = true;
    std::string detail;
    char buf[64];
    for (int N : {3, 5}) {
        const auto ext = build_extension(bracket_power(1, -2.0), N);
        const auto rep = verify_decay(ext, N, 200);
        ok = ok && std::abs(rep.fitted_order - N) < 0.2;
        std::snprintf(buf, sizeof buf, "%sN=%d: fitted %.3f", detail.empty() ? "" : "; ",
                      N, rep.fitted_order);
        detail += buf;
    }
    report(12, "almost-analytic extension vanishes to the truncation order", ok, detail);
}

}  // namespace

int main() {
    const auto t0 = clk::now();
    c01();
    c02();
    c03();
    c04();
    c05();
    c06();
    c07();
    c08();
    c09();
    c10();
    c11();
    c12();
    std::printf("%d/12 criteria passed in %.1fs\n", 12 - failures, secs(t0));
    return failures;
}
