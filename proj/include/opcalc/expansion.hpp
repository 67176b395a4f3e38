// Order-n expansion of [B, f(A)] and its explicit remainder operators:
// the order-n sum with spectral-oracle derivative coefficients, the kernel
// remainders R_n^g and R_n^{g_l}, the Leibniz combination for factor
// products, the full kernel remainder R_{l,n}(A,B), its integral against
// dbar f~, weighted-norm decay probes and the bound-stability experiment.

#pragma once

#include <chrono>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "opcalc/almost_analytic.hpp"
#include "opcalc/hs_calculus.hpp"
#include "opcalc/multi_index.hpp"
#include "opcalc/operator_model.hpp"
#include "opcalc/smooth_function.hpp"
#include "opcalc/term_sum.hpp"

namespace opcalc {

enum class Side { Left, Right };

// sum_{|alpha|=1}^n (1/alpha!) d^alpha f(A) ad_A^alpha(B); side = Right puts
// the commutator factor first with the sign correction (-1)^(|alpha|-1).
inline Matrix taylor_terms(const CommutingTuple& a, const Matrix& b, const SmoothFunction& f,
                           int n, Side side = Side::Left) {
    Matrix sum = Matrix::Zero(a.dim, a.dim);
    for (int k = 1; k <= n; ++k) {
        for (const MultiIndex& alpha : enumerate_degree(a.nu, k)) {
            const double inv_fact = 1.0 / static_cast<double>(factorial(alpha));
            const Matrix df = spectral_apply_real(
                a, [&](const RealVector& x) { return f.partial(alpha, x); });
            const Matrix ad = iterated_commutator(a, b, alpha);
            if (side == Side::Left) {
                sum += inv_fact * df * ad;
            } else {
                const double sign = (k % 2 == 1) ? 1.0 : -1.0;
                sum += sign * inv_fact * ad * df;
            }
        }
    }
    return sum;
}

// R_{lambda,n}(A,B) computed directly from the theorem identity:
// [B, f(A)] minus the order-n sum, with f(A) from the spectral oracle.
inline Matrix remainder_direct(const CommutingTuple& a, const Matrix& b,
                               const SmoothFunction& f, int n, Side side = Side::Left) {
    const Matrix fa = spectral_apply_real(a, [&](const RealVector& x) { return f(x); });
    return (b * fa - fa * b) - taylor_terms(a, b, f, n, side);
}

// T_alpha^beta(A, z) as an operator.
inline Matrix t_coeff_operator(const CommutingTuple& a, const MultiIndex& alpha,
                               const MultiIndex& beta, const ComplexVector& z) {
    return spectral_term_sum(a, TermSum(t_coeff(alpha, beta)), z);
}

// R_n^g(A, ad_A^{alpha0}(B)): the three remainder sums of the kernel lemma.
inline Matrix remainder_g(const CommutingTuple& a, const Matrix& b, const MultiIndex& alpha0,
                          int n, const ComplexVector& z) {
    const int nu = a.nu;
    const Matrix kern = resolvent_kernel(a, z);
    Matrix r = Matrix::Zero(a.dim, a.dim);
    if (n >= 1) {
        for (const MultiIndex& alpha : enumerate_degree(nu, n - 1)) {
            for (const MultiIndex& beta : enumerate_half(alpha)) {
                for (int i = 1; i <= nu; ++i) {
                    const MultiIndex di = MultiIndex::unit(nu, i);
                    const double coeff = static_cast<double>(beta[i] + 1) /
                                         alpha.plus(di).minus(beta).degree();
                    const Matrix top =
                        t_coeff_operator(a, alpha.plus(di.scaled(2)), beta.plus(di), z);
                    r += coeff * top *
                         iterated_commutator(a, b, alpha0.plus(alpha).plus(di.scaled(2))) *
                         kern;
                }
            }
        }
    }
    for (const MultiIndex& alpha : enumerate_degree(nu, n)) {
        for (const MultiIndex& beta : enumerate_half(alpha)) {
            for (int i = 1; i <= nu; ++i) {
                const MultiIndex di = MultiIndex::unit(nu, i);
                const double coeff =
                    static_cast<double>(beta[i] + 1) / alpha.plus(di).minus(beta).degree();
                const Matrix top =
                    t_coeff_operator(a, alpha.plus(di.scaled(2)), beta.plus(di), z);
                const Matrix ad = iterated_commutator(a, b, alpha0.plus(alpha).plus(di));
                r += coeff * top * shifted_component(a, i, std::conj(z[i - 1])) * ad * kern;
                r += coeff * top * ad * shifted_component(a, i, z[i - 1]) * kern;
            }
        }
    }
    return r;
}

// R_n^{g_l}: zero for n >= 1, ad_A^{alpha0 + d_l}(B) for n = 0.
inline Matrix remainder_gl(const CommutingTuple& a, const Matrix& b, const MultiIndex& alpha0,
                           int n, int axis) {
    if (n >= 1) return Matrix::Zero(a.dim, a.dim);
    return iterated_commutator(a, b, alpha0.plus(MultiIndex::unit(a.nu, axis)));
}

// The kernel factor h_i(A) as a matrix: g -> |A-z|^(-2), g_l -> A_l - conj(z_l).
inline Matrix kernel_factor_operator(const CommutingTuple& a, const KernelFactor& f,
                                     const ComplexVector& z) {
    if (f.kind == KernelFactor::Kind::G) return resolvent_kernel(a, z);
    return shifted_component(a, f.axis, std::conj(z[f.axis - 1]));
}

// Leibniz combination:
//   [B, prod_i h_i(A)] = sum_{|alpha|=1}^n (1/alpha!) d^alpha(prod h)(A) ad^alpha(B)
//     + sum_j sum_{|alpha|=0}^n (1/alpha!) d^alpha(prod_{i<j} h)(A)
//         R^{h_j}_{n-|alpha|}(A, ad^alpha(B)) prod_{i>j} h_i(A).
// Returns (order-n sum, remainder).
inline std::pair<Matrix, Matrix> leibniz_expand(const CommutingTuple& a, const Matrix& b,
                                                const std::vector<KernelFactor>& factors,
                                                int n, const ComplexVector& z) {
    const int nu = a.nu;
    const TermCombo full = TermCombo::product(factors, nu, z);
    Matrix sum = Matrix::Zero(a.dim, a.dim);
    for (int k = 1; k <= n; ++k) {
        for (const MultiIndex& alpha : enumerate_degree(nu, k)) {
            const double inv_fact = 1.0 / static_cast<double>(factorial(alpha));
            sum += inv_fact * spectral_term_combo(a, full.differentiated(alpha), z) *
                   iterated_commutator(a, b, alpha);
        }
    }

    Matrix rem = Matrix::Zero(a.dim, a.dim);
    for (std::size_t j = 0; j < factors.size(); ++j) {
        const std::vector<KernelFactor> prefix_factors(factors.begin(),
                                                       factors.begin() + static_cast<long>(j));
        const TermCombo prefix = TermCombo::product(prefix_factors, nu, z);
        Matrix suffix = Matrix::Identity(a.dim, a.dim);
        for (std::size_t i = j + 1; i < factors.size(); ++i)
            suffix = (suffix * kernel_factor_operator(a, factors[i], z)).eval();
        for (int k = 0; k <= n; ++k) {
            for (const MultiIndex& alpha : enumerate_degree(nu, k)) {
                const double inv_fact = 1.0 / static_cast<double>(factorial(alpha));
                const Matrix rj =
                    factors[j].kind == KernelFactor::Kind::G
                        ? remainder_g(a, b, alpha, n - k, z)
                        : remainder_gl(a, b, alpha, n - k, factors[j].axis);
                rem += inv_fact * spectral_term_combo(a, prefix.differentiated(alpha), z) *
                       rj * suffix;
            }
        }
    }
    return {sum, rem};
}

// R_{l,n}(A,B): the remainder of [B, |A-z|^(-2 nu) (A_l - conj(z_l))],
// assembled from the three displayed sums (factor ordering
// g,...,g,g_l,g so the middle factor's remainder collapses to one term).
inline Matrix remainder_kernel(const CommutingTuple& a, const Matrix& b, int axis, int n,
                               const ComplexVector& z) {
    const int nu = a.nu;
    const Matrix kern = resolvent_kernel(a, z);
    const Matrix gl_op = shifted_component(a, axis, std::conj(z[axis - 1]));
    Matrix r = Matrix::Zero(a.dim, a.dim);

    // sum_{j=1}^{nu-1} sum_{|alpha|<=n} (1/a!) d^a(g^{j-1})(A) R^g_{n-|a|}(A, ad^a(B))
    //   |A-z|^(-2(nu-j)) (A_l - conj(z_l))
    for (int j = 1; j <= nu - 1; ++j) {
        const TermSum gpow(Term{1, MultiIndex(nu), j - 1});
        Matrix suffix = gl_op;
        for (int p = 0; p < nu - j; ++p) suffix = (kern * suffix).eval();
        for (int k = 0; k <= n; ++k) {
            for (const MultiIndex& alpha : enumerate_degree(nu, k)) {
                const double inv_fact = 1.0 / static_cast<double>(factorial(alpha));
                const TermSum ds = differentiate(gpow, alpha);
                if (ds.empty()) continue;
                r += inv_fact * spectral_term_sum(a, ds, z) *
                     remainder_g(a, b, alpha, n - k, z) * suffix;
            }
        }
    }

    // sum_{|alpha|=n} (1/a!) d^a(g^{nu-1})(A) ad^{alpha+d_l}(B) |A-z|^(-2)
    {
        const TermSum gpow(Term{1, MultiIndex(nu), nu - 1});
        for (const MultiIndex& alpha : enumerate_degree(nu, n)) {
            const double inv_fact = 1.0 / static_cast<double>(factorial(alpha));
            const TermSum ds = differentiate(gpow, alpha);
            if (ds.empty()) continue;
            r += inv_fact * spectral_term_sum(a, ds, z) *
                 iterated_commutator(a, b, alpha.plus(MultiIndex::unit(nu, axis))) * kern;
        }
    }

    // sum_{|alpha|<=n} (1/a!) d^a(g^{nu-1} g_l)(A) R^g_{n-|a|}(A, ad^a(B))
    {
        const TermCombo combo = TermCombo::from(TermSum(Term{1, MultiIndex(nu), nu - 1}))
                                    .times_factor(KernelFactor::gl(axis), z);
        for (int k = 0; k <= n; ++k) {
            for (const MultiIndex& alpha : enumerate_degree(nu, k)) {
                const double inv_fact = 1.0 / static_cast<double>(factorial(alpha));
                r += inv_fact * spectral_term_combo(a, combo.differentiated(alpha), z) *
                     remainder_g(a, b, alpha, n - k, z);
            }
        }
    }
    return r;
}

// Precompiled evaluator for R_{l,n}(A,B) inside quadrature loops.
// remainder_kernel above rebuilds symbolic coefficients and dense spectral
// operators at every z, which dominates the cost when called per node.
// Every contribution to R_{l,n} has the shape
//   L(A, z) ad_A^gamma(B) R(A, z)
// with L, R spectral scalars, so in the shared eigenbasis each term is an
// outer product of two diagonal vectors times a fixed matrix, and
//   (U* ad^gamma(B) U)_{pq} = (U* B U)_{pq} prod_j (t_q^j - t_p^j)^{gamma_j}
// needs no matrix products at all.  The symbolic structure (coefficients,
// T_alpha^beta sums, commutator indices) is z-independent and flattened once
// in the constructor; eval() then does only scalar work plus d x d arrays.
class RemainderKernelPlan {
public:
    RemainderKernelPlan(const CommutingTuple& a, const Matrix& b, int n)
        : a_(a), n_(n), btil_(a.basis.adjoint() * b * a.basis) {
        if (n < 0) throw std::domain_error("RemainderKernelPlan: negative order");
        blocks_.resize(static_cast<std::size_t>(a.nu));
        for (int l = 1; l <= a.nu; ++l) compile_axis(l);
        std::vector<Matrix> axis_diff;
        for (int j = 1; j <= a.nu; ++j) {
            Matrix diff(a.dim, a.dim);
            for (int p = 0; p < a.dim; ++p)
                for (int q = 0; q < a.dim; ++q)
                    diff(p, q) = a.spectrum(q, j - 1) - a.spectrum(p, j - 1);
            axis_diff.push_back(diff);
        }
        std::map<MultiIndex, int> seen;
        for (auto& axis_blocks : blocks_)
            for (Block& blk : axis_blocks)
                for (GTerm& gt : blk.terms) {
                    auto [it, fresh] = seen.emplace(gt.gamma, static_cast<int>(ads_.size()));
                    if (fresh) {
                        Matrix m = btil_;
                        for (int j = 1; j <= a.nu; ++j)
                            for (int r = 0; r < gt.gamma[j]; ++r)
                                m.array() *= axis_diff[static_cast<std::size_t>(j - 1)].array();
                        ads_.push_back(std::move(m));
                    }
                    gt.ad_id = it->second;
                }
    }

    // sum_l c_l R_{l,n}(A,B) in the eigenbasis of `a`, added into acc.
    // All per-row spectral data and interned scalar sums are evaluated once
    // per z, shared across axes and terms.
    void accumulate(const ComplexVector& z, const Eigen::VectorXcd& c, Matrix& acc) const {
        const int d = a_.dim;
        const int nu = a_.nu;
        Eigen::ArrayXXd diff(d, nu);
        Eigen::ArrayXXcd shift_conj(d, nu), shift_plain(d, nu);
        Eigen::ArrayXd gv(d);
        double im2 = 0;
        for (int j = 0; j < nu; ++j) im2 += z[j].imag() * z[j].imag();
        for (int p = 0; p < d; ++p) {
            double q = im2;
            for (int j = 0; j < nu; ++j) {
                const double dj = a_.spectrum(p, j) - z[j].real();
                diff(p, j) = dj;
                q += dj * dj;
                shift_conj(p, j) = std::complex<double>(dj, z[j].imag());
                shift_plain(p, j) = std::complex<double>(dj, -z[j].imag());
            }
            if (q == 0.0)
                throw std::domain_error("RemainderKernelPlan: z hits the joint spectrum");
            gv[p] = 1.0 / q;
        }
        // Interned sums evaluated on every spectrum row.
        Eigen::ArrayXXd sval(d, static_cast<int>(sums_.size()));
        for (std::size_t s = 0; s < sums_.size(); ++s)
            for (int p = 0; p < d; ++p) {
                double out = 0;
                for (const CTerm& t : sums_[s]) {
                    double v = t.c;
                    for (int j = 0; j < nu; ++j)
                        for (int r = 0; r < t.g[j]; ++r) v *= diff(p, j);
                    for (int r = 0; r < t.m; ++r) v *= gv[p];
                    out += v;
                }
                sval(p, static_cast<int>(s)) = out;
            }
        Eigen::VectorXcd pre(d), suf(d), lvec(d), rvec(d);
        for (int axis = 1; axis <= nu; ++axis) {
            const std::complex<double> cl = c[axis - 1];
            if (cl == 0.0) continue;
            for (const Block& blk : blocks_[static_cast<std::size_t>(axis - 1)]) {
                for (int p = 0; p < d; ++p) {
                    std::complex<double> v =
                        blk.pre_id >= 0 ? sval(p, blk.pre_id) : 0.0;
                    if (blk.pre_gl) v *= shift_conj(p, axis - 1);
                    if (blk.pre2_id >= 0) v += blk.pre2_coeff * sval(p, blk.pre2_id);
                    pre[p] = cl * blk.coeff * v;
                    std::complex<double> s = 1.0;
                    for (int r = 0; r < blk.suf_gpow; ++r) s *= gv[p];
                    if (blk.suf_gl) s *= shift_conj(p, axis - 1);
                    suf[p] = s;
                }
                for (const GTerm& gt : blk.terms) {
                    const Matrix& ad = ads_[static_cast<std::size_t>(gt.ad_id)];
                    for (int p = 0; p < d; ++p) {
                        std::complex<double> lv = pre[p] * gt.coeff * sval(p, gt.top_id);
                        if (gt.shift_axis > 0) lv *= shift_conj(p, gt.shift_axis - 1);
                        lvec[p] = lv;
                        std::complex<double> rv = gv[p] * suf[p];
                        if (gt.shift_axis < 0) rv *= shift_plain(p, -gt.shift_axis - 1);
                        rvec[p] = rv;
                    }
                    for (int qc = 0; qc < d; ++qc) {
                        const std::complex<double> rq = rvec[qc];
                        for (int p = 0; p < d; ++p) acc(p, qc) += lvec[p] * rq * ad(p, qc);
                    }
                }
            }
        }
    }

    // R_{l,n}(A,B) in the eigenbasis of `a`.
    Matrix eval_eigenbasis(int axis, const ComplexVector& z) const {
        Matrix acc = Matrix::Zero(a_.dim, a_.dim);
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(a_.nu);
        c[axis - 1] = 1.0;
        accumulate(z, c, acc);
        return acc;
    }

    Matrix eval(int axis, const ComplexVector& z) const {
        return a_.basis * eval_eigenbasis(axis, z) * a_.basis.adjoint();
    }

    const CommutingTuple& tuple() const { return a_; }

private:
    // One addend of a TermSum in evaluation-ready form: c (t - Re z)^g |t-z|^(-2m).
    struct CTerm {
        double c = 0;
        int m = 0;
        int g[3] = {0, 0, 0};
    };
    // One term of R^g_m(A, ad^{alpha0}(B)): coeff * top(A,z) [* (A_i - conj z_i)]
    //   * ad^gamma(B) [* (A_i - z_i)] * g(A,z).
    struct GTerm {
        double coeff = 1;
        int top_id = -1;
        int shift_axis = 0;  // 0: none; +i: left (t_i - conj z_i); -i: right (t_i - z_i)
        int ad_id = -1;
        MultiIndex gamma;
    };
    // coeff * [pre (* (A_l - conj z_l)) + pre2_coeff * pre2](A,z)
    //   * sum(terms) * g^suf_gpow (* (A_l - conj z_l)).
    struct Block {
        double coeff = 1;
        int pre_id = -1;
        bool pre_gl = false;
        int pre2_id = -1;
        double pre2_coeff = 0;
        int suf_gpow = 0;
        bool suf_gl = false;
        std::vector<GTerm> terms;
    };

    int intern(const TermSum& s) {
        std::vector<CTerm> compact;
        for (const Term& t : s.terms()) {
            CTerm ct;
            ct.c = static_cast<double>(t.coeff);
            ct.m = t.m;
            for (int j = 1; j <= t.gamma.nu(); ++j) ct.g[j - 1] = t.gamma[j];
            compact.push_back(ct);
        }
        sums_.push_back(std::move(compact));
        return static_cast<int>(sums_.size()) - 1;
    }

    std::vector<GTerm> compile_g(const MultiIndex& alpha0, int m) {
        const int nu = a_.nu;
        std::vector<GTerm> terms;
        if (m >= 1) {
            for (const MultiIndex& alpha : enumerate_degree(nu, m - 1)) {
                for (const MultiIndex& beta : enumerate_half(alpha)) {
                    for (int i = 1; i <= nu; ++i) {
                        const MultiIndex di = MultiIndex::unit(nu, i);
                        GTerm gt;
                        gt.coeff = static_cast<double>(beta[i] + 1) /
                                   alpha.plus(di).minus(beta).degree();
                        gt.top_id =
                            intern(TermSum(t_coeff(alpha.plus(di.scaled(2)), beta.plus(di))));
                        gt.gamma = alpha0.plus(alpha).plus(di.scaled(2));
                        terms.push_back(gt);
                    }
                }
            }
        }
        for (const MultiIndex& alpha : enumerate_degree(nu, m)) {
            for (const MultiIndex& beta : enumerate_half(alpha)) {
                for (int i = 1; i <= nu; ++i) {
                    const MultiIndex di = MultiIndex::unit(nu, i);
                    GTerm gt;
                    gt.coeff = static_cast<double>(beta[i] + 1) /
                               alpha.plus(di).minus(beta).degree();
                    gt.top_id =
                        intern(TermSum(t_coeff(alpha.plus(di.scaled(2)), beta.plus(di))));
                    gt.gamma = alpha0.plus(alpha).plus(di);
                    gt.shift_axis = i;
                    terms.push_back(gt);
                    gt.shift_axis = -i;
                    terms.push_back(gt);
                }
            }
        }
        return terms;
    }

    void compile_axis(int axis) {
        const int nu = a_.nu;
        std::vector<Block>& out = blocks_[static_cast<std::size_t>(axis - 1)];
        const TermSum one(Term{1, MultiIndex(nu), 0});
        for (int j = 1; j <= nu - 1; ++j) {
            const TermSum gpow(Term{1, MultiIndex(nu), j - 1});
            for (int k = 0; k <= n_; ++k) {
                for (const MultiIndex& alpha : enumerate_degree(nu, k)) {
                    const TermSum ds = differentiate(gpow, alpha);
                    if (ds.empty()) continue;
                    Block blk;
                    blk.coeff = 1.0 / static_cast<double>(factorial(alpha));
                    blk.pre_id = intern(ds);
                    blk.suf_gpow = nu - j;
                    blk.suf_gl = true;
                    blk.terms = compile_g(alpha, n_ - k);
                    out.push_back(std::move(blk));
                }
            }
        }
        {
            const TermSum gpow(Term{1, MultiIndex(nu), nu - 1});
            for (const MultiIndex& alpha : enumerate_degree(nu, n_)) {
                const TermSum ds = differentiate(gpow, alpha);
                if (ds.empty()) continue;
                Block blk;
                blk.coeff = 1.0 / static_cast<double>(factorial(alpha));
                blk.pre_id = intern(ds);
                GTerm gt;
                gt.top_id = intern(one);
                gt.gamma = alpha.plus(MultiIndex::unit(nu, axis));
                blk.terms.push_back(std::move(gt));
                out.push_back(std::move(blk));
            }
        }
        {
            const TermSum gpow(Term{1, MultiIndex(nu), nu - 1});
            for (int k = 0; k <= n_; ++k) {
                for (const MultiIndex& alpha : enumerate_degree(nu, k)) {
                    // d^alpha(g^{nu-1} g_l) = d^alpha(g^{nu-1}) g_l
                    //   + alpha_l d^{alpha - d_l}(g^{nu-1});  g_l is degree one.
                    Block blk;
                    blk.coeff = 1.0 / static_cast<double>(factorial(alpha));
                    const TermSum ds = differentiate(gpow, alpha);
                    if (!ds.empty()) blk.pre_id = intern(ds);
                    blk.pre_gl = true;
                    if (alpha[axis] > 0) {
                        const TermSum ds2 =
                            differentiate(gpow, alpha.minus(MultiIndex::unit(nu, axis)));
                        if (!ds2.empty()) {
                            blk.pre2_id = intern(ds2);
                            blk.pre2_coeff = alpha[axis];
                        }
                    }
                    if (blk.pre_id < 0 && blk.pre2_id < 0) continue;
                    blk.terms = compile_g(alpha, n_ - k);
                    out.push_back(std::move(blk));
                }
            }
        }
    }

    const CommutingTuple& a_;
    int n_;
    Matrix btil_;
    std::vector<std::vector<CTerm>> sums_;
    std::vector<Matrix> ads_;
    std::vector<std::vector<Block>> blocks_;
};

// R_{lambda,n}(A,B) by quadrature: C_nu sum_l int dbar_l f~(z) R_{l,n}(A,B) dz.
inline Matrix remainder_integral(const CommutingTuple& a, const Matrix& b,
                                 const AlmostAnalytic& ext, int n,
                                 const QuadratureSpec& quad) {
    if (a.nu != ext.nu()) throw std::domain_error("remainder_integral: dimension mismatch");
    using Acc = Matrix;
    const int d = a.dim;
    const RemainderKernelPlan plan(a, b, n);
    Acc result;
    std::function<void(const ComplexVector&, const Eigen::VectorXcd&, double, Acc&)> fn =
        [&](const ComplexVector& z, const Eigen::VectorXcd& db, double w, Acc& acc) {
            if (db.isZero(0.0)) return;
            plan.accumulate(z, w * db, acc);
        };
    quad_reduce<Acc>(
        quad, ext, fn, [d]() { return Acc(Acc::Zero(d, d)); },
        [](Acc& a1, const Acc& a2) { a1 += a2; }, result);
    return hs_constant(a.nu) * (a.basis * result * a.basis.adjoint());
}

// Refinement-difference error proxy for remainder_integral.
inline double remainder_quad_error_estimate(const CommutingTuple& a, const Matrix& b,
                                            const AlmostAnalytic& ext, int n,
                                            const QuadratureSpec& quad) {
    QuadratureSpec fine = quad;
    for (int l = 0; l < std::max(1, quad.refine_levels); ++l) fine = fine.refined();
    return op_norm(remainder_integral(a, b, ext, n, quad) -
                   remainder_integral(a, b, ext, n, fine));
}

// Weighted-norm decay probe along z = u0 + i v (1,...,1):
// fits the slope of log ||<A>^{t1} R_{l,n} <A>^{t2}|| against log v.
struct HadamardProbeResult {
    std::vector<double> v_values;
    std::vector<double> norms;
    double fitted_slope = 0;
    bool degenerate = false;  // all norms ~ 0 (B commutes with A)
};

inline HadamardProbeResult hadamard_probe(const CommutingTuple& a, const Matrix& b, int axis,
                                          int n, double t1, double t2,
                                          const std::vector<double>& v_path,
                                          const RealVector& u0) {
    if (t1 < 0 || t1 > n + 1 || t2 < 0 || t2 > 1)
        throw std::domain_error("hadamard_probe: (t1, t2) outside the hypothesis range");
    const Matrix w1 = weight(a, t1).matrix;
    const Matrix w2 = weight(a, t2).matrix;
    HadamardProbeResult res;
    std::vector<double> xs, ys;
    for (double v : v_path) {
        if (v <= 0) throw std::domain_error("hadamard_probe: v path must be positive");
        ComplexVector z(a.nu);
        for (int j = 0; j < a.nu; ++j) z[j] = {u0[j], v};
        const double norm = op_norm(w1 * remainder_kernel(a, b, axis, n, z) * w2);
        res.v_values.push_back(v);
        res.norms.push_back(norm);
        if (norm > 1e-13) {
            xs.push_back(std::log(v));
            ys.push_back(std::log(norm));
        }
    }
    if (xs.size() < 2) {
        res.degenerate = true;
        return res;
    }
    res.fitted_slope = fit_log_slope(xs, ys);
    return res;
}

// ---------------------------------------------------------------------------
// Bound-stability experiment: the desk-scale proxy for the theorem's
// "constant C independent of A, B".

struct BoundInstance {
    std::uint64_t seed = 0;
    int dim = 0;
    double lambda = 0;
    double remainder_norm = 0;   // ||R||
    double weighted_norm = 0;    // ||<A>^{t1} R <A>^{t2}||
    double commutator_sum = 0;   // sum_{|alpha|=n+1} ||ad^alpha(B)||
    double ratio = 0;
    bool exact_expansion = false;  // degenerate denominator
};

struct ExpansionReport {
    int nu = 0;
    int n = 0;
    double t1 = 0, t2 = 0, s = 0;
    std::string family;
    std::vector<BoundInstance> instances;
    std::map<int, double> max_ratio_by_dim;
    std::map<int, double> median_ratio_by_dim;
    double max_ratio = 0;
    double stability_factor = 0;  // max over dims of max ratio / min over dims
    double elapsed_seconds = 0;

    nlohmann::json to_json() const {
        nlohmann::json insts = nlohmann::json::array();
        for (const auto& i : instances)
            insts.push_back({{"seed", i.seed},
                             {"dim", i.dim},
                             {"lambda", i.lambda},
                             {"remainder_norm", i.remainder_norm},
                             {"weighted_norm", i.weighted_norm},
                             {"commutator_sum", i.commutator_sum},
                             {"ratio", i.ratio},
                             {"exact_expansion", i.exact_expansion}});
        nlohmann::json by_dim = nlohmann::json::object();
        nlohmann::json med_by_dim = nlohmann::json::object();
        for (const auto& [d, r] : max_ratio_by_dim) by_dim[std::to_string(d)] = r;
        for (const auto& [d, r] : median_ratio_by_dim) med_by_dim[std::to_string(d)] = r;
        return {{"nu", nu},       {"n", n},
                {"t1", t1},       {"t2", t2},
                {"s", s},         {"family", family},
                {"instances", insts}, {"max_ratio_by_dim", by_dim},
                {"median_ratio_by_dim", med_by_dim}, {"max_ratio", max_ratio},
                {"stability_factor", stability_factor},
                {"elapsed_seconds", elapsed_seconds}};
    }
};

struct BoundExperimentConfig {
    int nu = 1;
    int n = 2;
    double t1 = 1.0;
    double t2 = 1.0;
    std::vector<int> dims{4, 8, 16};
    int instances_per_dim = 50;
    std::uint64_t seed = 1;
    double spectrum_scale = 2.0;
};

// Enforces the theorem hypotheses before running.
inline void check_hypotheses(int n, double t1, double t2, double s) {
    if (n + 1 < 1) throw std::domain_error("hypothesis violated: need n + 1 >= 1");
    if (t1 < 0 || t1 > n + 1)
        throw std::domain_error("hypothesis violated: need 0 <= t1 <= n+1, got t1=" +
                                std::to_string(t1) + " with n=" + std::to_string(n));
    if (t2 < 0 || t2 > 1)
        throw std::domain_error("hypothesis violated: need 0 <= t2 <= 1, got t2=" +
                                std::to_string(t2));
    if (!(t1 + t2 + s < n + 1))
        throw std::domain_error(
            "hypothesis violated: need t1 + t2 + s < n + 1, got t1+t2+s=" +
            std::to_string(t1 + t2 + s) + " with n=" + std::to_string(n));
}

inline ExpansionReport bound_experiment(const FunctionFamily& family,
                                        const BoundExperimentConfig& cfg) {
    check_hypotheses(cfg.n, cfg.t1, cfg.t2, family.s);
    const auto t_start = std::chrono::steady_clock::now();
    ExpansionReport rep;
    rep.nu = cfg.nu;
    rep.n = cfg.n;
    rep.t1 = cfg.t1;
    rep.t2 = cfg.t2;
    rep.s = family.s;
    rep.family = family.name;
    const auto functions = family.instantiate();

    for (int d : cfg.dims) {
        std::vector<double> ratios;
        for (int inst = 0; inst < cfg.instances_per_dim; ++inst) {
            const std::uint64_t seed =
                cfg.seed + 1000003ULL * static_cast<std::uint64_t>(d) +
                static_cast<std::uint64_t>(inst);
            const CommutingTuple a = make_commuting_tuple(seed, cfg.nu, d, cfg.spectrum_scale);
            const Matrix b = random_bounded(seed ^ 0x9e3779b97f4a7c15ULL, d);
            const Matrix w1 = weight(a, cfg.t1).matrix;
            const Matrix w2 = weight(a, cfg.t2).matrix;
            double csum = 0;
            for (const MultiIndex& alpha : enumerate_degree(cfg.nu, cfg.n + 1))
                csum += op_norm(iterated_commutator(a, b, alpha));
            for (std::size_t fi = 0; fi < functions.size(); ++fi) {
                BoundInstance bi;
                bi.seed = seed;
                bi.dim = d;
                bi.lambda = family.parameters[fi];
                const Matrix r = remainder_direct(a, b, functions[fi], cfg.n);
                bi.remainder_norm = op_norm(r);
                bi.weighted_norm = op_norm(w1 * r * w2);
                bi.commutator_sum = csum;
                if (csum < 1e-12 * op_norm(b)) {
                    bi.exact_expansion = true;
                    bi.ratio = 0;
                } else {
                    bi.ratio = bi.weighted_norm / csum;
                    ratios.push_back(bi.ratio);
                }
                rep.instances.push_back(bi);
            }
        }
        if (!ratios.empty()) {
            std::vector<double> sorted = ratios;
            std::sort(sorted.begin(), sorted.end());
            rep.max_ratio_by_dim[d] = sorted.back();
            rep.median_ratio_by_dim[d] = sorted[sorted.size() / 2];
        }
    }
    double lo = 0, hi = 0;
    for (const auto& [d, r] : rep.max_ratio_by_dim) {
        if (lo == 0 || r < lo) lo = r;
        if (r > hi) hi = r;
        rep.max_ratio = std::max(rep.max_ratio, r);
    }
    rep.stability_factor = lo > 0 ? hi / lo : 0;
    rep.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
}

}  // namespace opcalc
