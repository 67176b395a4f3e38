// Exact symbolic calculus on the closed term family
//
//     c * (t - Re z)^gamma * |t - z|^(-2m)
//
// with rational c.  The family is closed under partial differentiation when
// |t - z|^2 = sum_j ((t_j - Re z_j)^2 + (Im z_j)^2) is kept atomic, so the
// derivative formulas for g(t) = |t - z|^(-2) and the T coefficient
// identities can be checked with zero tolerance.

#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "opcalc/multi_index.hpp"

namespace opcalc {

using Rational = boost::multiprecision::cpp_rational;

struct Term {
    Rational coeff;
    MultiIndex gamma;  // exponent of (t - Re z)
    int m = 0;         // power in |t - z|^(-2m)
};

class TermSum {
public:
    TermSum() = default;

    explicit TermSum(const Term& t) { add(t); }

    void add(const Term& t) { add(t.coeff, t.gamma, t.m); }

    void add(const Rational& c, const MultiIndex& gamma, int m) {
        if (m < 0) throw std::domain_error("TermSum: negative resolvent power");
        if (c == 0) return;
        auto key = std::make_pair(gamma, m);
        auto it = terms_.find(key);
        if (it == terms_.end()) {
            terms_.emplace(key, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    void add(const TermSum& other) {
        for (const auto& [key, c] : other.terms_) add(c, key.first, key.second);
    }

    TermSum scaled(const Rational& c) const {
        TermSum r;
        if (c == 0) return r;
        for (const auto& [key, coeff] : terms_) r.terms_.emplace(key, c * coeff);
        return r;
    }

    // Product with a single term: coefficients multiply, gamma and m add.
    TermSum times(const Term& t) const {
        TermSum r;
        for (const auto& [key, coeff] : terms_)
            r.add(coeff * t.coeff, key.first.plus(t.gamma), key.second + t.m);
        return r;
    }

    TermSum times(const TermSum& other) const {
        TermSum r;
        for (const auto& [key, coeff] : other.terms_)
            r.add(times(Term{coeff, key.first, key.second}));
        return r;
    }

    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    bool operator==(const TermSum& other) const { return terms_ == other.terms_; }

    std::vector<Term> terms() const {
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (const auto& [key, c] : terms_) out.push_back(Term{c, key.first, key.second});
        return out;
    }

private:
    std::map<std::pair<MultiIndex, int>, Rational> terms_;
};

// d/dt_i of the sum: power rule on (t - Re z)^gamma plus the chain rule
// d/dt_i |t-z|^(-2m) = -2m (t_i - Re z_i) |t-z|^(-2m-2).
inline TermSum differentiate(const TermSum& sum, int axis) {
    TermSum out;
    for (const Term& t : sum.terms()) {
        if (t.gamma[axis] > 0)
            out.add(t.coeff * t.gamma[axis], t.gamma.shifted(axis, -1), t.m);
        if (t.m > 0)
            out.add(t.coeff * (-2 * t.m), t.gamma.shifted(axis, +1), t.m + 1);
    }
    return out;
}

inline TermSum differentiate(const TermSum& sum, const MultiIndex& alpha) {
    TermSum out = sum;
    for (int j = 1; j <= alpha.nu(); ++j)
        for (int r = 0; r < alpha[j]; ++r) out = differentiate(out, j);
    return out;
}

// g(t) = |t - z|^(-2) as a TermSum.
inline TermSum g_kernel(int nu) { return TermSum(Term{1, MultiIndex(nu), 1}); }

// Brute-force oracle: fold single-axis differentiation over alpha, starting
// from g.
inline TermSum derivative_of_g(const MultiIndex& alpha) {
    return differentiate(g_kernel(alpha.nu()), alpha);
}

// T_alpha^beta = (-2)^|a-b| |a-b|! / (2^|b| b! (a-2b)!) (t-Re z)^(a-2b) |t-z|^(-2|a-b|)
inline Term t_coeff(const MultiIndex& alpha, const MultiIndex& beta) {
    if (!beta.scaled(2).dominated_by(alpha))
        throw std::domain_error("t_coeff: requires 2*beta <= alpha");
    const MultiIndex amb = alpha.minus(beta);
    const MultiIndex a2b = alpha.minus(beta.scaled(2));
    const int dab = amb.degree();
    BigInt num = integer_factorial(dab);
    if (dab % 2) num = -num;
    for (int k = 0; k < dab; ++k) num *= 2;
    BigInt den = factorial(beta) * factorial(a2b);
    for (int k = 0; k < beta.degree(); ++k) den *= 2;
    return Term{Rational(num, den), a2b, dab};
}

// Right-hand side of the closed-form derivative lemma:
// d^alpha g = sum_{2 beta <= alpha} alpha! T_alpha^beta |t-z|^(-2).
inline TermSum lemma0_closed_form(const MultiIndex& alpha) {
    TermSum out;
    const Rational afact(factorial(alpha));
    for (const MultiIndex& beta : enumerate_half(alpha)) {
        Term t = t_coeff(alpha, beta);
        out.add(afact * t.coeff, t.gamma, t.m + 1);
    }
    return out;
}

// T_alpha^beta |t-z|^(-2) == -(beta_j+1)/|alpha+d_j-beta| * T_{alpha+2d_j}^{beta+d_j},
// checked exactly.
inline bool check_h1(const MultiIndex& alpha, const MultiIndex& beta, int j) {
    Term lhs = t_coeff(alpha, beta);
    lhs.m += 1;
    const MultiIndex dj = MultiIndex::unit(alpha.nu(), j);
    Term rhs = t_coeff(alpha.plus(dj.scaled(2)), beta.plus(dj));
    const int denom = alpha.plus(dj).minus(beta).degree();
    rhs.coeff *= -Rational(beta[j] + 1, denom);
    return TermSum(lhs) == TermSum(rhs);
}

// (beta_i+1) T_{alpha+2d_i}^{beta+d_i} * 2(t_i - Re z_i) == (alpha_i+1-2 beta_i) T_{alpha+d_i}^beta
inline bool check_h2(const MultiIndex& alpha, const MultiIndex& beta, int i) {
    const MultiIndex di = MultiIndex::unit(alpha.nu(), i);
    Term lhs = t_coeff(alpha.plus(di.scaled(2)), beta.plus(di));
    lhs.coeff *= 2 * (beta[i] + 1);
    lhs.gamma = lhs.gamma.shifted(i, +1);
    Term rhs = t_coeff(alpha.plus(di), beta);
    rhs.coeff *= alpha[i] + 1 - 2 * beta[i];
    return TermSum(lhs) == TermSum(rhs);
}

// |t - z|^2 at a numeric point.
inline double abs2_t_minus_z(const Eigen::VectorXd& t, const Eigen::VectorXcd& z) {
    double r = 0;
    for (Eigen::Index j = 0; j < t.size(); ++j) {
        const double du = t[j] - z[j].real();
        r += du * du + z[j].imag() * z[j].imag();
    }
    return r;
}

// Floating-point evaluation of the sum at (t, z).
inline double evaluate(const TermSum& sum, const Eigen::VectorXd& t,
                       const Eigen::VectorXcd& z) {
    const double q = abs2_t_minus_z(t, z);
    double out = 0;
    for (const Term& term : sum.terms()) {
        if (term.m > 0 && q == 0.0)
            throw std::domain_error("evaluate: singular point |t-z|^2 = 0");
        double v = static_cast<double>(term.coeff);
        for (int j = 1; j <= term.gamma.nu(); ++j) {
            const double base = t[j - 1] - z[j - 1].real();
            for (int r = 0; r < term.gamma[j]; ++r) v *= base;
        }
        for (int r = 0; r < term.m; ++r) v /= q;
        out += v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Complex-coefficient combinations of TermSums.  Products of the kernel
// factors g and g_l(t) = t_l - conj(z_l) = (t_l - Re z_l) + i Im z_l leave the
// rational term family only through the constant i*Im z_l, so a finite list
// of (complex coefficient, TermSum) pairs represents them exactly for fixed z.

struct KernelFactor {
    enum class Kind { G, Gl };
    Kind kind = Kind::G;
    int axis = 0;  // for Gl

    static KernelFactor g() { return {Kind::G, 0}; }
    static KernelFactor gl(int axis) { return {Kind::Gl, axis}; }
};

class TermCombo {
public:
    using Entry = std::pair<std::complex<double>, TermSum>;

    static TermCombo one(int nu) {
        TermCombo c;
        c.entries_.emplace_back(1.0, TermSum(Term{1, MultiIndex(nu), 0}));
        return c;
    }

    static TermCombo from(const TermSum& s) {
        TermCombo c;
        c.entries_.emplace_back(1.0, s);
        return c;
    }

    // Multiply by g or by g_l for the given z.
    TermCombo times_factor(const KernelFactor& f, const Eigen::VectorXcd& z) const {
        TermCombo out;
        if (f.kind == KernelFactor::Kind::G) {
            const int nu = static_cast<int>(z.size());
            for (const auto& [c, s] : entries_)
                out.entries_.emplace_back(c, s.times(Term{1, MultiIndex(nu), 1}));
        } else {
            const int nu = static_cast<int>(z.size());
            const std::complex<double> im_const(0.0, z[f.axis - 1].imag());
            for (const auto& [c, s] : entries_) {
                out.entries_.emplace_back(
                    c, s.times(Term{1, MultiIndex::unit(nu, f.axis), 0}));
                if (im_const != 0.0) out.entries_.emplace_back(c * im_const, s);
            }
        }
        return out;
    }

    static TermCombo product(const std::vector<KernelFactor>& factors, int nu,
                             const Eigen::VectorXcd& z) {
        TermCombo out = one(nu);
        for (const auto& f : factors) out = out.times_factor(f, z);
        return out;
    }

    TermCombo differentiated(const MultiIndex& alpha) const {
        TermCombo out;
        for (const auto& [c, s] : entries_) {
            TermSum ds = differentiate(s, alpha);
            if (!ds.empty()) out.entries_.emplace_back(c, std::move(ds));
        }
        return out;
    }

    std::complex<double> evaluate(const Eigen::VectorXd& t, const Eigen::VectorXcd& z) const {
        std::complex<double> out = 0.0;
        for (const auto& [c, s] : entries_) out += c * opcalc::evaluate(s, t, z);
        return out;
    }

    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
};

}  // namespace opcalc
