// Smooth function families with closed-form partial derivatives of all
// orders, their derivative-bound constants C_alpha, and the compactly
// supported bump used both for the extension cutoff kappa and for the
// cutoff family chi(x/k) f(x).

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "opcalc/multi_index.hpp"
#include "opcalc/rng.hpp"

namespace opcalc {

// ---------------------------------------------------------------------------
// Smooth step and bump with derivatives of every order.
//
// psi(t) = exp(-1/t) for t > 0; its n-th derivative is p_n(1/t) exp(-1/t)
// with the polynomial recursion p_{n+1}(u) = u^2 (p_n(u) - p_n'(u)).
// step(t) = psi(t) / (psi(t) + psi(1-t)) is 0 for t <= 0 and 1 for t >= 1;
// its derivatives follow from Leibniz applied to step * (psi(t)+psi(1-t)).

namespace detail {

class ExpInvDerivatives {
public:
    // n-th derivative of exp(-1/t); zero for t <= 0.
    double operator()(int n, double t) const {
        if (t <= 0.0) return 0.0;
        const double u = 1.0 / t;
        const auto& p = poly(n);
        double v = 0.0;
        for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * u + *it;
        return v * std::exp(-u);
    }

private:
    const std::vector<double>& poly(int n) const {
        while (static_cast<int>(polys_.size()) <= n) {
            const auto& p = polys_.back();
            // q(u) = u^2 (p(u) - p'(u))
            std::vector<double> q(p.size() + 2, 0.0);
            for (std::size_t k = 0; k < p.size(); ++k) {
                q[k + 2] += p[k];
                if (k + 1 < p.size()) q[k + 2] -= static_cast<double>(k + 1) * p[k + 1];
            }
            polys_.push_back(std::move(q));
        }
        return polys_[static_cast<std::size_t>(n)];
    }

    mutable std::vector<std::vector<double>> polys_{{1.0}};
};

inline double binomial_double(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / i;
    return r;
}

}  // namespace detail

// step(t): 0 for t <= 0, 1 for t >= 1, smooth in between.
class SmoothStep {
public:
    double derivative(int n, double t) const {
        if (t <= 0.0 || t >= 1.0) return n == 0 ? (t >= 1.0 ? 1.0 : 0.0) : 0.0;
        // q * D = psi with D(t) = psi(t) + psi(1-t):
        // q^(n) = (psi^(n) - sum_{k=1}^n C(n,k) D^(k) q^(n-k)) / D
        std::vector<double> q(static_cast<std::size_t>(n) + 1);
        const double den = psi_(0, t) + psi_(0, 1.0 - t);
        q[0] = psi_(0, t) / den;
        for (int m = 1; m <= n; ++m) {
            double acc = psi_(m, t);
            for (int k = 1; k <= m; ++k) {
                const double dk =
                    psi_(k, t) + (k % 2 ? -1.0 : 1.0) * psi_(k, 1.0 - t);
                acc -= detail::binomial_double(m, k) * dk * q[static_cast<std::size_t>(m - k)];
            }
            q[static_cast<std::size_t>(m)] = acc / den;
        }
        return q[static_cast<std::size_t>(n)];
    }

    double operator()(double t) const { return derivative(0, t); }

private:
    detail::ExpInvDerivatives psi_;
};

// Even bump: 1 on [-plateau, plateau], 0 outside [-1, 1].  Composition
// step(sigma(x)) with the quadratic sigma(x) = (1 - x^2)/(1 - plateau^2);
// n-th derivatives via the recursion for coefficients of step^(k)(sigma(x)).
class Bump1D {
public:
    explicit Bump1D(double plateau = 0.5) : plateau_(plateau) {
        if (!(plateau > 0.0 && plateau < 1.0))
            throw std::domain_error("Bump1D: plateau must lie in (0,1)");
        scale_ = 1.0 / (1.0 - plateau * plateau);
    }

    double plateau() const { return plateau_; }
    double support_radius() const { return 1.0; }

    double operator()(double x) const {
        return step_(sigma(x));
    }

    double derivative(double x) const {
        const double s = sigma(x);
        if (s <= 0.0 || s >= 1.0) return 0.0;
        return step_.derivative(1, s) * (-2.0 * x * scale_);
    }

    // n-th derivative: D_n(x) = sum_k c_{n,k}(x) step^(k)(sigma(x)) with
    // polynomial c's obeying c_{n+1,k} = c_{n,k}' + c_{n,k-1} sigma'(x).
    double nth_derivative(int n, double x) const {
        if (n == 0) return (*this)(x);
        if (n == 1) return derivative(x);
        const double s = sigma(x);
        if (s <= 0.0 || s >= 1.0) return 0.0;
        const auto& row = coeffs(n);
        double out = 0.0;
        for (std::size_t k = 1; k < row.size(); ++k) {
            if (row[k].empty()) continue;
            double c = 0.0;
            for (auto it = row[k].rbegin(); it != row[k].rend(); ++it) c = c * x + *it;
            out += c * step_.derivative(static_cast<int>(k), s);
        }
        return out;
    }

private:
    using Poly = std::vector<double>;  // coefficients, ascending powers of x

    double sigma(double x) const { return (1.0 - x * x) * scale_; }

    static Poly poly_derivative(const Poly& p) {
        if (p.size() <= 1) return {};
        Poly d(p.size() - 1);
        for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = static_cast<double>(k) * p[k];
        return d;
    }

    Poly times_sigma_prime(const Poly& p) const {
        // sigma'(x) = -2 scale * x
        Poly r(p.size() + 1, 0.0);
        for (std::size_t k = 0; k < p.size(); ++k) r[k + 1] = -2.0 * scale_ * p[k];
        return r;
    }

    static void poly_add(Poly& a, const Poly& b) {
        if (b.size() > a.size()) a.resize(b.size(), 0.0);
        for (std::size_t k = 0; k < b.size(); ++k) a[k] += b[k];
    }

    const std::vector<Poly>& coeffs(int n) const {
        while (static_cast<int>(rows_.size()) <= n) {
            const auto& prev = rows_.back();
            std::vector<Poly> next(prev.size() + 1);
            for (std::size_t k = 0; k < prev.size(); ++k) {
                if (prev[k].empty()) continue;
                poly_add(next[k], poly_derivative(prev[k]));
                poly_add(next[k + 1], times_sigma_prime(prev[k]));
            }
            rows_.push_back(std::move(next));
        }
        return rows_[static_cast<std::size_t>(n)];
    }

    double plateau_;
    double scale_;
    SmoothStep step_;
    mutable std::vector<std::vector<Poly>> rows_{{Poly{1.0}}};  // row n=0: c_{0,0} = 1
};

// <x> = sqrt(1 + |x|^2), the Japanese bracket.
inline double bracket(const Eigen::VectorXd& x) { return std::sqrt(1.0 + x.squaredNorm()); }

// ---------------------------------------------------------------------------
// SmoothFunction: evaluation of f and all partials d^alpha f up to a declared
// order, with the decay exponent s of the bound |d^alpha f| <= C_alpha <x>^(s-|alpha|).

class SmoothFunction {
public:
    using PartialFn = std::function<double(const MultiIndex&, const Eigen::VectorXd&)>;

    SmoothFunction() = default;
    SmoothFunction(std::string name, int nu, double s, int max_order, PartialFn partial)
        : name_(std::move(name)), nu_(nu), s_(s), max_order_(max_order),
          partial_(std::move(partial)) {}

    const std::string& name() const { return name_; }
    int nu() const { return nu_; }
    double s() const { return s_; }
    int max_order() const { return max_order_; }

    double operator()(const Eigen::VectorXd& x) const { return partial_(MultiIndex(nu_), x); }

    double partial(const MultiIndex& alpha, const Eigen::VectorXd& x) const {
        if (alpha.degree() > max_order_)
            throw std::domain_error("SmoothFunction: derivative order " +
                                    std::to_string(alpha.degree()) + " exceeds available " +
                                    std::to_string(max_order_));
        return partial_(alpha, x);
    }

    // Families with closed-form constants install one here; otherwise the
    // grid estimate below is used.
    SmoothFunction& with_c_alpha(std::function<double(const MultiIndex&)> fn) {
        c_alpha_fn_ = std::move(fn);
        return *this;
    }

    // Smallest constant over a seeded radial grid, inflated by 35%:
    // C_alpha ~ 1.35 * max |d^alpha f(x)| <x>^(|alpha|-s).
    double estimate_c_alpha(const MultiIndex& alpha) const {
        if (c_alpha_fn_) return c_alpha_fn_(alpha);
        double worst = 0.0;
        for (const auto& x : sample_grid()) {
            const double w = std::pow(1.0 + x.squaredNorm(), (alpha.degree() - s_) / 2.0);
            worst = std::max(worst, std::abs(partial(alpha, x)) * w);
        }
        return 1.35 * worst;
    }

    double c_degree(int k) const {
        auto it = c_by_degree_.find(k);
        if (it != c_by_degree_.end()) return it->second;
        double worst = 0.0;
        for (const auto& alpha : enumerate_degree(nu_, k))
            worst = std::max(worst, estimate_c_alpha(alpha));
        c_by_degree_[k] = worst;
        return worst;
    }

private:
    std::vector<Eigen::VectorXd> sample_grid() const {
        if (!grid_.empty()) return grid_;
        // Geometric radial shells out to |x| = 64, fine enough to resolve
        // O(1)-width features (bump transition bands), in axis, diagonal and
        // seeded random directions.
        std::vector<double> radii{0.0};
        for (double r = 1.0 / 16.0; r <= 64.0; r *= std::pow(2.0, 0.125)) radii.push_back(r);
        std::vector<Eigen::VectorXd> dirs;
        for (int j = 0; j < nu_; ++j) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(nu_);
            e[j] = 1.0;
            dirs.push_back(e);
            dirs.push_back(-e);
        }
        if (nu_ > 1) {
            dirs.push_back(Eigen::VectorXd::Ones(nu_).normalized());
            Eigen::VectorXd alt(nu_);
            for (int j = 0; j < nu_; ++j) alt[j] = (j % 2 ? -1.0 : 1.0);
            dirs.push_back(alt.normalized());
            Rng rng(0x5a17);
            for (int k = 0; k < 48; ++k) {
                Eigen::VectorXd d(nu_);
                for (int j = 0; j < nu_; ++j) d[j] = rng.normal();
                if (d.norm() > 1e-3) dirs.push_back(d.normalized());
            }
        }
        for (double r : radii)
            for (const auto& dir : dirs) grid_.push_back(r * dir);
        return grid_;
    }

    std::string name_;
    int nu_ = 1;
    double s_ = 0;
    int max_order_ = 0;
    PartialFn partial_;
    std::function<double(const MultiIndex&)> c_alpha_fn_;
    mutable std::map<int, double> c_by_degree_;
    mutable std::vector<Eigen::VectorXd> grid_;
};

// A parametrized family {f_lambda} sharing s and the C_alpha bounds.
struct FunctionFamily {
    std::string name;
    double s = 0;
    std::vector<double> parameters;
    std::function<SmoothFunction(double)> make;

    std::vector<SmoothFunction> instantiate() const {
        std::vector<SmoothFunction> out;
        out.reserve(parameters.size());
        for (double lam : parameters) out.push_back(make(lam));
        return out;
    }
};

// ---------------------------------------------------------------------------
// Built-in families.  Bracket powers and Gaussians stay inside small term
// families closed under differentiation; partials are memoized per alpha.

namespace detail {

// Terms c * y^gamma * <y>^(p - 2k), y = x - shift, closed under d/dx_i.
class BracketTermTable {
public:
    BracketTermTable(int nu, double p, double shift) : nu_(nu), p_(p), shift_(shift) {
        table_[MultiIndex(nu)] = {{1.0, MultiIndex(nu), 0}};
    }

    double eval(const MultiIndex& alpha, const Eigen::VectorXd& x) const {
        const auto& terms = derive(alpha);
        Eigen::VectorXd y = x.array() - shift_;
        const double b2 = 1.0 + y.squaredNorm();
        double out = 0.0;
        for (const auto& t : terms) {
            double v = t.c * std::pow(b2, (p_ - 2.0 * t.k) / 2.0);
            for (int j = 1; j <= nu_; ++j)
                for (int r = 0; r < t.gamma[j]; ++r) v *= y[j - 1];
            out += v;
        }
        return out;
    }

private:
    struct T {
        double c;
        MultiIndex gamma;
        int k;
    };

    const std::vector<T>& derive(const MultiIndex& alpha) const {
        auto it = table_.find(alpha);
        if (it != table_.end()) return it->second;
        // Differentiate the table entry of alpha - delta_j for the first
        // nonzero axis j.
        int axis = 1;
        while (alpha[axis] == 0) ++axis;
        const auto& prev = derive(alpha.shifted(axis, -1));
        std::map<std::pair<MultiIndex, int>, double> acc;
        for (const auto& t : prev) {
            if (t.gamma[axis] > 0)
                acc[{t.gamma.shifted(axis, -1), t.k}] += t.c * t.gamma[axis];
            acc[{t.gamma.shifted(axis, +1), t.k + 1}] += t.c * (p_ - 2.0 * t.k);
        }
        std::vector<T> out;
        for (const auto& [key, c] : acc)
            if (c != 0.0) out.push_back({c, key.first, key.second});
        return table_.emplace(alpha, std::move(out)).first->second;
    }

    int nu_;
    double p_;
    double shift_;
    mutable std::map<MultiIndex, std::vector<T>> table_;
};

// Terms c * x^gamma * exp(-|x|^2), closed under d/dx_i.
class GaussianTermTable {
public:
    explicit GaussianTermTable(int nu) : nu_(nu) {
        table_[MultiIndex(nu)] = {{1.0, MultiIndex(nu)}};
    }

    double eval(const MultiIndex& alpha, const Eigen::VectorXd& x) const {
        const auto& terms = derive(alpha);
        const double e = std::exp(-x.squaredNorm());
        double out = 0.0;
        for (const auto& t : terms) {
            double v = t.c * e;
            for (int j = 1; j <= nu_; ++j)
                for (int r = 0; r < t.gamma[j]; ++r) v *= x[j - 1];
            out += v;
        }
        return out;
    }

private:
    struct T {
        double c;
        MultiIndex gamma;
    };

    const std::vector<T>& derive(const MultiIndex& alpha) const {
        auto it = table_.find(alpha);
        if (it != table_.end()) return it->second;
        int axis = 1;
        while (alpha[axis] == 0) ++axis;
        const auto& prev = derive(alpha.shifted(axis, -1));
        std::map<MultiIndex, double> acc;
        for (const auto& t : prev) {
            if (t.gamma[axis] > 0) acc[t.gamma.shifted(axis, -1)] += t.c * t.gamma[axis];
            acc[t.gamma.shifted(axis, +1)] += -2.0 * t.c;
        }
        std::vector<T> out;
        for (const auto& [g, c] : acc)
            if (c != 0.0) out.push_back({c, g});
        return table_.emplace(alpha, std::move(out)).first->second;
    }

    int nu_;
    mutable std::map<MultiIndex, std::vector<T>> table_;
};

}  // namespace detail

// f(x) = <x>^s.
inline SmoothFunction bracket_power(int nu, double s, int max_order = 16) {
    auto table = std::make_shared<detail::BracketTermTable>(nu, s, 0.0);
    return SmoothFunction(
        "bracket_power(s=" + std::to_string(s) + ")", nu, s, max_order,
        [table](const MultiIndex& a, const Eigen::VectorXd& x) { return table->eval(a, x); });
}

// f(x) = <x - lambda*1>^(-2).
inline SmoothFunction shifted_inverse_bracket(int nu, double lambda, int max_order = 16) {
    auto table = std::make_shared<detail::BracketTermTable>(nu, -2.0, lambda);
    return SmoothFunction(
        "shifted_inverse_bracket(lambda=" + std::to_string(lambda) + ")", nu, -2.0, max_order,
        [table](const MultiIndex& a, const Eigen::VectorXd& x) { return table->eval(a, x); });
}

// f(x) = exp(-|x|^2).  Decays faster than any bracket power; declared s = -2.
inline SmoothFunction gaussian(int nu, int max_order = 16) {
    auto table = std::make_shared<detail::GaussianTermTable>(nu);
    return SmoothFunction(
        "gaussian", nu, -2.0, max_order,
        [table](const MultiIndex& a, const Eigen::VectorXd& x) { return table->eval(a, x); });
}

// f(x) = prod_j bump(x_j / radius): 1 near 0, 0 outside the radius box.
inline SmoothFunction mollified_indicator(int nu, double radius, int max_order = 12) {
    auto bump = std::make_shared<Bump1D>(0.5);
    // Closed-form constants from the product structure: the grid estimator
    // misses the tensor corners where several coordinates sit in the
    // transition band at once.
    auto sup = std::make_shared<std::map<int, double>>();
    auto sup_deriv = [bump, sup](int n) {
        auto it = sup->find(n);
        if (it != sup->end()) return it->second;
        double m = n == 0 ? 1.0 : 0.0;
        for (int i = 0; i <= 8000; ++i)
            m = std::max(m, std::abs(bump->nth_derivative(n, 0.5 + 0.5 * i / 8000.0)));
        return (*sup)[n] = 1.05 * m;
    };
    SmoothFunction f(
        "mollified_indicator(r=" + std::to_string(radius) + ")", nu, -2.0, max_order,
        [bump, radius](const MultiIndex& a, const Eigen::VectorXd& x) {
            double v = 1.0;
            for (int j = 1; j <= a.nu(); ++j)
                v *= bump->nth_derivative(a[j], x[j - 1] / radius) / std::pow(radius, a[j]);
            return v;
        });
    f.with_c_alpha([sup_deriv, nu, radius](const MultiIndex& a) {
        double c = 1.0;
        for (int j = 1; j <= a.nu(); ++j) c *= sup_deriv(a[j]) / std::pow(radius, a[j]);
        // sup over the support box of <x>^(|a|-s) with s = -2
        return c * std::pow(1.0 + nu * radius * radius, (a.degree() + 2.0) / 2.0);
    });
    return f;
}

// f(x) = x_j (linear coordinate; exact analytic extension checks).
inline SmoothFunction coordinate(int nu, int axis, int max_order = 16) {
    return SmoothFunction(
        "coordinate", nu, 1.0, max_order,
        [axis](const MultiIndex& a, const Eigen::VectorXd& x) -> double {
            if (a.degree() == 0) return x[axis - 1];
            if (a.degree() == 1 && a[axis] == 1) return 1.0;
            return 0.0;
        });
}

// chi(x/k) * f(x) via the multi-variable product rule; same decay exponent.
inline SmoothFunction cutoff_family(const SmoothFunction& f, const SmoothFunction& chi,
                                    double k) {
    if (k <= 0) throw std::domain_error("cutoff_family: k must be positive");
    if (chi.nu() != f.nu()) throw std::domain_error("cutoff_family: dimension mismatch");
    const int order = std::min(f.max_order(), chi.max_order());
    return SmoothFunction(
        f.name() + "*chi(x/" + std::to_string(k) + ")", f.nu(), f.s(), order,
        [f, chi, k](const MultiIndex& a, const Eigen::VectorXd& x) {
            double out = 0.0;
            const Eigen::VectorXd xs = x / k;
            for (const MultiIndex& b : enumerate_below(a)) {
                const double binom = static_cast<double>(multi_binomial(a, b));
                out += binom * chi.partial(b, xs) / std::pow(k, b.degree()) *
                       f.partial(a.minus(b), x);
            }
            return out;
        });
}

// The built-in catalog used by the CLI.
inline std::vector<FunctionFamily> builtin_families(int nu) {
    std::vector<FunctionFamily> out;
    out.push_back({"bracket_power", -2.0, {-2.0, -1.0, -3.0},
                   [nu](double s) { return bracket_power(nu, s); }});
    out.push_back({"shifted_inverse_bracket", -2.0, {-1.0, -0.5, 0.0, 0.5, 1.0},
                   [nu](double lam) { return shifted_inverse_bracket(nu, lam); }});
    out.push_back({"gaussian", -2.0, {0.0},
                   [nu](double) { return gaussian(nu); }});
    out.push_back({"mollified_indicator", -2.0, {2.0, 4.0},
                   [nu](double r) { return mollified_indicator(nu, r); }});
    return out;
}

}  // namespace opcalc
