#include <catch2/catch_amalgamated.hpp>

#include "opcalc/rng.hpp"
#include "opcalc/term_sum.hpp"

using namespace opcalc;

namespace {

TermSum single(const Rational& c, const MultiIndex& gamma, int m) {
    return TermSum(Term{c, gamma, m});
}

}  // namespace

TEST_CASE("differentiate: chain rule on g") {
    // d/dt_1 |t-z|^(-2) = -2 (t_1 - Re z_1) |t-z|^(-4)
    const TermSum g = g_kernel(2);
    const TermSum dg = differentiate(g, 1);
    CHECK(dg == single(-2, MultiIndex{1, 0}, 2));

    // constants die
    CHECK(differentiate(single(5, MultiIndex{0, 0}, 0), 1).empty());

    // d_1^2 g in nu = 2
    TermSum d2g = differentiate(dg, 1);
    TermSum expect;
    expect.add(8, MultiIndex{2, 0}, 3);
    expect.add(-2, MultiIndex{0, 0}, 2);
    CHECK(d2g == expect);
}

TEST_CASE("derivative_of_g basic values") {
    CHECK(derivative_of_g(MultiIndex{0}) == single(1, MultiIndex{0}, 1));
    CHECK(derivative_of_g(MultiIndex{1, 0}) == single(-2, MultiIndex{1, 0}, 2));
    TermSum expect;
    expect.add(8, MultiIndex{2, 0}, 3);
    expect.add(-2, MultiIndex{0, 0}, 2);
    CHECK(derivative_of_g(MultiIndex{2, 0}) == expect);
}

TEST_CASE("derivative_of_g path independence") {
    // apply the axes of alpha in scrambled single-step orders
    const MultiIndex alpha{2, 1, 2};
    const TermSum ref = derivative_of_g(alpha);
    const std::vector<std::vector<int>> orders = {
        {1, 1, 2, 3, 3}, {3, 1, 2, 3, 1}, {2, 3, 3, 1, 1}, {3, 3, 2, 1, 1}};
    for (const auto& order : orders) {
        TermSum s = g_kernel(3);
        for (int axis : order) s = differentiate(s, axis);
        CHECK(s == ref);
    }
}

TEST_CASE("t_coeff examples") {
    const Term t0 = t_coeff(MultiIndex{0, 0}, MultiIndex{0, 0});
    CHECK(t0.coeff == 1);
    CHECK(t0.gamma == MultiIndex{0, 0});
    CHECK(t0.m == 0);

    const Term t1 = t_coeff(MultiIndex{1}, MultiIndex{0});
    CHECK(t1.coeff == -2);
    CHECK(t1.gamma == MultiIndex{1});
    CHECK(t1.m == 1);

    const Term t2 = t_coeff(MultiIndex{2}, MultiIndex{1});
    CHECK(t2.coeff == -1);
    CHECK(t2.gamma == MultiIndex{0});
    CHECK(t2.m == 1);

    CHECK_THROWS_AS(t_coeff(MultiIndex{1}, MultiIndex{1}), std::domain_error);
}

TEST_CASE("lemma0 closed form examples") {
    CHECK(lemma0_closed_form(MultiIndex{0}) == single(1, MultiIndex{0}, 1));
    CHECK(lemma0_closed_form(MultiIndex{1, 0}) == single(-2, MultiIndex{1, 0}, 2));
    TermSum expect;
    expect.add(8, MultiIndex{2, 0}, 3);
    expect.add(-2, MultiIndex{0, 0}, 2);
    CHECK(lemma0_closed_form(MultiIndex{2, 0}) == expect);
}

TEST_CASE("lemma0 equals brute-force derivative, exhaustive") {
    for (int nu = 1; nu <= 3; ++nu)
        for (int k = 0; k <= 6; ++k)
            for (const auto& alpha : enumerate_degree(nu, k))
                CHECK(derivative_of_g(alpha) == lemma0_closed_form(alpha));
}

TEST_CASE("identities h1 and h2, exhaustive exact sweep") {
    CHECK(check_h1(MultiIndex{0}, MultiIndex{0}, 1));
    CHECK(check_h2(MultiIndex{0}, MultiIndex{0}, 1));
    CHECK(check_h2(MultiIndex{2}, MultiIndex{1}, 1));
    for (int nu = 1; nu <= 3; ++nu)
        for (int k = 0; k <= 6; ++k)
            for (const auto& alpha : enumerate_degree(nu, k))
                for (const auto& beta : enumerate_half(alpha))
                    for (int j = 1; j <= nu; ++j) {
                        CHECK(check_h1(alpha, beta, j));
                        CHECK(check_h2(alpha, beta, j));
                    }
}

TEST_CASE("evaluate") {
    Eigen::VectorXd t(1);
    t << 1.0;
    Eigen::VectorXcd z(1);
    z << std::complex<double>(0.0, 1.0);
    CHECK(evaluate(g_kernel(1), t, z) == Catch::Approx(0.5));
    CHECK(evaluate(TermSum{}, t, z) == 0.0);
    CHECK(evaluate(derivative_of_g(MultiIndex{1}), t, z) == Catch::Approx(-0.5));

    Eigen::VectorXcd z_sing(1);
    z_sing << std::complex<double>(1.0, 0.0);
    CHECK_THROWS_AS(evaluate(g_kernel(1), t, z_sing), std::domain_error);
}

TEST_CASE("evaluate(differentiate) matches central finite differences") {
    Rng rng(42);
    const double h = 1e-5;
    for (int rep = 0; rep < 20; ++rep) {
        const int nu = 1 + static_cast<int>(rng.raw() % 3);
        // random small sums built from derivatives of g
        TermSum s = g_kernel(nu);
        const int extra = static_cast<int>(rng.raw() % 3);
        for (int i = 0; i < extra; ++i)
            s = differentiate(s, 1 + static_cast<int>(rng.raw() % nu));
        Eigen::VectorXd t(nu);
        Eigen::VectorXcd z(nu);
        for (int j = 0; j < nu; ++j) {
            t[j] = rng.uniform(-2, 2);
            z[j] = {rng.uniform(-2, 2), rng.uniform(0.5, 2)};
        }
        for (int axis = 1; axis <= nu; ++axis) {
            Eigen::VectorXd tp = t, tm = t;
            tp[axis - 1] += h;
            tm[axis - 1] -= h;
            const double fd = (evaluate(s, tp, z) - evaluate(s, tm, z)) / (2 * h);
            const double exact = evaluate(differentiate(s, axis), t, z);
            const double scale = std::max(1.0, std::abs(exact));
            CHECK(std::abs(fd - exact) / scale < 1e-6);
        }
    }
}

TEST_CASE("TermCombo products of g and g_l") {
    Eigen::VectorXcd z(2);
    z << std::complex<double>(0.3, 0.8), std::complex<double>(-0.4, 1.1);
    Eigen::VectorXd t(2);
    t << 0.9, -0.2;

    const auto combo = TermCombo::product(
        {KernelFactor::g(), KernelFactor::gl(2), KernelFactor::g()}, 2, z);
    const std::complex<double> expect =
        (t[1] - std::conj(z[1])) / std::pow(abs2_t_minus_z(t, z), 2);
    const std::complex<double> got = combo.evaluate(t, z);
    CHECK(std::abs(got - expect) < 1e-14);

    // derivative of the combo vs finite differences
    const auto d1 = combo.differentiated(MultiIndex{1, 0});
    const double h = 1e-5;
    Eigen::VectorXd tp = t, tm = t;
    tp[0] += h;
    tm[0] -= h;
    const std::complex<double> fd = (combo.evaluate(tp, z) - combo.evaluate(tm, z)) / (2 * h);
    CHECK(std::abs(d1.evaluate(t, z) - fd) < 1e-8);
}
