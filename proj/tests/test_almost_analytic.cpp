#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "opcalc/almost_analytic.hpp"
#include "opcalc/rng.hpp"

using namespace opcalc;
using cd = std::complex<double>;

namespace {

Eigen::VectorXcd zvec(std::initializer_list<cd> v) {
    Eigen::VectorXcd z(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (cd e : v) z[i++] = e;
    return z;
}

}  // namespace

TEST_CASE("construction guards") {
    const auto f = bracket_power(1, -2.0);
    CHECK_THROWS_AS(build_extension(f, 0), std::domain_error);
    CHECK_THROWS_AS(build_extension(f, f.max_order()), std::domain_error);
    CHECK_THROWS_AS(AlmostAnalytic(f, 2, {1.0, 1.5, 3.0}), std::domain_error);  // gap < 1
    CHECK_THROWS_AS(AlmostAnalytic(f, 2, {1.0, 2.0}), std::domain_error);       // size
    const auto ext = build_extension(f, 3);
    for (std::size_t k = 1; k < ext.lambda().size(); ++k)
        CHECK(ext.lambda()[k] >= ext.lambda()[k - 1] + 1.0);
    CHECK_THROWS_AS(ext.dbar(2, zvec({cd(0, 0.1)})), std::domain_error);
    CHECK_THROWS_AS(verify_decay(ext, 4, 10), std::domain_error);
}

TEST_CASE("restriction to the real axis is f") {
    Rng rng(11);
    for (const auto& f : {bracket_power(2, -2.0), gaussian(2), mollified_indicator(2, 2.0)}) {
        const auto ext = build_extension(f, 3);
        for (int rep = 0; rep < 10; ++rep) {
            Eigen::VectorXd u(2);
            u << rng.uniform(-3, 3), rng.uniform(-3, 3);
            const cd val = ext.value(zvec({cd(u[0], 0.0), cd(u[1], 0.0)}));
            CHECK(val.real() == f(u));
            CHECK(val.imag() == 0.0);
        }
    }
}

TEST_CASE("support: vanishes once one |v_j| leaves the cone") {
    const auto ext = build_extension(bracket_power(2, -2.0), 3);
    Eigen::VectorXd u(2);
    u << 1.0, -0.5;
    const double r = ext.support_radius(u);
    const auto z = zvec({cd(u[0], 1.01 * r), cd(u[1], 0.1 * r)});
    CHECK(ext.value(z) == 0.0);
    CHECK(ext.dbar_all(z).norm() == 0.0);
    // just inside: generally nonzero
    CHECK(ext.value(zvec({cd(u[0], 0.9 * r), cd(u[1], 0.1 * r)})) != 0.0);
}

TEST_CASE("linear function has an exact analytic extension in the plateau") {
    const auto ext = build_extension(coordinate(1, 1), 2);
    const double plateau = 0.5 / ext.lambda().back();  // |v| <= plateau * <u>
    for (double u : {0.0, 0.7, -2.0}) {
        const double v = 0.8 * plateau * std::sqrt(1 + u * u);
        const auto z = zvec({cd(u, v)});
        const cd val = ext.value(z);
        CHECK(std::abs(val - cd(u, v)) < 1e-15);
        CHECK(ext.dbar_all(z).norm() == 0.0);
    }
}

TEST_CASE("dbar agrees with finite differences of value") {
    Rng rng(23);
    for (const auto& f : {bracket_power(2, -2.0), gaussian(2)}) {
        const auto ext = build_extension(f, 3);
        for (int rep = 0; rep < 8; ++rep) {
            Eigen::VectorXd u(2);
            u << rng.uniform(-2, 2), rng.uniform(-2, 2);
            const double r = ext.support_radius(u);
            // generic point, including the kappa transition band
            Eigen::VectorXcd z = zvec({cd(u[0], rng.uniform(0.05, 0.95) * r),
                                       cd(u[1], rng.uniform(-0.95, -0.05) * r)});
            const Eigen::VectorXcd db = ext.dbar_all(z);
            const double h = 1e-6;
            for (int l = 0; l < 2; ++l) {
                Eigen::VectorXcd zp = z, zm = z;
                zp[l] += h;
                zm[l] -= h;
                const cd du = (ext.value(zp) - ext.value(zm)) / (2 * h);
                zp = z;
                zm = z;
                zp[l] += cd(0, h);
                zm[l] -= cd(0, h);
                const cd dv = (ext.value(zp) - ext.value(zm)) / (2 * h);
                const cd fd = 0.5 * (du + cd(0, 1) * dv);
                CHECK(std::abs(fd - db[l]) < 1e-5 * std::max(1.0, std::abs(db[l])));
            }
        }
    }
}

TEST_CASE("dbar vanishes to order N as v -> 0") {
    for (int N : {2, 3}) {
        const auto ext = build_extension(bracket_power(1, -2.0), N);
        const auto rep = verify_decay(ext, N, 200);
        CHECK(std::abs(rep.fitted_order - N) < 0.2);
        for (double c : rep.c_l) {
            CHECK(std::isfinite(c));
            CHECK(c >= 0.0);
        }
    }
    const auto ext2 = build_extension(gaussian(2), 3);
    const auto rep2 = verify_decay(ext2, 3, 150);
    CHECK(std::abs(rep2.fitted_order - 3) < 0.2);
}
