// Finite-dimensional operator model: commuting Hermitian tuples with a shared
// eigenbasis, iterated commutators, the resolvent-type kernel |A-z|^(-2),
// bracket weights <A>^t and the exact spectral oracle f(A).

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "opcalc/multi_index.hpp"
#include "opcalc/rng.hpp"
#include "opcalc/smooth_function.hpp"
#include "opcalc/term_sum.hpp"

namespace opcalc {

using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

// nu pairwise commuting Hermitian d x d matrices, generated from a shared
// unitary eigenbasis.  `spectrum` row k is the joint spectrum point of the
// k-th shared eigenvector.
struct CommutingTuple {
    int nu = 0;
    int dim = 0;
    Matrix basis;                     // d x d unitary U
    Eigen::MatrixXd spectrum;         // d x nu
    std::vector<Matrix> components;   // A_j = U diag(spectrum.col(j)) U*

    const Matrix& component(int axis) const {
        if (axis < 1 || axis > nu) throw std::domain_error("CommutingTuple: axis out of range");
        return components[static_cast<std::size_t>(axis - 1)];
    }
};

// <A>^t = (I + sum_j A_j^2)^(t/2), kept alongside its exponent.
struct WeightPower {
    double exponent = 0;
    Matrix matrix;
};

inline double op_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

// Haar-like random unitary: QR of a seeded complex Gaussian matrix with the
// R-diagonal phase fixed.
inline Matrix random_unitary(Rng& rng, int d) {
    Matrix gauss(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) gauss(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<Matrix> qr(gauss);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        const std::complex<double> rjj = r(j, j);
        const double a = std::abs(rjj);
        if (a > 0) q.col(j) *= rjj / a;
    }
    return q;
}

inline CommutingTuple make_commuting_tuple(std::uint64_t seed, int nu, int d,
                                           double spectrum_scale) {
    if (nu < 1 || d < 1) throw std::domain_error("make_commuting_tuple: nu, d must be >= 1");
    if (spectrum_scale < 0) throw std::domain_error("make_commuting_tuple: negative scale");
    Rng rng(seed);
    CommutingTuple t;
    t.nu = nu;
    t.dim = d;
    t.basis = random_unitary(rng, d);
    t.spectrum.resize(d, nu);
    for (int j = 0; j < nu; ++j)
        for (int k = 0; k < d; ++k)
            t.spectrum(k, j) = rng.uniform(-spectrum_scale, spectrum_scale);
    t.components.reserve(static_cast<std::size_t>(nu));
    for (int j = 0; j < nu; ++j) {
        Matrix a = t.basis * t.spectrum.col(j).asDiagonal() * t.basis.adjoint();
        // Symmetrize away the last rounding noise.
        t.components.push_back(((a + a.adjoint()) / 2.0).eval());
    }
    return t;
}

// Random bounded operator with entries ~ complex normal / sqrt(d), so
// ||B|| = O(1) across dimensions.
inline Matrix random_bounded(std::uint64_t seed, int d) {
    Rng rng(seed);
    Matrix b(d, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b(i, j) = scale * rng.complex_normal();
    return b;
}

// Exact oracle: f applied to the joint spectrum in the shared basis.
inline Matrix spectral_apply(const CommutingTuple& a,
                             const std::function<std::complex<double>(const RealVector&)>& f) {
    ComplexVector diag(a.dim);
    for (int k = 0; k < a.dim; ++k) diag[k] = f(a.spectrum.row(k).transpose());
    return a.basis * diag.asDiagonal() * a.basis.adjoint();
}

inline Matrix spectral_apply_real(const CommutingTuple& a,
                                  const std::function<double(const RealVector&)>& f) {
    return spectral_apply(a, [&f](const RealVector& x) -> std::complex<double> { return f(x); });
}

// ad_A^alpha(B), iterating [. , A_j] alpha_j times per axis.  The order of
// axes does not matter since the A_j commute; tests check this.
inline Matrix iterated_commutator(const CommutingTuple& a, const Matrix& b,
                                  const MultiIndex& alpha) {
    if (alpha.nu() != a.nu) throw std::domain_error("iterated_commutator: dimension mismatch");
    Matrix x = b;
    for (int j = 1; j <= a.nu; ++j) {
        const Matrix& aj = a.component(j);
        for (int r = 0; r < alpha[j]; ++r) x = (x * aj - aj * x).eval();
    }
    return x;
}

// |A - z|^(-2) = (sum_j (A_j - Re z_j)^2 + (Im z_j)^2 I)^(-1), via the
// joint spectrum.
inline Matrix resolvent_kernel(const CommutingTuple& a, const ComplexVector& z) {
    if (z.size() != a.nu) throw std::domain_error("resolvent_kernel: dimension mismatch");
    ComplexVector diag(a.dim);
    for (int k = 0; k < a.dim; ++k) {
        const double q = abs2_t_minus_z(a.spectrum.row(k).transpose(), z);
        if (q == 0.0) throw std::domain_error("resolvent_kernel: z hits the joint spectrum");
        diag[k] = 1.0 / q;
    }
    return a.basis * diag.asDiagonal() * a.basis.adjoint();
}

inline WeightPower weight(const CommutingTuple& a, double t) {
    WeightPower w;
    w.exponent = t;
    w.matrix = spectral_apply_real(
        a, [t](const RealVector& x) { return std::pow(1.0 + x.squaredNorm(), t / 2.0); });
    return w;
}

// A_l - conj(z_l) as a matrix.
inline Matrix shifted_component(const CommutingTuple& a, int axis, std::complex<double> shift) {
    return a.component(axis) - shift * Matrix::Identity(a.dim, a.dim);
}

// TermSum evaluated as an operator through the spectral oracle.
inline Matrix spectral_term_sum(const CommutingTuple& a, const TermSum& s,
                                const ComplexVector& z) {
    return spectral_apply_real(a, [&](const RealVector& x) { return evaluate(s, x, z); });
}

inline Matrix spectral_term_combo(const CommutingTuple& a, const TermCombo& c,
                                  const ComplexVector& z) {
    return spectral_apply(a, [&](const RealVector& x) { return c.evaluate(x, z); });
}

// --- JSON layout for golden-file tests: row-major entries as [re, im] pairs.

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json data = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            data.push_back({m(i, j).real(), m(i, j).imag()});
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw std::runtime_error("matrix_from_json: size mismatch");
    Matrix m(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index jj = 0; jj < cols; ++jj, ++k)
            m(i, jj) = {data[k][0].get<double>(), data[k][1].get<double>()};
    return m;
}

}  // namespace opcalc
