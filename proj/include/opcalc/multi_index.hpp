// Multi-index arithmetic and enumeration.
//
// A multi-index is a tuple of nu nonnegative integers.  Everything here is
// exact; factorials use arbitrary-precision integers since coefficient
// formulas multiply several factorials together.

#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace opcalc {

using BigInt = boost::multiprecision::cpp_int;

class MultiIndex {
public:
    MultiIndex() = default;

    explicit MultiIndex(int nu) : entries_(static_cast<std::size_t>(check_nu(nu)), 0) {}

    MultiIndex(std::initializer_list<int> init) : entries_(init) {
        for (int e : entries_)
            if (e < 0) throw std::domain_error("MultiIndex: negative entry");
        if (entries_.empty()) throw std::domain_error("MultiIndex: nu must be >= 1");
    }

    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
        for (int e : entries_)
            if (e < 0) throw std::domain_error("MultiIndex: negative entry");
        if (entries_.empty()) throw std::domain_error("MultiIndex: nu must be >= 1");
    }

    int nu() const { return static_cast<int>(entries_.size()); }

    // |alpha|
    int degree() const {
        int sum = 0;
        for (int e : entries_) sum += e;
        return sum;
    }

    // 1-based axis access, matching the convention 1 <= j <= nu.
    int operator[](int axis) const { return entries_[check_axis(axis)]; }

    const std::vector<int>& entries() const { return entries_; }

    // The j-th unit multi-index (1-based axis).
    static MultiIndex unit(int nu, int axis) {
        MultiIndex d(nu);
        d.entries_[d.check_axis(axis)] = 1;
        return d;
    }

    MultiIndex plus(const MultiIndex& other) const {
        require_same_nu(other);
        MultiIndex r = *this;
        for (std::size_t j = 0; j < entries_.size(); ++j) r.entries_[j] += other.entries_[j];
        return r;
    }

    MultiIndex minus(const MultiIndex& other) const {
        require_same_nu(other);
        MultiIndex r = *this;
        for (std::size_t j = 0; j < entries_.size(); ++j) {
            r.entries_[j] -= other.entries_[j];
            if (r.entries_[j] < 0)
                throw std::domain_error("MultiIndex: subtraction yields negative entry");
        }
        return r;
    }

    MultiIndex scaled(int c) const {
        if (c < 0) throw std::domain_error("MultiIndex: negative scale");
        MultiIndex r = *this;
        for (int& e : r.entries_) e *= c;
        return r;
    }

    // Changes entry `axis` by `amount`; signals if the result would be negative.
    MultiIndex shifted(int axis, int amount) const {
        MultiIndex r = *this;
        int& e = r.entries_[check_axis(axis)];
        e += amount;
        if (e < 0) throw std::domain_error("MultiIndex: shift yields negative entry");
        return r;
    }

    // Componentwise <=
    bool dominated_by(const MultiIndex& other) const {
        require_same_nu(other);
        for (std::size_t j = 0; j < entries_.size(); ++j)
            if (entries_[j] > other.entries_[j]) return false;
        return true;
    }

    bool is_zero() const { return degree() == 0; }

    auto operator<=>(const MultiIndex&) const = default;

    std::string str() const {
        std::string s = "(";
        for (std::size_t j = 0; j < entries_.size(); ++j) {
            if (j) s += ',';
            s += std::to_string(entries_[j]);
        }
        return s + ")";
    }

private:
    static int check_nu(int nu) {
        if (nu < 1) throw std::domain_error("MultiIndex: nu must be >= 1");
        return nu;
    }
    std::size_t check_axis(int axis) const {
        if (axis < 1 || axis > nu()) throw std::domain_error("MultiIndex: axis out of range");
        return static_cast<std::size_t>(axis - 1);
    }
    void require_same_nu(const MultiIndex& other) const {
        if (other.nu() != nu()) throw std::domain_error("MultiIndex: dimension mismatch");
    }

    std::vector<int> entries_;
};

inline BigInt integer_factorial(int n) {
    BigInt r = 1;
    for (int k = 2; k <= n; ++k) r *= k;
    return r;
}

// alpha! = prod_j alpha_j!
inline BigInt factorial(const MultiIndex& alpha) {
    BigInt r = 1;
    for (int e : alpha.entries()) r *= integer_factorial(e);
    return r;
}

namespace detail {
inline void enumerate_degree_rec(int nu, int k, std::vector<int>& prefix,
                                 std::vector<MultiIndex>& out) {
    if (static_cast<int>(prefix.size()) == nu - 1) {
        prefix.push_back(k);
        out.emplace_back(prefix);
        prefix.pop_back();
        return;
    }
    // Descending first entry gives lexicographic-descending order, which is
    // fixed and deterministic; tests pin the exact sequence.
    for (int e = k; e >= 0; --e) {
        prefix.push_back(e);
        enumerate_degree_rec(nu, k - e, prefix, out);
        prefix.pop_back();
    }
}
}  // namespace detail

// All alpha of length nu with |alpha| = k, in a fixed deterministic order.
inline std::vector<MultiIndex> enumerate_degree(int nu, int k) {
    if (nu < 1) throw std::domain_error("enumerate_degree: nu must be >= 1");
    if (k < 0) throw std::domain_error("enumerate_degree: k must be >= 0");
    std::vector<MultiIndex> out;
    std::vector<int> prefix;
    detail::enumerate_degree_rec(nu, k, prefix, out);
    return out;
}

// All alpha with |alpha| <= k.
inline std::vector<MultiIndex> enumerate_up_to_degree(int nu, int k) {
    std::vector<MultiIndex> out;
    for (int d = 0; d <= k; ++d)
        for (auto& a : enumerate_degree(nu, d)) out.push_back(std::move(a));
    return out;
}

// All beta with 2*beta <= alpha componentwise.
inline std::vector<MultiIndex> enumerate_half(const MultiIndex& alpha) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(static_cast<std::size_t>(alpha.nu()), 0);
    while (true) {
        out.emplace_back(cur);
        int j = alpha.nu() - 1;
        while (j >= 0) {
            if (2 * (cur[static_cast<std::size_t>(j)] + 1) <= alpha[j + 1]) {
                ++cur[static_cast<std::size_t>(j)];
                break;
            }
            cur[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    return out;
}

// All beta with beta <= alpha componentwise (for product/Leibniz rules).
inline std::vector<MultiIndex> enumerate_below(const MultiIndex& alpha) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(static_cast<std::size_t>(alpha.nu()), 0);
    while (true) {
        out.emplace_back(cur);
        int j = alpha.nu() - 1;
        while (j >= 0) {
            if (cur[static_cast<std::size_t>(j)] + 1 <= alpha[j + 1]) {
                ++cur[static_cast<std::size_t>(j)];
                break;
            }
            cur[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    return out;
}

// Multinomial binom(alpha, beta) = alpha! / (beta! (alpha-beta)!), exact.
inline BigInt multi_binomial(const MultiIndex& alpha, const MultiIndex& beta) {
    return factorial(alpha) / (factorial(beta) * factorial(alpha.minus(beta)));
}

}  // namespace opcalc
