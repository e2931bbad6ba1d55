// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "errors.hpp"
#include "geometry.hpp"

// Closed forms for the Cantor square, U-set and Koch examples.
namespace sscurv {

// Cantor square with corner squares of side p; g = 1 - 2p is the gap. The
// intersection of the two closest first-level neighbourhoods is a Cantor set of
// scale s whose complementary intervals have lengths s p^k g (2^k of each).
struct CantorSquareParams {
    double p = 1.0 / 3;
    double s = 1.0 / 3;

    double g() const { return 1 - 2 * p; }
    double critical() const { return g() / 2; }
};

inline CantorSquareParams cantor_params(double p, bool third_scale = false) {
    if (!(p > 0 && p < 0.5)) throw DomainError("cantor-square parameter p must lie in (0, 1/2)");
    return {p, third_scale ? 1.0 / 3 : p};
}

// 1 + #{complementary intervals with l^2 > 4 eps^2 - g^2}; saturates at 2^62.
inline std::uint64_t cantor_N(const CantorSquareParams& c, double eps) {
    const double g = c.g();
    if (!(eps > g / 2)) throw DomainError("cantor_N needs eps > g/2");
    const double thr = 4 * eps * eps - g * g;
    std::uint64_t n = 1;
    double len = c.s * g;
    for (int k = 0; k < 62 && len * len > thr; ++k, len *= c.p) n += std::uint64_t{1} << k;
    return n;
}

inline double cantor_alpha(const CantorSquareParams& c, double eps) {
    const double g = c.g();
    if (!(eps >= g / 2)) throw DomainError("cantor_alpha needs eps >= g/2");
    return 2 * std::asin(std::min(1.0, g / (2 * eps)));
}

// Each of the N components has two corners of exterior angle alpha.
inline double cantor_c0var(const CantorSquareParams& c, double eps) {
    return static_cast<double>(cantor_N(c, eps)) * cantor_alpha(c, eps) / std::numbers::pi;
}

namespace detail {
inline double pow3(int n) {
    double v = 1;
    for (int i = 0; i < n; ++i) v *= 3;
    return v;
}
}  // namespace detail

// m >= 1 with eps in [3^-(m+2)/2, 3^-(m+1)/2); endpoints are matched to 1e-12 relative
// so that however the caller rounds 3^-n/2 it lands in the band it opens.
inline int uset_band(double eps) {
    if (!(eps > 0 && eps < 1.0 / 18 * (1 - 1e-12))) throw DomainError("uset band needs 0 < eps < 1/18");
    const double e = eps * (1 + 1e-12);
    int m = std::max(1, static_cast<int>(std::ceil(-std::log(2 * e) / std::log(3.0))) - 2);
    while (e < 0.5 / detail::pow3(m + 2)) ++m;
    while (m > 1 && e >= 0.5 / detail::pow3(m + 1)) --m;
    return m;
}

// Corner pairs J = 2^m - 1 facing across the (1),(2) junction.
inline long uset_pairs(double eps) { return (1L << uset_band(eps)) - 1; }

// Two corners per pair, each of curvature -1/4.
inline double uset_c0var(double eps) { return 0.5 * static_cast<double>(uset_pairs(eps)); }

struct KochConstants {
    double arc_measure = 1.0 / 6;
    double junction_lower = -1.0;
    double junction_upper = -0.5;
    double d0 = 7.0 / 6;
    double r = 1 / std::sqrt(3.0);
    Vec2 critical_point{0.5, std::sqrt(3.0) / 18};

    double critical_value(int k) const { return std::pow(r, k) / 9; }
};

inline KochConstants koch_constants() { return {}; }

}  // namespace sscurv
