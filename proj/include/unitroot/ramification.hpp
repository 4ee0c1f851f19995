#pragma once

#include <optional>
#include <string>
#include <vector>

#include "unitroot/monodromy.hpp"
#include "unitroot/rational.hpp"

namespace unitroot {

/// Lower-numbering breaks lambda_1 < lambda_2 < ... of a Z_p-tower.
struct LowerBreaks {
    long long p;
    std::vector<Rational> values;
};

/// lambda_n = sum_{i<n} (s_{i+1} - s_i) p^i, with s_0 = 0.
inline LowerBreaks lower_from_upper(const BreakSequence& s) {
    LowerBreaks out{s.p(), {}};
    Rational lambda = 0;
    Rational prev = 0;
    Rational ppow = 1;
    for (const Rational& sk : s.breaks()) {
        lambda += (sk - prev) * ppow;
        out.values.push_back(lambda);
        prev = sk;
        ppow *= s.p();
    }
    return out;
}

/// s_n = sum_{i<n} (lambda_{i+1} - lambda_i) / p^i; inverse of the above.
inline BreakSequence upper_from_lower(const LowerBreaks& lambda) {
    std::vector<Rational> s;
    Rational acc = 0;
    Rational prev = 0;
    Rational ppow = 1;
    for (const Rational& ln : lambda.values) {
        acc += (ln - prev) / ppow;
        s.push_back(acc);
        prev = ln;
        ppow *= lambda.p;
    }
    return BreakSequence(lambda.p, 1, std::move(s));
}

/// delta_{F_n/F} = sum_{i=1}^n (p^i - p^(i-1)) (s_i + 1).
inline Rational different_of_level(const BreakSequence& s, int n) {
    if (n < 0 || n > static_cast<int>(s.size()))
        throw ContractError("different_of_level", "n <= sequence length");
    Rational delta = 0;
    Rational ppow = 1;
    for (int i = 1; i <= n; ++i) {
        Rational step = ppow * (s.p() - 1);  // p^i - p^(i-1)
        delta += step * (s.breaks()[i - 1] + 1);
        ppow *= s.p();
    }
    return delta;
}

/// Piecewise-linear Herbrand function psi with slope p^i on (s_i, s_{i+1});
/// psi(s_n) = lambda_n by construction.
class HerbrandFunction {
public:
    explicit HerbrandFunction(const BreakSequence& s)
        : p_(s.p()), s_(s.breaks()), lambda_(lower_from_upper(s).values) {}

    Rational psi(const Rational& y) const {
        if (y < 0) throw ContractError("herbrand_psi", "y >= 0");
        Rational x0 = 0, y0 = 0, slope = 1;
        for (std::size_t i = 0; i < s_.size(); ++i) {
            if (y <= s_[i]) return y0 + slope * (y - x0);
            y0 = lambda_[i];
            x0 = s_[i];
            slope *= p_;
        }
        return y0 + slope * (y - x0);
    }

    /// Inverse of psi.
    Rational phi(const Rational& x) const {
        if (x < 0) throw ContractError("herbrand_phi", "x >= 0");
        Rational x0 = 0, y0 = 0, slope = 1;
        for (std::size_t i = 0; i < s_.size(); ++i) {
            if (x <= lambda_[i]) return x0 + (x - y0) / slope;
            y0 = lambda_[i];
            x0 = s_[i];
            slope *= p_;
        }
        return x0 + (x - y0) / slope;
    }

private:
    long long p_;
    std::vector<Rational> s_;
    std::vector<Rational> lambda_;
};

inline Rational herbrand_psi(const BreakSequence& s, const Rational& y) {
    return HerbrandFunction(s).psi(y);
}

/// Per-point break data on a curve, feeding Riemann-Hurwitz.
struct TowerPoint {
    std::string label;
    BreakSequence breaks;
};

struct TowerRamificationData {
    Rational g0;
    long long p;
    std::vector<TowerPoint> points;
};

struct GenusRow {
    int n;
    Rational g;
    bool integral;
};

using GenusTable = std::vector<GenusRow>;

/// g_n = p^n (g_0 - 1) + 1 + (1/2) sum_x delta_{x,n}; exact rationals with
/// an integrality flag, so arbitrary break data can be probed.
inline GenusTable genus_sequence(const TowerRamificationData& data, int n_max) {
    for (const auto& pt : data.points)
        if (static_cast<int>(pt.breaks.size()) < n_max)
            throw ContractError("genus_sequence", "each point has breaks up to n_max");
    GenusTable table;
    Rational ppow = 1;
    for (int n = 0; n <= n_max; ++n) {
        Rational g = ppow * (data.g0 - 1) + 1;
        for (const auto& pt : data.points) g += different_of_level(pt.breaks, n) / 2;
        table.push_back({n, g, is_integer(g)});
        ppow *= data.p;
    }
    return table;
}

/// Breaks of the same tower seen from F_n: s_{K,k} = p^n s_{n+k} - p^n s_n + lambda_n.
inline BreakSequence base_change_up_tower(const BreakSequence& s, int n) {
    if (n < 0 || n >= static_cast<int>(s.size()))
        throw ContractError("base_change_up_tower", "sequence long enough for n");
    if (n == 0) return s;
    LowerBreaks lam = lower_from_upper(s);
    Rational pn = rational_pow(BigInt(s.p()), n);
    std::vector<Rational> out;
    for (std::size_t k = n; k < s.size(); ++k)
        out.push_back(pn * s.breaks()[k] - pn * s.breaks()[n - 1] + lam.values[n - 1]);
    return BreakSequence(s.p(), s.e(), std::move(out));
}

/// Breaks after base change along a disjoint degree-p extension with break
/// s_prime: unchanged below the splice, p*s_n - (p-1)*s_prime above it.
inline BreakSequence base_change_disjoint_p(const BreakSequence& s, const Rational& s_prime) {
    if (s_prime <= 0) throw ContractError("base_change_disjoint_p", "s_prime > 0");
    Rational c = (s.p() - 1) * s_prime;
    std::vector<Rational> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s_prime < s.breaks()[i])
            out.push_back(s.p() * s.breaks()[i] - c);
        else
            out.push_back(s.breaks()[i]);
    }
    return BreakSequence(s.p(), s.e(), std::move(out));
}

/// Per-residue polynomials a_i with g_{km+i} = a_i(p^k), degree m(r+d).
struct GenusFit {
    int m;
    std::vector<std::vector<Rational>> coeffs;  ///< a_i, ascending degree
    int degree;
    int onset;  ///< smallest n from which every class matches exactly
};

namespace detail {

// Exact polynomial interpolation through (x_i, y_i), ascending coefficients.
inline std::vector<Rational> interpolate(const std::vector<std::pair<Rational, Rational>>& pts) {
    const std::size_t n = pts.size();
    // Newton form, then expansion.
    std::vector<Rational> coef(n);
    std::vector<Rational> divided(n);
    for (std::size_t i = 0; i < n; ++i) divided[i] = pts[i].second;
    coef[0] = divided[0];
    for (std::size_t j = 1; j < n; ++j) {
        for (std::size_t i = n - 1; i >= j; --i)
            divided[i] = (divided[i] - divided[i - 1]) / (pts[i].first - pts[i - j].first);
        coef[j] = divided[j];
    }
    std::vector<Rational> poly{coef[n - 1]};
    for (std::size_t j = n - 1; j-- > 0;) {
        // poly <- poly * (x - x_j) + coef[j]
        std::vector<Rational> next(poly.size() + 1, Rational(0));
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] += poly[i];
            next[i] -= poly[i] * pts[j].first;
        }
        next[0] += coef[j];
        poly = std::move(next);
    }
    return poly;
}

inline Rational eval_poly(const std::vector<Rational>& poly, const Rational& x) {
    Rational acc = 0;
    for (std::size_t i = poly.size(); i-- > 0;) acc = acc * x + poly[i];
    return acc;
}

}  // namespace detail

/// Interpolates degree-m(r+d) polynomials per residue class on the last
/// points and verifies backwards; a fit must reproduce at least one point
/// beyond the interpolation nodes, exactly.
inline std::optional<GenusFit> fit_genus_polynomials(const GenusTable& g, long long p, int m,
                                                     int d, const Rational& r) {
    if (m < 1 || !is_integer(r * m))
        throw ContractError("fit_genus_polynomials", "m >= 1 and m*r in Z");
    const int degree = static_cast<int>(numerator(Rational(m) * (r + d)));
    GenusFit fit;
    fit.m = m;
    fit.degree = degree;
    fit.onset = 0;
    for (int i = 0; i < m; ++i) {
        std::vector<std::pair<int, Rational>> pts;  // (k, g_{km+i})
        for (std::size_t idx = i; idx < g.size(); idx += m)
            pts.emplace_back(static_cast<int>((idx - i) / m), g[idx].g);
        if (static_cast<int>(pts.size()) < degree + 2)
            throw ContractError("fit_genus_polynomials",
                                "enough data for degree-m(r+d)+1 interpolation plus a check");
        std::vector<std::pair<Rational, Rational>> nodes;
        for (std::size_t j = pts.size() - degree - 1; j < pts.size(); ++j)
            nodes.emplace_back(rational_pow(BigInt(p), pts[j].first), pts[j].second);
        std::vector<Rational> poly = detail::interpolate(nodes);
        int onset_k = pts[pts.size() - degree - 1].first;
        for (std::size_t j = pts.size() - degree - 1; j-- > 0;) {
            if (detail::eval_poly(poly, rational_pow(BigInt(p), pts[j].first)) != pts[j].second)
                break;
            onset_k = pts[j].first;
        }
        // At least one exactly-verified point beyond the nodes.
        if (onset_k > static_cast<int>(pts[pts.size() - degree - 1].first) - 1)
            return std::nullopt;
        fit.coeffs.push_back(std::move(poly));
        fit.onset = std::max(fit.onset, onset_k * m + i);
    }
    return fit;
}

}  // namespace unitroot
