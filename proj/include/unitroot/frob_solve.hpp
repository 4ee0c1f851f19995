#pragma once

#include <vector>

#include "unitroot/series.hpp"

namespace unitroot {

/// The iterated system x_i = a_i^(sigma^(i-1)) x_i^sigma + b_i^(sigma^(i-1)).
struct IteratedEquation {
    std::vector<LaurentSeries> a_list;
    std::vector<LaurentSeries> b_list;

    IteratedEquation(std::vector<LaurentSeries> a, std::vector<LaurentSeries> b)
        : a_list(std::move(a)), b_list(std::move(b)) {
        if (a_list.empty()) throw ContractError("IteratedEquation", "nonempty");
        if (a_list.size() != b_list.size())
            throw ContractError("IteratedEquation", "a_list and b_list have equal length");
        const auto& ctx = *a_list.front().context();
        for (const auto& a : a_list) {
            require_same_context("IteratedEquation", ctx, *a.context());
            if (a.v_pi() < 1) throw ContractError("IteratedEquation", "v_pi(a_i) >= 1");
        }
        for (const auto& b : b_list) require_same_context("IteratedEquation", ctx, *b.context());
    }
};

/// Unique solution of x = a*sigma(x) + b, summed until the accumulated
/// pi-valuation of the tail reaches the precision.
inline LaurentSeries solve_R(const LaurentSeries& a, const LaurentSeries& b) {
    require_same_context("solve_R", *a.context(), *b.context());
    const auto& ctx = a.context();
    if (a.v_pi() < 1) throw ContractError("solve_R", "v_pi(a) >= 1 (series diverges)");
    if (b.is_zero()) return LaurentSeries::zero(ctx);

    // Deepest sigma-iterate that can still contribute below the precision,
    // checked against the window before any work happens.
    int depth = (ctx->prec() - 1 - b.v_pi()) / std::max(1, a.v_pi());
    if (depth < 0) depth = 0;
    __int128 scale = 1;
    for (int i = 0; i < depth; ++i) scale *= ctx->q();
    __int128 need = scale * (a.max_abs_exp() + b.max_abs_exp());
    if (need > ctx->window())
        throw WindowOverflow("solve_R", static_cast<long long>(need), ctx->window());

    LaurentSeries x = LaurentSeries::zero(ctx);
    LaurentSeries partial = LaurentSeries::one(ctx);  // a^(1+sigma+...+sigma^(i-1))
    LaurentSeries sb = b;                             // sigma^i(b)
    LaurentSeries sa = a;                             // sigma^i(a)
    for (int i = 0;; ++i) {
        x = x + partial * sb;
        partial = partial * sa;
        if (partial.v_pi() >= ctx->prec()) break;
        sa = frobenius(sa);
        sb = frobenius(sb);
    }
    return x;
}

/// S(a_1,...,a_i; b_1,...,b_i), unwound from the innermost equation.
inline LaurentSeries solve_S(const IteratedEquation& eq) {
    const int n = static_cast<int>(eq.a_list.size());
    LaurentSeries cur = solve_R(eq.a_list[n - 1], eq.b_list[n - 1]);
    for (int j = n - 2; j >= 0; --j)
        cur = solve_R(eq.a_list[j], eq.b_list[j] * frobenius(cur));
    return cur;
}

inline LaurentSeries solve_S(const std::vector<LaurentSeries>& a_list,
                             const std::vector<LaurentSeries>& b_list) {
    return solve_S(IteratedEquation(a_list, b_list));
}

/// T(pi^s; b_1,...,b_i) = S(pi^s,...,pi^s; b_1,...,b_i).
inline LaurentSeries solve_T_iter(int s, const std::vector<LaurentSeries>& b_list) {
    if (s < 1) throw ContractError("solve_T_iter", "s >= 1");
    if (b_list.empty()) throw ContractError("solve_T_iter", "nonempty b_list");
    const auto& ctx = b_list.front().context();
    LaurentSeries pis = LaurentSeries::monomial(ctx, 0, CoeffElem::pi_pow(ctx, s));
    return solve_S(std::vector<LaurentSeries>(b_list.size(), pis), b_list);
}

/// mu(m; a) = prod_i sigma^(a_i)(m_i) for nondecreasing nonnegative a.
inline LaurentSeries mu_product(const std::vector<LaurentSeries>& m_list,
                                const std::vector<int>& a_list) {
    if (m_list.empty() || m_list.size() != a_list.size())
        throw ContractError("mu_product", "lengths match and are nonzero");
    for (std::size_t i = 0; i + 1 < a_list.size(); ++i)
        if (a_list[i] > a_list[i + 1])
            throw ContractError("mu_product", "a_1 <= ... <= a_d");
    if (a_list.front() < 0) throw ContractError("mu_product", "a_i >= 0");
    LaurentSeries r = LaurentSeries::one(m_list.front().context());
    for (std::size_t i = 0; i < m_list.size(); ++i)
        r = r * frobenius(m_list[i], a_list[i]);
    return r;
}

}  // namespace unitroot
