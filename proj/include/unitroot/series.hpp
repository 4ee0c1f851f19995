#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "unitroot/context.hpp"

namespace unitroot {

/// Sparse truncated element of O_E: sum of c_n T^n with c_n in
/// Z_p[pi]/(pi^e - p), exact modulo (pi^prec, window). Immutable in spirit:
/// every operation returns a fresh value.
class LaurentSeries {
public:
    explicit LaurentSeries(CtxPtr ctx) : ctx_(std::move(ctx)) {}

    static LaurentSeries zero(const CtxPtr& ctx) { return LaurentSeries(ctx); }

    static LaurentSeries constant(const CtxPtr& ctx, long long v) {
        return monomial(ctx, 0, CoeffElem(ctx, v));
    }

    static LaurentSeries one(const CtxPtr& ctx) { return constant(ctx, 1); }

    static LaurentSeries monomial(const CtxPtr& ctx, long long exp, const CoeffElem& c) {
        LaurentSeries r(ctx);
        r.set(exp, c);
        return r;
    }

    static LaurentSeries monomial(const CtxPtr& ctx, long long exp, long long v) {
        return monomial(ctx, exp, CoeffElem(ctx, v));
    }

    const CtxPtr& context() const noexcept { return ctx_; }
    const std::map<long long, CoeffElem>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    std::size_t term_count() const noexcept { return terms_.size(); }

    /// Canonical insertion: zeros are absent, exponent must fit the window.
    void set(long long exp, const CoeffElem& c) {
        require_same_context("LaurentSeries::set", *ctx_, *c.context());
        if (c.v_pi() >= ctx_->prec()) {
            terms_.erase(exp);
            return;
        }
        if (exp < -ctx_->window() || exp > ctx_->window())
            throw WindowOverflow("LaurentSeries::set", std::abs(exp), ctx_->window());
        terms_.insert_or_assign(exp, c);
    }

    CoeffElem coeff(long long exp) const {
        auto it = terms_.find(exp);
        return it == terms_.end() ? CoeffElem::zero(ctx_) : it->second;
    }

    long long min_exp() const {
        if (terms_.empty()) throw ContractError("LaurentSeries::min_exp", "series is nonzero");
        return terms_.begin()->first;
    }

    long long max_abs_exp() const noexcept {
        if (terms_.empty()) return 0;
        return std::max(std::abs(terms_.begin()->first), std::abs(terms_.rbegin()->first));
    }

    /// min over terms of v_pi(coefficient); prec for the zero series.
    int v_pi() const {
        int best = ctx_->prec();
        for (const auto& [e, c] : terms_) best = std::min(best, c.v_pi());
        return best;
    }

    friend LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b) {
        require_same_context("series_add", *a.ctx_, *b.ctx_);
        LaurentSeries r = a;
        for (const auto& [e, c] : b.terms_) r.set(e, r.coeff(e) + c);
        return r;
    }

    friend LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b) {
        require_same_context("series_sub", *a.ctx_, *b.ctx_);
        LaurentSeries r = a;
        for (const auto& [e, c] : b.terms_) r.set(e, r.coeff(e) - c);
        return r;
    }

    LaurentSeries operator-() const {
        LaurentSeries r(ctx_);
        for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
        return r;
    }

    /// Exact convolution. Cancellation is resolved before the window check,
    /// so only genuinely required support can overflow.
    friend LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
        require_same_context("series_mul", *a.ctx_, *b.ctx_);
        const auto& ctx = *a.ctx_;
        std::map<long long, CoeffElem> acc;
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                CoeffElem prod = ca * cb;
                if (prod.v_pi() >= ctx.prec()) continue;
                long long e = ea + eb;
                auto it = acc.find(e);
                if (it == acc.end())
                    acc.emplace(e, prod);
                else
                    it->second = it->second + prod;
            }
        }
        LaurentSeries r(a.ctx_);
        for (const auto& [e, c] : acc) {
            if (c.v_pi() >= ctx.prec()) continue;
            if (e < -ctx.window() || e > ctx.window())
                throw WindowOverflow("series_mul", std::abs(e), ctx.window());
            r.terms_.emplace(e, c);
        }
        return r;
    }

    friend LaurentSeries operator*(const CoeffElem& c, const LaurentSeries& a) {
        LaurentSeries r(a.ctx_);
        for (const auto& [e, t] : a.terms_) r.set(e, c * t);
        return r;
    }

    friend bool operator==(const LaurentSeries& a, const LaurentSeries& b) {
        require_same_context("series_eq", *a.ctx_, *b.ctx_);
        if (a.terms_.size() != b.terms_.size()) return false;
        auto ia = a.terms_.begin();
        auto ib = b.terms_.begin();
        for (; ia != a.terms_.end(); ++ia, ++ib)
            if (ia->first != ib->first || !(ia->second == ib->second)) return false;
        return true;
    }
    friend bool operator!=(const LaurentSeries& a, const LaurentSeries& b) { return !(a == b); }

    LaurentSeries mul_pi_pow(int k) const {
        LaurentSeries r(ctx_);
        if (k >= ctx_->prec()) return r;
        for (const auto& [e, c] : terms_) r.set(e, c.mul_pi_pow(k));
        return r;
    }

    LaurentSeries div_pi_pow(int k) const {
        LaurentSeries r(ctx_);
        for (const auto& [e, c] : terms_) r.set(e, c.div_pi_pow(k));
        return r;
    }

    LaurentSeries shift_exp(long long n) const {
        LaurentSeries r(ctx_);
        for (const auto& [e, c] : terms_) r.set(e + n, c);
        return r;
    }

private:
    CtxPtr ctx_;
    std::map<long long, CoeffElem> terms_;
};

/// sigma_T^iterate: T -> T^(q^iterate); coefficients are fixed.
inline LaurentSeries frobenius(const LaurentSeries& x, int iterate = 1) {
    if (iterate < 0) throw ContractError("frobenius_apply", "iterate >= 0");
    const auto& ctx = *x.context();
    __int128 scale = 1;
    for (int i = 0; i < iterate; ++i) scale *= ctx.q();
    __int128 need = scale * x.max_abs_exp();
    if (need > ctx.window())
        throw WindowOverflow("frobenius_apply", static_cast<long long>(need), ctx.window());
    LaurentSeries r(x.context());
    for (const auto& [e, c] : x.terms())
        r.set(static_cast<long long>(scale * e), c);
    return r;
}

/// w_k at level k = steps/e: smallest exponent whose coefficient has
/// v_pi <= steps; nullopt encodes +infinity.
inline std::optional<long long> partial_valuation_steps(const LaurentSeries& x, int steps) {
    const auto& ctx = *x.context();
    if (steps < 0 || steps > ctx.prec())
        throw ContractError("partial_valuation", "k*e <= prec");
    for (const auto& [e, c] : x.terms())
        if (c.v_pi() <= steps) return e;
    return std::nullopt;
}

inline std::optional<long long> partial_valuation(const LaurentSeries& x, const Rational& k) {
    Rational ke = k * x.context()->e();
    if (!is_integer(ke) || k < 0)
        throw ContractError("partial_valuation", "k in (1/e)Z and k >= 0");
    BigInt steps = numerator(ke);
    if (steps > x.context()->prec())
        throw ContractError("partial_valuation", "k*e <= prec");
    return partial_valuation_steps(x, static_cast<int>(steps));
}

/// Multiplicative inverse. The unit part must sit at exponent 0: the series
/// is c0 * (1 + z) with c0 a unit and v_pi(z) >= 1; anything else would need
/// unbounded support and fails loudly.
inline LaurentSeries invert(const LaurentSeries& x) {
    const auto& ctx = x.context();
    CoeffElem c0 = x.coeff(0);
    if (!c0.is_unit())
        throw ContractError("series_invert",
                            "unit term at exponent 0 (normalize by a monomial first)");
    for (const auto& [e, c] : x.terms())
        if (e != 0 && c.is_unit())
            throw ContractError("series_invert",
                                "all terms off exponent 0 have v_pi >= 1");
    CoeffElem c0inv = c0.invert();
    LaurentSeries z = c0inv * x - LaurentSeries::one(ctx);  // v_pi(z) >= 1
    // 1/(1+z) = sum (-z)^i; each power gains at least one pi-level.
    LaurentSeries acc = LaurentSeries::one(ctx);
    LaurentSeries pw = LaurentSeries::one(ctx);
    for (int i = 1; i < ctx->prec(); ++i) {
        pw = pw * (-z);
        if (pw.is_zero()) break;
        acc = acc + pw;
    }
    LaurentSeries r = c0inv * acc;
    if (!(r * x == LaurentSeries::one(ctx)))
        throw ContractError("series_invert", "x * invert(x) == 1 at precision");
    return r;
}

inline LaurentSeries divide(const LaurentSeries& a, const LaurentSeries& b) {
    return a * invert(b);
}

struct CircSplit {
    LaurentSeries circ;       ///< no exponent divisible by q
    LaurentSeries descended;  ///< x == circ + frobenius(descended)
};

inline CircSplit circ_split(const LaurentSeries& x) {
    const auto& ctx = x.context();
    CircSplit out{LaurentSeries(ctx), LaurentSeries(ctx)};
    for (const auto& [e, c] : x.terms()) {
        if (e % ctx->q() == 0)
            out.descended.set(e / ctx->q(), c);
        else
            out.circ.set(e, c);
    }
    return out;
}

struct MinimalTwist {
    LaurentSeries lambda_min;  ///< (sigma(a)/a) * lambda; empty support on qZ \ {0}
    LaurentSeries a;           ///< audit witness, a == 1 mod pi
};

/// Clears every term of lambda at a nonzero q-divisible exponent by
/// absorbing it into sigma(a)/a. Offenders are processed lowest pi-level
/// first, ties at the most negative exponent; each step either raises the
/// offending level or strictly shrinks the offending exponent's q-chain.
inline MinimalTwist twist_to_minimal(const LaurentSeries& lambda) {
    const auto& ctx = lambda.context();
    {
        LaurentSeries dev = lambda - LaurentSeries::one(ctx);
        if (dev.v_pi() < 1)
            throw ContractError("twist_to_minimal", "lambda == 1 mod pi");
    }
    LaurentSeries cur = lambda;
    LaurentSeries a = LaurentSeries::one(ctx);
    long long budget = 4LL * ctx->prec() * (static_cast<long long>(lambda.term_count()) + 16);
    while (true) {
        int best_level = ctx->prec();
        long long best_exp = 0;
        for (const auto& [e, c] : cur.terms()) {
            if (e == 0 || e % ctx->q() != 0) continue;
            int lvl = c.v_pi();
            if (lvl < best_level || (lvl == best_level && e < best_exp)) {
                best_level = lvl;
                best_exp = e;
            }
        }
        if (best_level >= ctx->prec()) break;
        if (budget-- <= 0)
            throw NonConvergence("twist_to_minimal",
                                 "offending support did not clear within budget "
                                 "(window too small)");
        CoeffElem b = cur.coeff(best_exp);
        CoeffElem bp = -(b * cur.coeff(0).invert());
        LaurentSeries factor =
            LaurentSeries::one(ctx) + LaurentSeries::monomial(ctx, best_exp / ctx->q(), bp);
        a = a * factor;
        cur = cur * frobenius(factor) * invert(factor);
    }
    if (!(a * cur == frobenius(a) * lambda))
        throw ContractError("twist_to_minimal", "a * lambda_min == sigma(a) * lambda");
    return MinimalTwist{cur, a};
}

}  // namespace unitroot
