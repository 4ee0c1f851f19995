#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "unitroot/errors.hpp"
#include "unitroot/rational.hpp"

namespace unitroot {

namespace detail {

inline bool is_prime(long long n) {
    if (n < 2) return false;
    for (long long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// (a * b) mod m without overflow; m < 2^62.
inline long long mulmod(long long a, long long b, long long m) {
    return static_cast<long long>((static_cast<__int128>(a) * b) % m);
}

inline long long powmod(long long base, long long exp, long long m) {
    long long r = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

}  // namespace detail

/// The arithmetic universe: everything is exact modulo pi^prec with T-exponents
/// confined to [-window, window]. The coefficient ring is Z_p[pi]/(pi^e - p)
/// with residue field F_q, q = p^f, so the Frobenius fixes all coefficients.
class PrimeContext {
public:
    PrimeContext(long long p, int f, int e, int prec, long long window)
        : p_(p), f_(f), e_(e), prec_(prec), window_(window) {
        if (!detail::is_prime(p) || p < 3)
            throw ContractError("PrimeContext", "p must be prime and p >= 3");
        if (f < 1) throw ContractError("PrimeContext", "residue degree f >= 1");
        if (e < 1) throw ContractError("PrimeContext", "ramification index e >= 1");
        if (prec < 1) throw ContractError("PrimeContext", "precision prec >= 1");
        if (window < 1) throw ContractError("PrimeContext", "window >= 1");
        if (window > (1LL << 40))
            throw ContractError("PrimeContext", "window <= 2^40");

        // q = p^f, kept small enough that q^prec * window exponent checks
        // stay within __int128.
        __int128 q = 1;
        for (int i = 0; i < f; ++i) {
            q *= p;
            if (q > (1LL << 31)) throw ContractError("PrimeContext", "p^f <= 2^31");
        }
        q_ = static_cast<long long>(q);

        // Digit j of a coefficient lives modulo p^ceil((prec - j)/e).
        digit_mod_.resize(e_);
        for (int j = 0; j < e_; ++j) {
            int ex = (prec_ - j + e_ - 1) / e_;
            __int128 m = 1;
            for (int i = 0; i < ex; ++i) {
                m *= p;
                if (m > (1LL << 62))
                    throw ContractError("PrimeContext", "p^ceil(prec/e) <= 2^62");
            }
            digit_mod_[j] = static_cast<long long>(m);
        }
    }

    long long p() const noexcept { return p_; }
    int f() const noexcept { return f_; }
    int e() const noexcept { return e_; }
    int prec() const noexcept { return prec_; }
    long long window() const noexcept { return window_; }
    long long q() const noexcept { return q_; }
    long long digit_mod(int j) const { return digit_mod_[j]; }

    bool same_universe(const PrimeContext& o) const noexcept {
        return p_ == o.p_ && f_ == o.f_ && e_ == o.e_ && prec_ == o.prec_ &&
               window_ == o.window_;
    }

private:
    long long p_;
    int f_;
    int e_;
    int prec_;
    long long window_;
    long long q_;
    std::vector<long long> digit_mod_;
};

using CtxPtr = std::shared_ptr<const PrimeContext>;

inline CtxPtr make_context(long long p, int f, int e, int prec, long long window) {
    return std::make_shared<const PrimeContext>(p, f, e, prec, window);
}

inline void require_same_context(const char* op, const PrimeContext& a, const PrimeContext& b) {
    if (!a.same_universe(b)) throw ContractError(op, "operands share one context");
}

/// Element of Z_p[pi]/(pi^e - p) known modulo pi^prec. Digit j is the
/// coefficient of pi^j, canonically reduced modulo p^ceil((prec-j)/e).
class CoeffElem {
public:
    explicit CoeffElem(CtxPtr ctx) : ctx_(std::move(ctx)), d_(ctx_->e(), 0) {}

    CoeffElem(CtxPtr ctx, long long value) : CoeffElem(std::move(ctx)) {
        d_[0] = value;
        reduce();
    }

    static CoeffElem zero(const CtxPtr& ctx) { return CoeffElem(ctx); }
    static CoeffElem one(const CtxPtr& ctx) { return CoeffElem(ctx, 1); }

    /// pi^k as an element (zero once k >= prec).
    static CoeffElem pi_pow(const CtxPtr& ctx, int k) {
        if (k < 0) throw ContractError("CoeffElem::pi_pow", "k >= 0");
        CoeffElem r(ctx);
        if (k >= ctx->prec()) return r;
        int j = k % ctx->e();
        int pow = k / ctx->e();
        long long v = 1;
        for (int i = 0; i < pow; ++i) v *= ctx->p();
        r.d_[j] = v;
        r.reduce();
        return r;
    }

    const CtxPtr& context() const noexcept { return ctx_; }
    long long digit(int j) const { return d_[j]; }

    bool is_zero() const noexcept {
        for (long long v : d_)
            if (v != 0) return false;
        return true;
    }

    /// pi-adic valuation; equals prec for the zero element.
    int v_pi() const {
        int best = ctx_->prec();
        for (int j = 0; j < ctx_->e(); ++j) {
            if (d_[j] == 0) continue;
            long long v = d_[j];
            int vp = 0;
            while (v % ctx_->p() == 0) {
                v /= ctx_->p();
                ++vp;
            }
            best = std::min(best, j + ctx_->e() * vp);
        }
        return best;
    }

    bool is_unit() const { return v_pi() == 0; }

    friend CoeffElem operator+(const CoeffElem& a, const CoeffElem& b) {
        require_same_context("CoeffElem::add", *a.ctx_, *b.ctx_);
        CoeffElem r(a.ctx_);
        for (int j = 0; j < a.ctx_->e(); ++j) r.d_[j] = a.d_[j] + b.d_[j];
        r.reduce();
        return r;
    }

    friend CoeffElem operator-(const CoeffElem& a, const CoeffElem& b) {
        require_same_context("CoeffElem::sub", *a.ctx_, *b.ctx_);
        CoeffElem r(a.ctx_);
        for (int j = 0; j < a.ctx_->e(); ++j) r.d_[j] = a.d_[j] - b.d_[j];
        r.reduce();
        return r;
    }

    CoeffElem operator-() const {
        CoeffElem r(ctx_);
        for (int j = 0; j < ctx_->e(); ++j) r.d_[j] = -d_[j];
        r.reduce();
        return r;
    }

    friend CoeffElem operator*(const CoeffElem& a, const CoeffElem& b) {
        require_same_context("CoeffElem::mul", *a.ctx_, *b.ctx_);
        const auto& ctx = *a.ctx_;
        CoeffElem r(a.ctx_);
        for (int i = 0; i < ctx.e(); ++i) {
            if (a.d_[i] == 0) continue;
            for (int j = 0; j < ctx.e(); ++j) {
                if (b.d_[j] == 0) continue;
                int k = (i + j) % ctx.e();
                int carry = (i + j) / ctx.e();  // pi^e = p
                long long m = ctx.digit_mod(k);
                long long term = detail::mulmod(a.d_[i] % m, b.d_[j] % m, m);
                term = detail::mulmod(term, detail::powmod(ctx.p(), carry, m), m);
                r.d_[k] = (r.d_[k] + term) % m;
            }
        }
        r.reduce();
        return r;
    }

    friend bool operator==(const CoeffElem& a, const CoeffElem& b) {
        require_same_context("CoeffElem::eq", *a.ctx_, *b.ctx_);
        return a.d_ == b.d_;
    }
    friend bool operator!=(const CoeffElem& a, const CoeffElem& b) { return !(a == b); }

    /// Multiplicative inverse of a unit, by Newton lifting from the residue.
    CoeffElem invert() const {
        if (!is_unit()) throw ContractError("CoeffElem::invert", "element is a unit");
        CoeffElem x(ctx_, detail::powmod(((d_[0] % ctx_->p()) + ctx_->p()) % ctx_->p(),
                                         ctx_->p() - 2, ctx_->p()));
        CoeffElem two(ctx_, 2);
        // Each step doubles the pi-adic accuracy.
        int steps = 1;
        while ((1 << steps) < ctx_->prec() + 1) ++steps;
        for (int i = 0; i <= steps; ++i) x = x * (two - (*this) * x);
        if (!((*this) * x == one(ctx_)))
            throw ContractError("CoeffElem::invert", "element is a unit");
        return x;
    }

    CoeffElem mul_pi_pow(int k) const { return (*this) * pi_pow(ctx_, k); }

    /// Exact division by pi^k; the quotient is taken modulo pi^prec with its
    /// top k digits set to zero.
    CoeffElem div_pi_pow(int k) const {
        if (k < 0) throw ContractError("CoeffElem::div_pi_pow", "k >= 0");
        if (k == 0) return *this;
        if (v_pi() < std::min(k, ctx_->prec()))
            throw ContractError("CoeffElem::div_pi_pow", "element divisible by pi^k");
        CoeffElem r(ctx_);
        if (is_zero()) return r;
        // Divide by pi once, k times: digits shift down; digit 0 moves to the
        // top with its factor of p removed (pi^e = p).
        std::vector<long long> cur = d_;
        for (int step = 0; step < k; ++step) {
            std::vector<long long> next(ctx_->e(), 0);
            for (int j = 1; j < ctx_->e(); ++j) next[j - 1] = cur[j];
            long long c0 = cur[0];
            if (c0 % ctx_->p() != 0)
                throw ContractError("CoeffElem::div_pi_pow", "element divisible by pi^k");
            next[ctx_->e() - 1] += c0 / ctx_->p();
            cur = std::move(next);
        }
        r.d_ = cur;
        r.reduce();
        return r;
    }

private:
    void reduce() {
        for (int j = 0; j < ctx_->e(); ++j) {
            long long m = ctx_->digit_mod(j);
            d_[j] %= m;
            if (d_[j] < 0) d_[j] += m;
        }
    }

    CtxPtr ctx_;
    std::vector<long long> d_;
};

}  // namespace unitroot
