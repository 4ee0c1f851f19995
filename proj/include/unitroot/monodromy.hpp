#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "unitroot/decay.hpp"
#include "unitroot/series.hpp"

namespace unitroot {

/// Upper-numbering ramification breaks s_1 <= s_2 <= ... read off a minimal
/// Frobenius. `validated` records whether the growth hypotheses hold
/// throughout: s_{k+1} > p*s_k and p does not divide s_k.
class BreakSequence {
public:
    BreakSequence(long long p, int e, std::vector<Rational> breaks)
        : p_(p), e_(e), breaks_(std::move(breaks)) {
        for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
            if (breaks_[i] > breaks_[i + 1])
                throw ContractError("BreakSequence", "breaks are nondecreasing");
        validated_ = true;
        violation_.clear();
        for (std::size_t i = 0; i < breaks_.size() && validated_; ++i) {
            if (is_integer(breaks_[i]) && numerator(breaks_[i]) % p_ == 0) {
                validated_ = false;
                violation_ = "p | s_" + std::to_string(i + 1);
            }
            if (i + 1 < breaks_.size() && !(breaks_[i + 1] > breaks_[i] * p_)) {
                validated_ = false;
                violation_ = "s_" + std::to_string(i + 2) +
                             " <= p*s_" + std::to_string(i + 1);
            }
        }
    }

    long long p() const noexcept { return p_; }
    int e() const noexcept { return e_; }
    const std::vector<Rational>& breaks() const noexcept { return breaks_; }
    std::size_t size() const noexcept { return breaks_.size(); }
    bool validated() const noexcept { return validated_; }
    const std::string& violation() const noexcept { return violation_; }

private:
    long long p_;
    int e_;
    std::vector<Rational> breaks_;
    bool validated_ = false;
    std::string violation_;
};

/// s_k = -w_k(lambda_min) for k = 1/e, 2/e, ..., K; a +infinity read
/// terminates the sequence. Levels with w_k == 0 are unramified layers and
/// carry no break: a leading run of them is skipped, and a fully-zero
/// profile is the finite-monodromy signal (empty sequence) -- this is what
/// makes lambda_min == 1 extract to nothing.
inline BreakSequence break_sequence_extract(const LaurentSeries& lambda_min,
                                            const Rational& K) {
    const auto& ctx = lambda_min.context();
    auto w0 = partial_valuation_steps(lambda_min, 0);
    if (!w0 || *w0 != 0)
        throw ContractError("break_sequence_extract", "w_0(lambda_min) == 0");
    Rational ke = K * ctx->e();
    if (!is_integer(ke) || K < 0)
        throw ContractError("break_sequence_extract", "K in (1/e)Z and K >= 0");
    if (numerator(ke) > ctx->prec())
        throw ContractError("break_sequence_extract", "K*e <= prec");
    std::vector<Rational> s;
    for (int t = 1; t <= static_cast<int>(numerator(ke)); ++t) {
        auto w = partial_valuation_steps(lambda_min, t);
        if (!w) break;  // +infinity terminates the sequence
        if (*w == 0 && s.empty()) continue;
        s.emplace_back(-*w);
    }
    return BreakSequence(ctx->p(), ctx->e(), std::move(s));
}

/// s_k = -min_g w_k(lambda_g), pointwise over conjugate profiles.
inline BreakSequence min_over_conjugates(const std::vector<DecayProfile>& profiles) {
    if (profiles.empty()) throw ContractError("min_over_conjugates", "nonempty list");
    const auto& ctx = profiles.front().context();
    const std::size_t len = profiles.front().entries().size();
    for (const auto& pr : profiles) {
        require_same_context("min_over_conjugates", *ctx, *pr.context());
        if (pr.entries().size() != len)
            throw ContractError("min_over_conjugates", "profiles share one K");
    }
    std::vector<Rational> s;
    for (std::size_t i = 0; i < len; ++i) {
        if (profiles.front().entries()[i].k == 0) continue;
        std::optional<long long> m;
        for (const auto& pr : profiles) {
            const auto& w = pr.entries()[i].w;
            if (w && (!m || *w < *m)) m = *w;
        }
        if (!m) break;  // every conjugate vanishes at this depth
        s.emplace_back(-*m);
    }
    return BreakSequence(ctx->p(), ctx->e(), std::move(s));
}

/// Exact law s_n = a_i p^(m r k) + b_i on residue class i = 1..m, with
/// k = (n - i)/m + 1. Solved from the last two points of each class and
/// verified backwards; no tolerances.
struct PseudoStableFit {
    int m;
    Rational r;
    std::vector<Rational> a;
    std::vector<Rational> b;
    int k0;  ///< smallest k-index from which every class matches exactly
};

inline std::optional<PseudoStableFit> fit_pseudo_stable(const BreakSequence& s,
                                                        const Rational& r, int m) {
    if (m < 1 || !is_integer(r * m))
        throw ContractError("fit_pseudo_stable", "m >= 1 and m*r in Z");
    const long long n = static_cast<long long>(s.size());
    if (n < 3LL * m)
        throw ContractError("fit_pseudo_stable", "at least 3 full periods of data");
    const long long mr = static_cast<long long>(numerator(r * m));
    const BigInt p(s.p());

    PseudoStableFit fit;
    fit.m = m;
    fit.r = r;
    int k0 = 1;
    int kmax_min = std::numeric_limits<int>::max();
    for (int i = 1; i <= m; ++i) {
        std::vector<std::pair<int, Rational>> pts;  // (k, s_{(k-1)m+i})
        for (long long nidx = i; nidx <= n; nidx += m)
            pts.emplace_back(static_cast<int>((nidx - i) / m + 1), s.breaks()[nidx - 1]);
        const auto& [k1, s1] = pts[pts.size() - 2];
        const auto& [k2, s2] = pts[pts.size() - 1];
        Rational pk1 = rational_pow(p, mr * k1);
        Rational pk2 = rational_pow(p, mr * k2);
        Rational a = (s2 - s1) / (pk2 - pk1);
        Rational b = s2 - a * pk2;
        if (a <= 0) return std::nullopt;
        // scan backwards for the onset of exactness
        int onset = k2;
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
            if (it->second != a * rational_pow(p, mr * it->first) + b) break;
            onset = it->first;
        }
        fit.a.push_back(a);
        fit.b.push_back(b);
        k0 = std::max(k0, onset);
        kmax_min = std::min(kmax_min, k2);
    }
    // The two solved points match by construction; demand at least one
    // independent period on top of them.
    if (kmax_min - k0 + 1 < 3) return std::nullopt;
    fit.k0 = k0;
    return fit;
}

/// Evidence for s_k <= c * p^(rk) on the observed range. The ratio sequence
/// rho_k = s_k / p^(rk) over the last half decides: non-increasing, or
/// increasing with shrinking increments, is bounded evidence and yields the
/// bound; monotonically accelerating growth is unbounded evidence (none).
inline std::optional<Rational> check_log_bounded(const BreakSequence& s, const Rational& r) {
    if (s.breaks().empty()) throw ContractError("check_log_bounded", "nonempty");
    const BigInt p(s.p());
    const long long n = static_cast<long long>(s.size());

    // rho_{k+1} > rho_k, cross-multiplied exactly with r = num/den:
    // s_{k+1}^den > s_k^den * p^num.
    const BigInt num = numerator(r);
    const unsigned long den = denominator(r).convert_to<unsigned long>();
    auto ratio_increases = [&](long long k) {
        Rational l = 1, rr = 1;
        for (unsigned long i = 0; i < den; ++i) {
            l *= s.breaks()[k];
            rr *= s.breaks()[k - 1];
        }
        return l > rr * rational_pow(p, num.convert_to<long long>());
    };
    if (n >= 3) {
        const double rd = r.convert_to<double>();
        const double pd = static_cast<double>(s.p());
        auto rho = [&](long long k) {
            return s.breaks()[k - 1].convert_to<double>() / std::pow(pd, rd * k);
        };
        bool all_grow = true;
        bool accelerating = true;
        for (long long k = std::max(1LL, n / 2); k < n; ++k)
            if (!ratio_increases(k)) all_grow = false;
        for (long long k = std::max(1LL, n / 2); k + 2 <= n; ++k)
            if (rho(k + 2) - rho(k + 1) <= rho(k + 1) - rho(k)) accelerating = false;
        if (all_grow && accelerating) return std::nullopt;
    }

    // c = max_k s_k / p^{rk}; argmax by the same exact comparison, value
    // rounded up to p^floor(rk) when rk is fractional so the bound still
    // covers the whole range.
    long long best = 1;
    for (long long k = 2; k <= n; ++k) {
        Rational l = 1, rr = 1;
        for (unsigned long i = 0; i < den; ++i) {
            l *= s.breaks()[k - 1];
            rr *= s.breaks()[best - 1];
        }
        if (l * rational_pow(p, num.convert_to<long long>() * best) >=
            rr * rational_pow(p, num.convert_to<long long>() * k))
            best = k;
    }
    Rational rk = r * best;
    Rational c;
    if (is_integer(rk))
        c = s.breaks()[best - 1] / rational_pow(p, numerator(rk).convert_to<long long>());
    else
        c = s.breaks()[best - 1] /
            rational_pow(p, (numerator(rk) / denominator(rk)).convert_to<long long>());
    return c;
}

}  // namespace unitroot
