#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "unitroot/series.hpp"

namespace unitroot {

/// Profile entry: (k, w_k); nullopt is the +infinity sentinel.
struct ProfileEntry {
    Rational k;
    std::optional<long long> w;
};

class DecayProfile {
public:
    DecayProfile(CtxPtr ctx, std::vector<ProfileEntry> entries)
        : ctx_(std::move(ctx)), entries_(std::move(entries)) {
        std::optional<long long> prev;
        for (const auto& en : entries_) {
            if (!en.w) continue;  // +infinity reads are independent
            if (prev && *en.w > *prev)
                throw ContractError("DecayProfile", "w_k is nonincreasing in k");
            prev = en.w;
        }
    }

    const CtxPtr& context() const noexcept { return ctx_; }
    const std::vector<ProfileEntry>& entries() const noexcept { return entries_; }

    std::size_t finite_count() const {
        std::size_t n = 0;
        for (const auto& en : entries_)
            if (en.w) ++n;
        return n;
    }

private:
    CtxPtr ctx_;
    std::vector<ProfileEntry> entries_;
};

inline DecayProfile decay_profile(const LaurentSeries& x, const Rational& K) {
    const auto& ctx = x.context();
    Rational ke = K * ctx->e();
    if (!is_integer(ke) || K < 0)
        throw ContractError("decay_profile", "K in (1/e)Z and K >= 0");
    if (numerator(ke) > ctx->prec())
        throw ContractError("decay_profile", "K*e <= prec");
    int steps = static_cast<int>(numerator(ke));
    std::vector<ProfileEntry> entries;
    entries.reserve(steps + 1);
    for (int t = 0; t <= steps; ++t)
        entries.push_back({Rational(t, ctx->e()), partial_valuation_steps(x, t)});
    return DecayProfile(x.context(), entries);
}

struct DecayClass {
    enum class Kind { Overconvergent, LogDecay, Inconclusive };
    Kind kind = Kind::Inconclusive;
    Rational m;  ///< Overconvergent: w_k >= -(m*k + c) for every profiled k
    Rational r;  ///< LogDecay: w_k >= -c * p^(r*k) for every profiled k
    Rational c;
    double residual = 0.0;           ///< worst slack of the asserted bound
    std::pair<Rational, Rational> range_used;  ///< k-range the fit was read from
};

namespace detail {

// Exact check  d <= c * p^(r*k)  when r*k is integral, long double otherwise.
inline bool log_bound_holds(const Rational& d, const Rational& c, long long p,
                            const Rational& rk) {
    if (is_integer(rk))
        return d <= c * rational_pow(BigInt(p), static_cast<long long>(numerator(rk)));
    long double expo = static_cast<long double>(numerator(rk).convert_to<double>()) /
                       static_cast<long double>(denominator(rk).convert_to<double>());
    long double rhs = static_cast<long double>(c.convert_to<double>()) *
                      powl(static_cast<long double>(p), expo);
    return static_cast<long double>(d.convert_to<double>()) <= rhs * (1.0L + 1e-12L);
}

}  // namespace detail

/// Classifies a profile as overconvergent (linear lower bound), r-log-decay
/// (exponential lower bound), or inconclusive. The returned bound is verified
/// against every profiled entry before it is asserted.
inline DecayClass decay_classify(const DecayProfile& profile) {
    const auto& ctx = profile.context();
    const long long p = ctx->p();
    const int e = ctx->e();

    std::vector<std::pair<Rational, Rational>> fin;  // (k, depth = -w)
    for (const auto& en : profile.entries())
        if (en.w) fin.emplace_back(en.k, Rational(-*en.w));
    if (fin.size() < 4)
        throw ContractError("decay_classify", "profile has >= 4 finite entries");

    const std::size_t n = fin.size();
    const std::size_t half = n / 2;
    DecayClass out;
    out.range_used = {fin[half].first, fin[n - 1].first};

    // Ratio tests over consecutive pairs in the last half, where depths are
    // positive.
    bool overconvergent = true;
    std::vector<double> rates;
    for (std::size_t i = half; i + 1 < n; ++i) {
        const Rational& d0 = fin[i].second;
        const Rational& d1 = fin[i + 1].second;
        if (d0 <= 0 || d1 <= 0) continue;
        const Rational& k = fin[i].first;
        // rho <= 1 + 2/k  <=>  d1 * k <= d0 * (k + 2)
        if (k > 0 && d1 * k > d0 * (k + 2)) overconvergent = false;
        double rho = d1.convert_to<double>() / d0.convert_to<double>();
        Rational dk = fin[i + 1].first - fin[i].first;
        rates.push_back(std::log(rho) / std::log(static_cast<double>(p)) /
                        dk.convert_to<double>());
    }

    if (overconvergent || rates.empty()) {
        Rational m = 0;
        for (std::size_t i = half; i + 1 < n; ++i) {
            Rational dk = fin[i + 1].first - fin[i].first;
            Rational slope = (fin[i + 1].second - fin[i].second) / dk;
            m = std::max(m, slope);
        }
        Rational c = fin[0].second;
        for (const auto& [k, d] : fin) c = std::max(c, Rational(d - m * k));
        out.kind = DecayClass::Kind::Overconvergent;
        out.m = m;
        out.c = c;
        double worst = 0.0;
        for (const auto& [k, d] : fin)
            worst = std::max(worst, Rational(d - m * k - c).convert_to<double>());
        out.residual = worst;
        return out;
    }

    // r = median rate, rounded to the nearest 1/(2e).
    std::sort(rates.begin(), rates.end());
    double med = rates.size() % 2 == 1
                     ? rates[rates.size() / 2]
                     : 0.5 * (rates[rates.size() / 2 - 1] + rates[rates.size() / 2]);
    long long rn = std::llround(med * 2 * e);
    if (rn <= 0) return out;  // Inconclusive
    Rational r(rn, 2 * e);

    // c: exact when every r*k is integral, else rounded up from long double.
    bool exact = true;
    for (const auto& [k, d] : fin)
        if (!is_integer(r * k)) exact = false;
    Rational c;
    if (exact) {
        c = 0;
        for (const auto& [k, d] : fin) {
            if (d <= 0) continue;
            Rational rk = r * k;
            c = std::max(c, Rational(d / rational_pow(BigInt(p), static_cast<long long>(numerator(rk)))));
        }
    } else {
        long double cm = 0.0L;
        for (const auto& [k, d] : fin) {
            if (d <= 0) continue;
            long double expo = static_cast<long double>((r * k).convert_to<double>());
            cm = std::max(cm, static_cast<long double>(d.convert_to<double>()) /
                                  powl(static_cast<long double>(p), expo));
        }
        c = Rational(static_cast<long long>(ceill(cm * (1 << 20))) + 1, 1 << 20);
    }
    for (const auto& [k, d] : fin)
        if (!detail::log_bound_holds(d, c, p, r * k)) return out;  // Inconclusive

    out.kind = DecayClass::Kind::LogDecay;
    out.r = r;
    out.c = c;
    return out;
}

}  // namespace unitroot
