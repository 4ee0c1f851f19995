#pragma once

#include "unitroot/series.hpp"
#include "unitroot/sweep.hpp"

namespace testutil {

using namespace unitroot;

inline CtxPtr ctx311(int prec, long long window = 20000) {
    return make_context(3, 1, 1, prec, window);
}

/// Sparse random series: `terms` terms with exponents in [lo, hi] and
/// pi-levels in [min_level, prec-1].
inline LaurentSeries random_series(SplitMix64& rng, const CtxPtr& ctx, int terms, long long lo,
                                   long long hi, int min_level = 0) {
    LaurentSeries x(ctx);
    for (int i = 0; i < terms; ++i) {
        long long exp = rng.range(lo, hi);
        int lvl = static_cast<int>(rng.range(min_level, ctx->prec() - 1));
        long long unit = rng.range(1, ctx->p() - 1);
        x = x + LaurentSeries::monomial(ctx, exp, CoeffElem(ctx, unit).mul_pi_pow(lvl));
    }
    return x;
}

/// A random unit congruent to 1 mod pi.
inline LaurentSeries random_one_unit(SplitMix64& rng, const CtxPtr& ctx, int terms, long long lo,
                                     long long hi) {
    return LaurentSeries::one(ctx) + random_series(rng, ctx, terms, lo, hi, 1);
}

}  // namespace testutil
