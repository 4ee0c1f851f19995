#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unitroot/io.hpp"

namespace unitroot {

/// Deterministic generator used by every randomized harness in this
/// project: splitmix64. The algorithm is fixed here so that reports are
/// reproducible bit-for-bit across platforms; ranges are taken by modulo.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform-ish in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

    /// Uniform-ish in [lo, hi], inclusive.
    long long range(long long lo, long long hi) {
        return lo + static_cast<long long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    std::uint64_t state_;
};

struct SweepConfig {
    std::uint64_t seed = 0;
    int trials = 0;
    int rank = 2;
    std::vector<int> slopes;  ///< diagonal pi-exponents, first must be 0
    long long p = 3;
    int prec = 7;
    long long window = 200000;
};

/// Random monomial sum at pi-level >= level, exponents in [-8, -1].
inline LaurentSeries random_poly(SplitMix64& rng, const CtxPtr& ctx, int level, int max_terms) {
    LaurentSeries x(ctx);
    int t = 1 + static_cast<int>(rng.below(max_terms));
    for (int i = 0; i < t; ++i) {
        long long exp = -rng.range(1, 8);
        int lvl = static_cast<int>(rng.range(level, std::max(level, ctx->prec() - 1)));
        long long unit = rng.range(1, ctx->p() - 1);
        x = x + LaurentSeries::monomial(ctx, exp, CoeffElem(ctx, unit).mul_pi_pow(lvl));
    }
    return x;
}

/// Random Frobenius matrix congruent to diag(pi^{r_i}) at the given level.
inline IsocrystalMatrix random_congruent_matrix(SplitMix64& rng, const CtxPtr& ctx,
                                                const std::vector<int>& slopes, int level) {
    const int n = static_cast<int>(slopes.size());
    SeriesMatrix M(ctx, n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            if (i == j) {
                M.at(i, j) = LaurentSeries::monomial(
                                 ctx, 0, CoeffElem::pi_pow(ctx, slopes[i - 1])) +
                             random_poly(rng, ctx, level, 2);
            } else {
                M.at(i, j) = random_poly(rng, ctx, level, 2);
            }
        }
    return IsocrystalMatrix(M, slopes);
}

/// Runs the solve -> minimize -> extract -> fit pipeline over seeded random
/// matrices and reports per-trial outcomes. Identical configurations produce
/// byte-identical reports.
inline io::json sweep(const SweepConfig& cfg) {
    if (cfg.slopes.empty() || cfg.slopes.front() != 0)
        throw ContractError("sweep", "slopes start at 0 (unit-root part present)");
    if (static_cast<int>(cfg.slopes.size()) != cfg.rank)
        throw ContractError("sweep", "one slope per row");

    io::json report;
    report["seed"] = std::to_string(cfg.seed);
    report["trials"] = cfg.trials;
    report["rank"] = cfg.rank;
    report["slopes"] = cfg.slopes;
    report["p"] = cfg.p;
    report["prec"] = cfg.prec;
    report["window"] = cfg.window;

    int gap = cfg.slopes.size() >= 2 ? cfg.slopes[1] - cfg.slopes[0] : 1;
    for (std::size_t i = 1; i < cfg.slopes.size(); ++i)
        if (cfg.slopes[i] > cfg.slopes[i - 1]) {
            gap = cfg.slopes[i] - cfg.slopes[i - 1];
            break;
        }
    const Rational r_pred(1, gap);  // e = f = 1 in the sweep regime
    const int fit_m = static_cast<int>(denominator(r_pred).convert_to<long long>());

    io::json records = io::json::array();
    int n_fit = 0, n_tagged = 0, n_none = 0, n_error = 0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        SplitMix64 rng(cfg.seed ^ (0x51ed2701a2b5e3d5ULL * (trial + 1)));
        io::json rec;
        rec["trial"] = trial;
        try {
            CtxPtr ctx = make_context(cfg.p, 1, 1, cfg.prec, cfg.window);
            int level = static_cast<int>(rng.range(gap + 2, gap + 4));
            rec["congruence_level"] = level;
            IsocrystalMatrix A = random_congruent_matrix(rng, ctx, cfg.slopes, level);
            NewtonData nd = newton_data(A);
            rec["np"] = {{"np1", nd.np1}, {"np2", nd.np2}, {"np3", nd.np3}};

            UnitRootSolution sol = solve_unit_root(A);
            rec["residual_level"] = sol.residual_level;
            MinimalTwist mt = twist_to_minimal(sol.lambda);
            BreakSequence s = break_sequence_extract(mt.lambda_min, Rational(cfg.prec - 1));
            io::json bl = io::json::array();
            for (const auto& b : s.breaks()) bl.push_back(to_string(b));
            rec["breaks"] = bl;

            DecayProfile prof = decay_profile(mt.lambda_min, Rational(cfg.prec - 1));
            rec["decay"] = io::decay_class_to_json(decay_classify(prof));

            if (!s.validated()) {
                rec["outcome"] = "hypotheses-not-met";
                rec["tag"] = s.violation();
                ++n_tagged;
            } else if (s.size() >= 3u * fit_m) {
                auto fit = fit_pseudo_stable(s, r_pred, fit_m);
                bool rate_matches = fit.has_value();
                rec["slope_predicted_rate"] = to_string(r_pred);
                if (fit) {
                    rec["outcome"] = "fit";
                    rec["fit"] = io::fit_to_json(*fit);
                    rec["rate_matches_slopes"] = rate_matches;
                    ++n_fit;
                } else {
                    rec["outcome"] = "fit-none";
                    ++n_none;
                }
            } else {
                rec["outcome"] = "fit-none";
                rec["tag"] = "too few breaks at this precision";
                ++n_none;
            }
        } catch (const WindowOverflow& ex) {
            rec["outcome"] = "error";
            rec["error"] = {{"kind", "window"}, {"message", ex.what()}};
            ++n_error;
        } catch (const Error& ex) {
            rec["outcome"] = "error";
            rec["error"] = {{"kind", "contract"}, {"message", ex.what()}};
            ++n_error;
        }
        records.push_back(std::move(rec));
    }
    report["records"] = std::move(records);
    report["aggregate"] = {{"fit", n_fit},
                           {"hypotheses-not-met", n_tagged},
                           {"fit-none", n_none},
                           {"error", n_error}};
    return report;
}

}  // namespace unitroot
