#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "unitroot/decay.hpp"
#include "unitroot/frob_solve.hpp"
#include "unitroot/series.hpp"

namespace unitroot {

/// Dense square matrix of series; indices are 1-based to match the
/// surrounding arithmetic conventions.
class SeriesMatrix {
public:
    SeriesMatrix(CtxPtr ctx, int n)
        : ctx_(std::move(ctx)), n_(n), m_(n * n, LaurentSeries(ctx_)) {
        if (n < 1) throw ContractError("SeriesMatrix", "n >= 1");
    }

    static SeriesMatrix identity(const CtxPtr& ctx, int n) {
        SeriesMatrix r(ctx, n);
        for (int i = 1; i <= n; ++i) r.at(i, i) = LaurentSeries::one(ctx);
        return r;
    }

    int rank() const noexcept { return n_; }
    const CtxPtr& context() const noexcept { return ctx_; }

    LaurentSeries& at(int i, int j) { return m_[(i - 1) * n_ + (j - 1)]; }
    const LaurentSeries& at(int i, int j) const { return m_[(i - 1) * n_ + (j - 1)]; }

    friend SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b) {
        require_same_context("SeriesMatrix::mul", *a.ctx_, *b.ctx_);
        if (a.n_ != b.n_) throw ContractError("SeriesMatrix::mul", "equal ranks");
        SeriesMatrix r(a.ctx_, a.n_);
        for (int i = 1; i <= a.n_; ++i)
            for (int j = 1; j <= a.n_; ++j) {
                LaurentSeries s = LaurentSeries::zero(a.ctx_);
                for (int k = 1; k <= a.n_; ++k) s = s + a.at(i, k) * b.at(k, j);
                r.at(i, j) = s;
            }
        return r;
    }

    friend bool operator==(const SeriesMatrix& a, const SeriesMatrix& b) {
        if (a.n_ != b.n_) return false;
        for (int i = 0; i < a.n_ * a.n_; ++i)
            if (!(a.m_[i] == b.m_[i])) return false;
        return true;
    }

    SeriesMatrix map_frobenius(int iterate = 1) const {
        SeriesMatrix r(ctx_, n_);
        for (int i = 1; i <= n_; ++i)
            for (int j = 1; j <= n_; ++j) r.at(i, j) = frobenius(at(i, j), iterate);
        return r;
    }

    LaurentSeries det() const {
        if (n_ == 1) return at(1, 1);
        LaurentSeries s = LaurentSeries::zero(ctx_);
        // cofactor expansion along the first row
        for (int j = 1; j <= n_; ++j) {
            if (at(1, j).is_zero()) continue;
            SeriesMatrix minor(ctx_, n_ - 1);
            for (int r = 2; r <= n_; ++r) {
                int cc = 1;
                for (int c = 1; c <= n_; ++c) {
                    if (c == j) continue;
                    minor.at(r - 1, cc++) = at(r, c);
                }
            }
            LaurentSeries term = at(1, j) * minor.det();
            s = (j % 2 == 1) ? s + term : s - term;
        }
        return s;
    }

private:
    CtxPtr ctx_;
    int n_;
    std::vector<LaurentSeries> m_;
};

namespace detail {

inline bool has_constant_unit_form(const LaurentSeries& x) {
    if (!x.coeff(0).is_unit()) return false;
    for (const auto& [e, c] : x.terms())
        if (e != 0 && c.is_unit()) return false;
    return true;
}

}  // namespace detail

/// Gauss-Jordan over the truncated series ring. Pivots must carry their unit
/// at exponent 0; matrices arising from the reductions here always do.
inline SeriesMatrix matrix_inverse(const SeriesMatrix& B) {
    const auto& ctx = B.context();
    const int n = B.rank();
    SeriesMatrix a = B;
    SeriesMatrix inv = SeriesMatrix::identity(ctx, n);
    for (int col = 1; col <= n; ++col) {
        int piv = 0;
        for (int r = col; r <= n; ++r) {
            if (detail::has_constant_unit_form(a.at(r, col))) {
                piv = r;
                break;
            }
        }
        if (piv == 0)
            throw ContractError("matrix_inverse",
                                "B invertible at precision (pivot with constant unit term)");
        if (piv != col) {
            for (int c = 1; c <= n; ++c) {
                std::swap(a.at(piv, c), a.at(col, c));
                std::swap(inv.at(piv, c), inv.at(col, c));
            }
        }
        LaurentSeries pinv = invert(a.at(col, col));
        for (int c = 1; c <= n; ++c) {
            a.at(col, c) = pinv * a.at(col, c);
            inv.at(col, c) = pinv * inv.at(col, c);
        }
        for (int r = 1; r <= n; ++r) {
            if (r == col || a.at(r, col).is_zero()) continue;
            LaurentSeries factor = a.at(r, col);
            for (int c = 1; c <= n; ++c) {
                a.at(r, c) = a.at(r, c) - factor * a.at(col, c);
                inv.at(r, c) = inv.at(r, c) - factor * inv.at(col, c);
            }
        }
    }
    return inv;
}

/// Frobenius matrix A with declared diagonal pi-exponents r_1 <= ... <= r_n;
/// the isocrystal acts on coordinate vectors by v -> A * sigma(v).
class IsocrystalMatrix {
public:
    IsocrystalMatrix(SeriesMatrix entries, std::vector<int> diag_exponents)
        : entries_(std::move(entries)), diag_exponents_(std::move(diag_exponents)) {
        if (static_cast<int>(diag_exponents_.size()) != entries_.rank())
            throw ContractError("IsocrystalMatrix", "one diagonal exponent per row");
        for (std::size_t i = 0; i + 1 < diag_exponents_.size(); ++i)
            if (diag_exponents_[i] > diag_exponents_[i + 1])
                throw ContractError("IsocrystalMatrix", "slopes are nondecreasing");
    }

    const SeriesMatrix& entries() const noexcept { return entries_; }
    const CtxPtr& context() const noexcept { return entries_.context(); }
    int rank() const noexcept { return entries_.rank(); }
    const std::vector<int>& diag_exponents() const noexcept { return diag_exponents_; }
    int diag_exponent(int i) const { return diag_exponents_[i - 1]; }
    const LaurentSeries& at(int i, int j) const { return entries_.at(i, j); }

    Rational slope(int i) const {
        return Rational(diag_exponents_[i - 1], context()->e() * context()->f());
    }

private:
    SeriesMatrix entries_;
    std::vector<int> diag_exponents_;
};

inline bool validate_diagonal_congruence(const IsocrystalMatrix& A, int level) {
    const auto& ctx = A.context();
    if (level > ctx->prec())
        throw ContractError("validate_diagonal_congruence", "level <= prec");
    for (int i = 1; i <= A.rank(); ++i)
        for (int j = 1; j <= A.rank(); ++j) {
            LaurentSeries dev = A.at(i, j);
            if (i == j)
                dev = dev - LaurentSeries::monomial(ctx, 0,
                                                    CoeffElem::pi_pow(ctx, A.diag_exponent(i)));
            if (dev.v_pi() < level) return false;
        }
    return true;
}

/// Largest level <= prec at which the diagonal congruence holds.
inline int congruence_level(const IsocrystalMatrix& A) {
    const auto& ctx = A.context();
    int lvl = ctx->prec();
    for (int i = 1; i <= A.rank(); ++i)
        for (int j = 1; j <= A.rank(); ++j) {
            LaurentSeries dev = A.at(i, j);
            if (i == j)
                dev = dev - LaurentSeries::monomial(ctx, 0,
                                                    CoeffElem::pi_pow(ctx, A.diag_exponent(i)));
            lvl = std::min(lvl, dev.v_pi());
        }
    return lvl;
}

/// Newton data: slopes, break x-coordinates (slope-change points plus the
/// rank itself), the step s with v_q(pi^s) = 1/r, and the NP flags.
struct NewtonData {
    std::vector<Rational> slopes;
    std::vector<int> breaks;
    int s = 0;
    bool np1 = false, np2 = false, np3 = false;
};

inline NewtonData newton_data(const IsocrystalMatrix& A) {
    if (congruence_level(A) < 1)
        throw ContractError("newton_data", "diagonal congruence at level >= 1");
    NewtonData nd;
    const int n = A.rank();
    for (int i = 1; i <= n; ++i) nd.slopes.push_back(A.slope(i));
    for (int i = 1; i < n; ++i)
        if (nd.slopes[i - 1] < nd.slopes[i]) nd.breaks.push_back(i);
    nd.breaks.push_back(n);

    const int b1 = nd.breaks.front();
    nd.np1 = (b1 == 1);
    if (b1 < n) nd.s = A.diag_exponent(b1 + 1) - A.diag_exponent(b1);
    nd.np2 = (b1 < n) && (nd.slopes.front() == 0);
    if (nd.breaks.size() >= 3) {
        int b2 = nd.breaks[1];
        nd.np3 = A.diag_exponent(b2 + 1) - A.diag_exponent(b2) >= nd.s;
    } else {
        nd.np3 = true;  // no third slope block
    }
    return nd;
}

/// One factor L_{u,v}(a) = 1 + K_{u,v}(a), u != v.
struct ElementaryStep {
    int u, v;
    LaurentSeries a;
};

/// Accumulated change of basis: tracks the composite B, its exact inverse,
/// and the elementary factors that built it.
class ElementaryTransform {
public:
    ElementaryTransform(CtxPtr ctx, int n)
        : B_(SeriesMatrix::identity(ctx, n)), Binv_(SeriesMatrix::identity(ctx, n)) {}

    const SeriesMatrix& composite() const noexcept { return B_; }
    const SeriesMatrix& inverse() const noexcept { return Binv_; }
    const std::vector<ElementaryStep>& steps() const noexcept { return steps_; }
    bool is_identity() const noexcept { return steps_.empty(); }

    /// B <- L_{u,v}(a) * B, with the inverse kept in lock-step.
    void push(const ElementaryStep& st) {
        const auto& ctx = B_.context();
        const int n = B_.rank();
        SeriesMatrix L = SeriesMatrix::identity(ctx, n);
        L.at(st.u, st.v) = st.a;
        SeriesMatrix Linv = SeriesMatrix::identity(ctx, n);
        Linv.at(st.u, st.v) = -st.a;
        B_ = L * B_;
        Binv_ = Binv_ * Linv;
        steps_.push_back(st);
    }

private:
    SeriesMatrix B_;
    SeriesMatrix Binv_;
    std::vector<ElementaryStep> steps_;
};

/// B * A * sigma(B)^(-1), the change-of-basis action on Frobenius matrices.
inline IsocrystalMatrix skew_conjugate(const IsocrystalMatrix& A, const SeriesMatrix& B,
                                       const SeriesMatrix* B_inv = nullptr) {
    require_same_context("skew_conjugate", *A.context(), *B.context());
    if (B.rank() != A.rank()) throw ContractError("skew_conjugate", "equal ranks");
    SeriesMatrix inv = B_inv ? *B_inv : matrix_inverse(B);
    SeriesMatrix out = (B * A.entries()) * inv.map_frobenius();
    return IsocrystalMatrix(out, A.diag_exponents());
}

inline IsocrystalMatrix skew_conjugate(const IsocrystalMatrix& A,
                                       const ElementaryTransform& T) {
    return skew_conjugate(A, T.composite(), &T.inverse());
}

namespace detail {

inline IsocrystalMatrix apply_elementary(const IsocrystalMatrix& A, const ElementaryStep& st) {
    const auto& ctx = A.context();
    SeriesMatrix L = SeriesMatrix::identity(ctx, A.rank());
    L.at(st.u, st.v) = st.a;
    SeriesMatrix Linv = SeriesMatrix::identity(ctx, A.rank());
    Linv.at(st.u, st.v) = -st.a;
    return IsocrystalMatrix((L * A.entries()) * Linv.map_frobenius(), A.diag_exponents());
}

// Minimum pi-level in the block rows > b, cols <= b.
inline int lower_left_level(const IsocrystalMatrix& A, int b) {
    int lvl = A.context()->prec();
    for (int u = b + 1; u <= A.rank(); ++u)
        for (int v = 1; v <= b; ++v) lvl = std::min(lvl, A.at(u, v).v_pi());
    return lvl;
}

}  // namespace detail

/// Raises the divisibility of the block below-left of the given Newton break
/// to pi^N0 by elementary skew conjugations.
inline std::pair<IsocrystalMatrix, ElementaryTransform> reduce_lower_left(
    const IsocrystalMatrix& A, int break_index, int N0) {
    const auto& ctx = A.context();
    NewtonData nd = newton_data(A);
    if (break_index < 1 || break_index > static_cast<int>(nd.breaks.size()))
        throw ContractError("reduce_lower_left", "break index in range");
    const int b = nd.breaks[break_index - 1];
    if (N0 > ctx->prec()) throw ContractError("reduce_lower_left", "N0 <= prec");
    if (b < A.rank() && nd.s > 0 &&
        A.diag_exponent(b + 1) - A.diag_exponent(b) < nd.s)
        throw ContractError("reduce_lower_left", "r_{b_i+1} - r_{b_i} >= s");
    if (detail::lower_left_level(A, b) < N0 - 1)
        throw ContractError("reduce_lower_left",
                            "entries below-left of the break divisible by pi^(N0-1)");

    IsocrystalMatrix cur = A;
    ElementaryTransform xf(ctx, A.rank());
    int guard = ctx->prec() + 2;
    while (detail::lower_left_level(cur, b) < std::min(N0, ctx->prec())) {
        if (guard-- <= 0)
            throw NonConvergence("reduce_lower_left", "block divisibility did not rise");
        int before = detail::lower_left_level(cur, b);
        for (int u = b + 1; u <= cur.rank(); ++u) {
            for (int v = 1; v <= b; ++v) {
                const LaurentSeries& x = cur.at(u, v);
                if (x.v_pi() >= std::min(N0, ctx->prec())) continue;
                ElementaryStep st{u, v, -(x.div_pi_pow(cur.diag_exponent(v)))};
                xf.push(st);
                cur = detail::apply_elementary(cur, st);
            }
        }
        if (detail::lower_left_level(cur, b) <= before)
            throw NonConvergence("reduce_lower_left", "block divisibility did not rise");
    }
    return {cur, xf};
}

/// The five machine-checkable shape predicates on a reduced matrix. All
/// support and divisibility statements are read modulo pi^N0.
enum class ReductionCondition {
    EntryDecayBound = 1,  ///< every entry obeys w_k >= -c p^(rk)
    BlockDivisibility,    ///< pi^N0 divides the designated lower blocks
    RowOneTailDecay,      ///< row 1 beyond b_2 obeys the tighter bound d
    RowOneCirc,           ///< row-1 off-diagonals carry no q-divisible exponents
    SupportNonpositive    ///< designated entries supported in exponents <= 0
};

struct ReductionParams {
    int N0;
    Rational r;
    Rational c;
    Rational d;
};

namespace detail {

inline bool entry_log_bound(const LaurentSeries& x, const Rational& r, const Rational& bound) {
    const auto& ctx = x.context();
    for (int t = 1; t <= ctx->prec(); ++t) {
        auto w = partial_valuation_steps(x, t);
        if (!w || *w >= 0) continue;
        if (!log_bound_holds(Rational(-*w), bound, ctx->p(), r * Rational(t, ctx->e())))
            return false;
    }
    return true;
}

}  // namespace detail

inline bool check_condition(const IsocrystalMatrix& A, ReductionCondition which,
                            const ReductionParams& prm) {
    NewtonData nd = newton_data(A);
    const int n = A.rank();
    const long long q = A.context()->q();
    const int b2 = nd.breaks.size() >= 2 ? nd.breaks[1] : n;
    switch (which) {
        case ReductionCondition::EntryDecayBound:
            for (int i = 1; i <= n; ++i)
                for (int j = 1; j <= n; ++j)
                    if (!detail::entry_log_bound(A.at(i, j), prm.r, prm.c)) return false;
            return true;
        case ReductionCondition::BlockDivisibility:
            for (int i = 2; i <= b2; ++i)
                if (A.at(i, 1).v_pi() < prm.N0) return false;
            for (int i = b2 + 1; i <= n; ++i)
                for (int j = 2; j <= b2; ++j)
                    if (A.at(i, j).v_pi() < prm.N0) return false;
            return true;
        case ReductionCondition::RowOneTailDecay:
            for (int j = b2 + 1; j <= n; ++j)
                if (!detail::entry_log_bound(A.at(1, j), prm.r, prm.d)) return false;
            return true;
        case ReductionCondition::RowOneCirc:
            for (int j = 2; j <= n; ++j)
                for (const auto& [e, coef] : A.at(1, j).terms())
                    if (e % q == 0 && coef.v_pi() < prm.N0) return false;
            return true;
        case ReductionCondition::SupportNonpositive:
            for (int i = 2; i <= b2; ++i)
                for (int j = 2; j <= b2; ++j)
                    for (const auto& [e, coef] : A.at(i, j).terms())
                        if (e > 0 && coef.v_pi() < prm.N0) return false;
            for (int j = 1; j <= b2; ++j)
                for (const auto& [e, coef] : A.at(1, j).terms())
                    if (e > 0 && coef.v_pi() < prm.N0) return false;
            return true;
    }
    return false;
}

struct ReductionReport {
    ReductionParams params;
    bool conditions[5] = {false, false, false, false, false};
    std::string notes;

    bool condition(ReductionCondition c) const {
        return conditions[static_cast<int>(c) - 1];
    }
};

struct RankOneForm {
    IsocrystalMatrix matrix;
    ElementaryTransform transform;
    ReductionReport report;
};

namespace detail {

// Solves sigma(z) - z = rhs with support in positive exponents, chain by
// chain (m, qm, q^2 m, ...). Chains whose tail cannot close inside the
// window are skipped; the skipped part of rhs is reported back.
inline std::pair<LaurentSeries, LaurentSeries> solve_sigma_minus_one(const LaurentSeries& rhs) {
    const auto& ctx = rhs.context();
    const long long q = ctx->q();
    LaurentSeries z(ctx);
    LaurentSeries skipped(ctx);
    std::vector<long long> bases;
    for (const auto& [e, c] : rhs.terms()) {
        if (e <= 0) throw ContractError("solve_sigma_minus_one", "rhs supported in E_+");
        if (e % q != 0) bases.push_back(e);
    }
    // q-divisible exponents with no base below them start their own chain.
    for (const auto& [e, c] : rhs.terms()) {
        long long m = e;
        while (m % q == 0) m /= q;
        if (std::find(bases.begin(), bases.end(), m) == bases.end()) bases.push_back(m);
    }
    std::sort(bases.begin(), bases.end());
    for (long long m : bases) {
        std::map<long long, CoeffElem> chain;
        CoeffElem cur = -rhs.coeff(m);
        long long n = m;
        bool closed = false;
        while (true) {
            if (cur.v_pi() < ctx->prec()) chain.emplace(n, cur);
            bool more_rhs = false;
            for (const auto& [e, c] : rhs.terms())
                if (e > n && e % q == 0) {
                    long long t = e;
                    while (t % q == 0) t /= q;
                    if (t == m) more_rhs = true;
                }
            if (cur.v_pi() >= ctx->prec() && !more_rhs) {
                closed = true;
                break;
            }
            if (n > ctx->window() / q) break;  // tail cannot close in-window
            n *= q;
            cur = cur - rhs.coeff(n);
        }
        if (closed) {
            for (const auto& [e, c] : chain) z.set(e, c);
        } else {
            long long t = m;
            while (t <= ctx->window()) {
                skipped.set(t, rhs.coeff(t));
                if (t > ctx->window() / q) break;
                t *= q;
            }
        }
    }
    return {z, skipped};
}

// Positive-exponent part below pi^N0.
inline LaurentSeries positive_part(const LaurentSeries& x, int N0) {
    LaurentSeries r(x.context());
    for (const auto& [e, c] : x.terms())
        if (e > 0 && c.v_pi() < N0) r.set(e, c);
    return r;
}

// q-divisible-exponent part below pi^N0 (includes exponent 0).
inline LaurentSeries non_circ_part(const LaurentSeries& x, int N0, bool spare_constant) {
    const long long q = x.context()->q();
    LaurentSeries r(x.context());
    for (const auto& [e, c] : x.terms())
        if (e % q == 0 && !(spare_constant && e == 0) && c.v_pi() < N0) r.set(e, c);
    return r;
}

}  // namespace detail

/// Drives the Frobenius matrix of an NP-valid isocrystal into the shape the
/// unit-root solver wants: divisibility on the lower blocks, row one free of
/// q-divisible exponents, designated entries supported in exponents <= 0.
/// Conditions are evaluated modulo pi^N0 and reported honestly; a condition
/// that cannot be attained inside the window is left false with a note.
inline RankOneForm reduce_to_rank_one_form(const IsocrystalMatrix& A, int N0,
                                           const Rational& d) {
    const auto& ctx = A.context();
    NewtonData nd = newton_data(A);
    if (!nd.np1 || !nd.np2 || !nd.np3)
        throw ContractError("reduce_to_rank_one_form", "NP-1..NP-3 hold");
    const int level = congruence_level(A);
    if (level < nd.s + 2)
        throw ContractError("reduce_to_rank_one_form",
                            "diagonal congruence at level >= s+2");
    if (N0 > ctx->prec()) throw ContractError("reduce_to_rank_one_form", "N0 <= prec");
    const int n = A.rank();
    const int b2 = nd.breaks.size() >= 2 ? nd.breaks[1] : n;

    IsocrystalMatrix cur = A;
    ElementaryTransform xf(ctx, n);
    std::string notes;

    // Lower blocks first: column 1 under the unit root, then everything
    // below the second break.
    {
        auto [m1, t1] = reduce_lower_left(cur, 1, N0);
        cur = m1;
        for (const auto& st : t1.steps()) xf.push(st);
        if (b2 < n) {
            auto [m2, t2] = reduce_lower_left(cur, 2, N0);
            cur = m2;
            for (const auto& st : t2.steps()) xf.push(st);
        }
    }

    // Row-one circ sweep: pull every q-divisible exponent of A(1,v) down by
    // one sigma and absorb it; each pass gains at least s pi-levels.
    for (int pass = 0; pass <= ctx->prec() + 2; ++pass) {
        bool dirty = false;
        for (int v = 2; v <= n; ++v) {
            LaurentSeries nc = detail::non_circ_part(cur.at(1, v), N0, false);
            if (nc.is_zero()) continue;
            dirty = true;
            LaurentSeries f = circ_split(nc).descended;
            ElementaryStep st{1, v, f};
            xf.push(st);
            cur = detail::apply_elementary(cur, st);
        }
        if (!dirty) break;
        if (pass == ctx->prec() + 2) {
            notes += "row-one circ sweep hit its pass budget; ";
            break;
        }
    }

    // Positive-exponent cleanup on the designated block, via
    // sigma(z) - z = -rhs chain solves. Unclosable chains are reported.
    for (int pass = 0; pass <= ctx->prec() + 2; ++pass) {
        bool progressed = false;
        bool dirty = false;
        for (int u = 1; u <= b2; ++u) {
            for (int v = 1; v <= b2; ++v) {
                if (u != v && (u == 1 || v == 1)) continue;  // handled elsewhere
                LaurentSeries pos = detail::positive_part(cur.at(u, v), N0);
                if (pos.is_zero()) continue;
                dirty = true;
                auto [z, skipped] =
                    detail::solve_sigma_minus_one(-(pos.div_pi_pow(cur.diag_exponent(u))));
                if (z.is_zero()) continue;
                ElementaryStep st{u, v, -z};
                xf.push(st);
                cur = detail::apply_elementary(cur, st);
                progressed = true;
            }
        }
        if (!dirty) break;
        if (!progressed) {
            notes += "positive support in the diagonal block cannot close within the window; ";
            break;
        }
    }
    // Positive-exponent junk in row one left of b2 has no convergent
    // elementary remedy when sigma fixes constants; reported via the
    // condition check below.

    ReductionParams prm;
    prm.N0 = N0;
    prm.r = nd.s > 0 ? Rational(ctx->e() * ctx->f(), nd.s) : Rational(1);
    // working c: the smallest observed bound on the input entries
    Rational c = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            for (int t = 1; t <= ctx->prec(); ++t) {
                auto w = partial_valuation_steps(A.at(i, j), t);
                if (!w || *w >= 0) continue;
                Rational rk = prm.r * Rational(t, ctx->e());
                if (is_integer(rk))
                    c = std::max(c, Rational(Rational(-*w) / rational_pow(BigInt(ctx->p()),
                                                             static_cast<long long>(
                                                                 numerator(rk)))));
            }
    prm.c = c;
    prm.d = d;

    RankOneForm out{cur, xf, ReductionReport{prm, {}, notes}};
    for (int i = 1; i <= 5; ++i)
        out.report.conditions[i - 1] =
            check_condition(cur, static_cast<ReductionCondition>(i), prm);
    return out;
}

/// Basis of the unit-root subspace: epsilon_1 = 1 and lambda with
/// lambda * eps_i = sum_j A(i,j) sigma(eps_j) to the reported level.
struct UnitRootSolution {
    std::vector<LaurentSeries> epsilon;  ///< index 0 is epsilon_1 = 1
    LaurentSeries lambda;
    int residual_level;
};

inline UnitRootSolution solve_unit_root(const IsocrystalMatrix& A) {
    const auto& ctx = A.context();
    NewtonData nd = newton_data(A);
    if (!nd.np1)
        throw ContractError("solve_unit_root", "NP-1 holds (unit-root part has rank one)");
    const int level = congruence_level(A);
    if (level < nd.s + 2)
        throw ContractError("solve_unit_root",
                            "diagonal congruence at level >= s+2 (contraction)");
    const int n = A.rank();

    LaurentSeries inv11 = invert(A.at(1, 1));
    std::vector<std::vector<LaurentSeries>> b(n + 1, std::vector<LaurentSeries>());
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) b[i].push_back(A.at(i, j) * inv11);
    auto bij = [&](int i, int j) -> const LaurentSeries& { return b[i][j - 1]; };

    std::vector<LaurentSeries> eps(n + 1, LaurentSeries::zero(ctx));
    eps[1] = LaurentSeries::one(ctx);
    bool stable = false;
    for (int iter = 0; iter <= ctx->prec() + 2; ++iter) {
        std::vector<LaurentSeries> sig(n + 1, LaurentSeries::zero(ctx));
        for (int j = 2; j <= n; ++j) sig[j] = frobenius(eps[j]);
        LaurentSeries mixer = LaurentSeries::zero(ctx);  // sum_j b_{1,j} sigma(eps_j)
        for (int j = 2; j <= n; ++j) mixer = mixer + bij(1, j) * sig[j];
        std::vector<LaurentSeries> next(n + 1, LaurentSeries::zero(ctx));
        next[1] = eps[1];
        bool same = true;
        for (int i = 2; i <= n; ++i) {
            LaurentSeries v = bij(i, 1);
            for (int j = 2; j <= n; ++j) v = v + bij(i, j) * sig[j];
            v = v - mixer * eps[i];
            if (!(v == eps[i])) same = false;
            next[i] = v;
        }
        eps = std::move(next);
        if (same) {
            stable = true;
            break;
        }
    }
    if (!stable)
        throw NonConvergence("solve_unit_root",
                             "fixed point did not stabilize (congruence level too low)");

    std::vector<LaurentSeries> sig(n + 1, LaurentSeries::zero(ctx));
    for (int j = 2; j <= n; ++j) sig[j] = frobenius(eps[j]);
    LaurentSeries lambda = A.at(1, 1);
    for (int j = 2; j <= n; ++j) lambda = lambda + A.at(1, j) * sig[j];
    auto w0 = partial_valuation_steps(lambda, 0);
    if (!w0 || *w0 != 0)
        throw ContractError("solve_unit_root", "lambda is a unit with w_0(lambda) = 0");

    int res_level = ctx->prec();
    for (int i = 1; i <= n; ++i) {
        LaurentSeries rhs = A.at(i, 1);
        for (int j = 2; j <= n; ++j) rhs = rhs + A.at(i, j) * sig[j];
        res_level = std::min(res_level, (lambda * eps[i] - rhs).v_pi());
    }
    return UnitRootSolution{std::vector<LaurentSeries>(eps.begin() + 1, eps.end()), lambda,
                            res_level};
}

/// k-th exterior power: matrix of k x k minors on the basis of k-subsets,
/// ordered by (sum of diagonal exponents, lex) so the declared exponents
/// remain nondecreasing.
inline IsocrystalMatrix exterior_power(const IsocrystalMatrix& A, int k) {
    const int n = A.rank();
    if (k < 1 || k > n) throw ContractError("exterior_power", "1 <= k <= n");
    std::vector<std::vector<int>> subsets;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 1);
    while (true) {
        subsets.push_back(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - (k - 1 - i)) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    std::stable_sort(subsets.begin(), subsets.end(),
                     [&](const std::vector<int>& x, const std::vector<int>& y) {
                         int sx = 0, sy = 0;
                         for (int i : x) sx += A.diag_exponent(i);
                         for (int i : y) sy += A.diag_exponent(i);
                         return sx < sy;
                     });

    const int N = static_cast<int>(subsets.size());
    SeriesMatrix M(A.context(), N);
    for (int I = 0; I < N; ++I)
        for (int J = 0; J < N; ++J) {
            SeriesMatrix sub(A.context(), k);
            for (int r = 0; r < k; ++r)
                for (int c = 0; c < k; ++c) sub.at(r + 1, c + 1) = A.at(subsets[I][r], subsets[J][c]);
            M.at(I + 1, J + 1) = sub.det();
        }
    std::vector<int> diag;
    for (const auto& S : subsets) {
        int s = 0;
        for (int i : S) s += A.diag_exponent(i);
        diag.push_back(s);
    }
    return IsocrystalMatrix(M, diag);
}

/// Multiplies every entry by pi^j (exact division for j < 0); slopes shift
/// by j/(ef).
inline IsocrystalMatrix twist(const IsocrystalMatrix& A, int j) {
    SeriesMatrix M(A.context(), A.rank());
    for (int r = 1; r <= A.rank(); ++r)
        for (int c = 1; c <= A.rank(); ++c)
            M.at(r, c) = j >= 0 ? A.at(r, c).mul_pi_pow(j) : A.at(r, c).div_pi_pow(-j);
    std::vector<int> diag = A.diag_exponents();
    for (int& r : diag) r += j;
    return IsocrystalMatrix(M, diag);
}

/// Frobenius of det(M_i): unit root of the twisted-down b_i-th exterior
/// power, shifted back by the minimal exponent sum.
inline LaurentSeries det_step_frobenius(const IsocrystalMatrix& A, int step_index) {
    NewtonData nd = newton_data(A);
    if (step_index < 1 || step_index > static_cast<int>(nd.breaks.size()))
        throw ContractError("det_step_frobenius", "step index in range");
    const int b = nd.breaks[step_index - 1];
    IsocrystalMatrix W = exterior_power(A, b);
    const int j0 = W.diag_exponents().front();
    IsocrystalMatrix tw = twist(W, -j0);
    NewtonData nd2 = newton_data(tw);
    if (!nd2.np1)
        throw ContractError("det_step_frobenius",
                            "NP-1 holds on the twisted exterior power");
    return solve_unit_root(tw).lambda.mul_pi_pow(j0);
}

}  // namespace unitroot
