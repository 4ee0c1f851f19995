#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "unitroot/decay.hpp"
#include "unitroot/isocrystal.hpp"
#include "unitroot/monodromy.hpp"
#include "unitroot/ramification.hpp"

namespace unitroot::io {

using nlohmann::json;

inline json context_to_json(const PrimeContext& ctx) {
    return json{{"p", ctx.p()},
                {"f", ctx.f()},
                {"e", ctx.e()},
                {"prec", ctx.prec()},
                {"window", ctx.window()}};
}

inline CtxPtr context_from_json(const json& j) {
    for (const char* key : {"p", "f", "e", "prec", "window"})
        if (!j.contains(key)) throw SchemaError(std::string("context missing field '") + key + "'");
    try {
        return make_context(j.at("p").get<long long>(), j.at("f").get<int>(),
                            j.at("e").get<int>(), j.at("prec").get<int>(),
                            j.at("window").get<long long>());
    } catch (const json::exception& ex) {
        throw SchemaError(std::string("context: ") + ex.what());
    }
}

/// Series literal: {"p":3,"f":1,"e":1,"prec":6,"window":20000,
///                  "terms":[[-1,["3"]],[0,["1"]]]}
/// each term [exponent, digits], digits a length-e array of decimal strings.
inline json series_to_json(const LaurentSeries& x) {
    json j = context_to_json(*x.context());
    json terms = json::array();
    for (const auto& [e, c] : x.terms()) {
        json digits = json::array();
        for (int i = 0; i < x.context()->e(); ++i) digits.push_back(std::to_string(c.digit(i)));
        terms.push_back(json::array({e, digits}));
    }
    j["terms"] = std::move(terms);
    return j;
}

inline LaurentSeries series_terms_from_json(const json& terms, const CtxPtr& ctx) {
    if (!terms.is_array()) throw SchemaError("'terms' is an array");
    LaurentSeries x(ctx);
    for (const auto& t : terms) {
        if (!t.is_array() || t.size() != 2 || !t[1].is_array() ||
            static_cast<int>(t[1].size()) != ctx->e())
            throw SchemaError("term is [exponent, digits] with e digit strings");
        long long exp = t[0].get<long long>();
        CoeffElem c(ctx);
        CoeffElem pi = CoeffElem::pi_pow(ctx, 1);
        for (int i = ctx->e() - 1; i >= 0; --i) {
            long long v;
            try {
                v = std::stoll(t[1][i].get<std::string>());
            } catch (const std::exception&) {
                throw SchemaError("digit is a decimal integer string");
            }
            c = c * pi + CoeffElem(ctx, v);
        }
        if (!c.is_zero()) {
            if (exp < -ctx->window() || exp > ctx->window())
                throw SchemaError("term exponent outside the window");
            x.set(exp, x.coeff(exp) + c);
        }
    }
    return x;
}

inline LaurentSeries series_from_json(const json& j) {
    CtxPtr ctx = context_from_json(j);
    if (!j.contains("terms")) throw SchemaError("series missing 'terms'");
    return series_terms_from_json(j.at("terms"), ctx);
}

/// Matrix literal: {"context":{...},"diag_exponents":[...],"entries":[[...]]};
/// inner series carry either a bare "terms" array or a full series literal.
inline json matrix_to_json(const IsocrystalMatrix& A) {
    json j;
    j["context"] = context_to_json(*A.context());
    j["diag_exponents"] = A.diag_exponents();
    json rows = json::array();
    for (int i = 1; i <= A.rank(); ++i) {
        json row = json::array();
        for (int c = 1; c <= A.rank(); ++c) {
            json cell;
            cell["terms"] = series_to_json(A.at(i, c))["terms"];
            row.push_back(std::move(cell));
        }
        rows.push_back(std::move(row));
    }
    j["entries"] = std::move(rows);
    return j;
}

inline IsocrystalMatrix matrix_from_json(const json& j) {
    if (!j.contains("context")) throw SchemaError("matrix missing 'context'");
    CtxPtr ctx = context_from_json(j.at("context"));
    if (!j.contains("diag_exponents") || !j.at("diag_exponents").is_array())
        throw SchemaError("matrix missing 'diag_exponents'");
    std::vector<int> diag = j.at("diag_exponents").get<std::vector<int>>();
    if (!j.contains("entries") || !j.at("entries").is_array())
        throw SchemaError("matrix missing 'entries'");
    const auto& rows = j.at("entries");
    const int n = static_cast<int>(rows.size());
    SeriesMatrix M(ctx, n);
    for (int i = 0; i < n; ++i) {
        if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n)
            throw SchemaError("matrix entries are square");
        for (int c = 0; c < n; ++c) {
            const json& cell = rows[i][c];
            if (cell.contains("p")) {
                LaurentSeries s = series_from_json(cell);
                require_same_context("matrix_from_json", *ctx, *s.context());
                M.at(i + 1, c + 1) = series_terms_from_json(cell.at("terms"), ctx);
            } else if (cell.contains("terms")) {
                M.at(i + 1, c + 1) = series_terms_from_json(cell.at("terms"), ctx);
            } else {
                throw SchemaError("matrix cell carries 'terms'");
            }
        }
    }
    return IsocrystalMatrix(M, std::move(diag));
}

/// Tower literal: {"g0":0,"p":3,"points":[{"label":"infty","breaks":[1,4,13]}]}
inline TowerRamificationData tower_from_json(const json& j) {
    for (const char* key : {"g0", "p", "points"})
        if (!j.contains(key)) throw SchemaError(std::string("tower missing field '") + key + "'");
    TowerRamificationData data;
    data.p = j.at("p").get<long long>();
    if (j.at("g0").is_string())
        data.g0 = parse_rational(j.at("g0").get<std::string>());
    else
        data.g0 = Rational(j.at("g0").get<long long>());
    for (const auto& pt : j.at("points")) {
        if (!pt.contains("breaks")) throw SchemaError("tower point missing 'breaks'");
        std::vector<Rational> breaks;
        for (const auto& b : pt.at("breaks"))
            breaks.push_back(b.is_string() ? parse_rational(b.get<std::string>())
                                           : Rational(b.get<long long>()));
        data.points.push_back(
            {pt.value("label", std::string("point")), BreakSequence(data.p, 1, breaks)});
    }
    return data;
}

inline std::vector<Rational> rational_list_from_json(const json& arr) {
    std::vector<Rational> out;
    for (const auto& b : arr)
        out.push_back(b.is_string() ? parse_rational(b.get<std::string>())
                                    : Rational(b.get<long long>()));
    return out;
}

inline json rational_list_to_json(const std::vector<Rational>& v) {
    json arr = json::array();
    for (const auto& r : v) arr.push_back(to_string(r));
    return arr;
}

inline json fit_to_json(const PseudoStableFit& fit) {
    return json{{"m", fit.m},
                {"r", to_string(fit.r)},
                {"a", rational_list_to_json(fit.a)},
                {"b", rational_list_to_json(fit.b)},
                {"k0", fit.k0}};
}

inline json decay_class_to_json(const DecayClass& dc) {
    json j;
    switch (dc.kind) {
        case DecayClass::Kind::Overconvergent:
            j["class"] = "overconvergent";
            j["m"] = to_string(dc.m);
            j["c"] = to_string(dc.c);
            break;
        case DecayClass::Kind::LogDecay:
            j["class"] = "log-decay";
            j["r"] = to_string(dc.r);
            j["c"] = to_string(dc.c);
            break;
        case DecayClass::Kind::Inconclusive:
            j["class"] = "inconclusive";
            break;
    }
    j["range"] = json::array(
        {to_string(dc.range_used.first), to_string(dc.range_used.second)});
    return j;
}

/// CSV columns k, w_k, s_k, validated; +infinity prints as "inf". The s
/// column is the literal -w_k read; the validated flag belongs to the
/// stripped break sequence.
inline std::string breaks_to_csv(const DecayProfile& profile, const BreakSequence& s) {
    std::ostringstream os;
    os << "k,w_k,s_k,validated\n";
    const char* flag = s.validated() ? "true" : "false";
    for (const auto& en : profile.entries()) {
        if (en.k == 0) continue;
        os << to_string(en.k) << ",";
        if (en.w)
            os << *en.w << "," << -*en.w;
        else
            os << "inf,inf";
        os << "," << flag << "\n";
    }
    return os.str();
}

inline std::string genus_to_csv(const GenusTable& table) {
    std::ostringstream os;
    os << "n,g_n,integral\n";
    for (const auto& row : table)
        os << row.n << "," << to_string(row.g) << "," << (row.integral ? "true" : "false")
           << "\n";
    return os.str();
}

inline std::string profile_to_csv(const DecayProfile& profile) {
    std::ostringstream os;
    os << "k,w_k\n";
    for (const auto& en : profile.entries()) {
        os << to_string(en.k) << ",";
        if (en.w)
            os << *en.w;
        else
            os << "inf";
        os << "\n";
    }
    return os.str();
}

inline json error_to_json(const std::string& kind, const std::string& operation,
                          const std::string& contract, const std::string& message) {
    return json{{"error",
                 {{"kind", kind},
                  {"operation", operation},
                  {"contract", contract},
                  {"message", message}}}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open input file: " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& ex) {
        throw SchemaError(std::string("invalid JSON in ") + path + ": " + ex.what());
    }
}

}  // namespace unitroot::io
