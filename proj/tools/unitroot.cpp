#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "unitroot/io.hpp"
#include "unitroot/sweep.hpp"

namespace {

using namespace unitroot;
using io::json;

struct GlobalOpts {
    std::optional<int> prec;
    std::optional<long long> window;
    std::string out;
    std::string format = "json";
};

void apply_context_overrides(json& ctx_obj, const GlobalOpts& g) {
    if (g.prec) ctx_obj["prec"] = *g.prec;
    if (g.window) ctx_obj["window"] = *g.window;
    if (const char* cap_env = std::getenv("UNITROOT_MAX_WINDOW")) {
        long long cap = std::stoll(cap_env);
        if (ctx_obj.contains("window") && ctx_obj["window"].get<long long>() > cap)
            throw ContractError("cli", "window <= UNITROOT_MAX_WINDOW (" +
                                           std::to_string(cap) + ")");
    }
}

void emit(const GlobalOpts& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
        return;
    }
    std::ofstream of(g.out, std::ios::binary);
    if (!of) throw SchemaError("cannot open output file: " + g.out);
    of << text;
}

int run_breaks(const std::string& path, const GlobalOpts& g, long long K,
               const std::string& fit_r, int fit_m) {
    json j = io::load_json_file(path);
    apply_context_overrides(j, g);
    LaurentSeries lambda = io::series_from_json(j);
    MinimalTwist mt = twist_to_minimal(lambda);
    Rational Kr(K);
    BreakSequence s = break_sequence_extract(mt.lambda_min, Kr);
    DecayProfile prof = decay_profile(mt.lambda_min, Kr);
    if (g.format == "csv") {
        emit(g, io::breaks_to_csv(prof, s));
        return 0;
    }
    json out;
    out["breaks"] = io::rational_list_to_json(s.breaks());
    out["validated"] = s.validated();
    if (!s.validated()) out["violation"] = s.violation();
    json prof_rows = json::array();
    for (const auto& en : prof.entries())
        prof_rows.push_back(json::array(
            {to_string(en.k), en.w ? json(*en.w) : json("inf")}));
    out["profile"] = std::move(prof_rows);
    if (!fit_r.empty()) {
        auto fit = fit_pseudo_stable(s, parse_rational(fit_r), fit_m);
        out["fit"] = fit ? io::fit_to_json(*fit) : json(nullptr);
    }
    emit(g, out.dump(2));
    return 0;
}

int run_genus(const std::string& path, const GlobalOpts& g, int n_max, bool do_fit, int m,
              int d, const std::string& r_str) {
    json j = io::load_json_file(path);
    TowerRamificationData data = io::tower_from_json(j);
    GenusTable table = genus_sequence(data, n_max);
    if (g.format == "csv") {
        emit(g, io::genus_to_csv(table));
        return 0;
    }
    json out;
    json rows = json::array();
    for (const auto& row : table)
        rows.push_back(json{{"n", row.n}, {"g", to_string(row.g)}, {"integral", row.integral}});
    out["genus"] = std::move(rows);
    if (do_fit) {
        auto fit = fit_genus_polynomials(table, data.p, m, d, parse_rational(r_str));
        if (fit) {
            json polys = json::array();
            for (const auto& poly : fit->coeffs) polys.push_back(io::rational_list_to_json(poly));
            out["fit"] = json{{"m", fit->m},
                              {"degree", fit->degree},
                              {"onset", fit->onset},
                              {"a", std::move(polys)}};
        } else {
            out["fit"] = nullptr;
        }
    }
    emit(g, out.dump(2));
    return 0;
}

int run_decay(const std::string& path, const GlobalOpts& g, std::optional<long long> K) {
    json j = io::load_json_file(path);
    apply_context_overrides(j, g);
    LaurentSeries x = io::series_from_json(j);
    Rational Kr = K ? Rational(*K) : Rational(x.context()->prec());
    DecayProfile prof = decay_profile(x, Kr);
    if (g.format == "csv") {
        emit(g, io::profile_to_csv(prof));
        return 0;
    }
    json out;
    json rows = json::array();
    for (const auto& en : prof.entries())
        rows.push_back(json::array({to_string(en.k), en.w ? json(*en.w) : json("inf")}));
    out["profile"] = std::move(rows);
    out["class"] = io::decay_class_to_json(decay_classify(prof));
    emit(g, out.dump(2));
    return 0;
}

int run_solve(const std::string& path, const GlobalOpts& g) {
    json j = io::load_json_file(path);
    if (j.contains("context")) apply_context_overrides(j["context"], g);
    IsocrystalMatrix A = io::matrix_from_json(j);
    UnitRootSolution sol = solve_unit_root(A);
    json out;
    out["lambda"] = io::series_to_json(sol.lambda);
    json eps = json::array();
    for (const auto& e : sol.epsilon) eps.push_back(io::series_to_json(e));
    out["epsilon"] = std::move(eps);
    out["residual_level"] = sol.residual_level;
    emit(g, out.dump(2));
    return 0;
}

int run_reduce(const std::string& path, const GlobalOpts& g, int level, const std::string& d) {
    json j = io::load_json_file(path);
    if (j.contains("context")) apply_context_overrides(j["context"], g);
    IsocrystalMatrix A = io::matrix_from_json(j);
    RankOneForm form = reduce_to_rank_one_form(A, level, parse_rational(d));
    json out;
    out["matrix"] = io::matrix_to_json(form.matrix);
    out["conditions"] = json{{"i", form.report.condition(ReductionCondition::EntryDecayBound)},
                             {"ii", form.report.condition(ReductionCondition::BlockDivisibility)},
                             {"iii", form.report.condition(ReductionCondition::RowOneTailDecay)},
                             {"iv", form.report.condition(ReductionCondition::RowOneCirc)},
                             {"v", form.report.condition(ReductionCondition::SupportNonpositive)}};
    out["params"] = json{{"N0", form.report.params.N0},
                         {"r", to_string(form.report.params.r)},
                         {"c", to_string(form.report.params.c)},
                         {"d", to_string(form.report.params.d)}};
    if (!form.report.notes.empty()) out["notes"] = form.report.notes;
    out["elementary_steps"] = form.transform.steps().size();
    emit(g, out.dump(2));
    return 0;
}

int run_convert(const std::string& path, const GlobalOpts& g, const std::string& to) {
    json j = io::load_json_file(path);
    if (!j.contains("p") || !j.contains("breaks"))
        throw SchemaError("convert input carries 'p' and 'breaks'");
    long long p = j.at("p").get<long long>();
    std::vector<Rational> breaks = io::rational_list_from_json(j.at("breaks"));
    std::vector<Rational> result;
    if (to == "lower") {
        result = lower_from_upper(BreakSequence(p, 1, breaks)).values;
    } else if (to == "upper") {
        result = upper_from_lower(LowerBreaks{p, breaks}).breaks();
    } else {
        throw SchemaError("--to is 'lower' or 'upper'");
    }
    if (g.format == "csv") {
        std::ostringstream os;
        os << "n," << (to == "lower" ? "lambda_n" : "s_n") << "\n";
        for (std::size_t i = 0; i < result.size(); ++i)
            os << (i + 1) << "," << to_string(result[i]) << "\n";
        emit(g, os.str());
        return 0;
    }
    json out;
    out[to == "lower" ? "lambda" : "s"] = io::rational_list_to_json(result);
    emit(g, out.dump(2));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact unit-root subcrystal, ramification-break, and genus-growth toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--prec", g.prec, "override pi-adic precision of file contexts");
    app.add_option("--window", g.window, "override exponent window of file contexts");
    app.add_option("--out", g.out, "write output to this path instead of stdout");
    app.add_option("--format", g.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string path, d_bound = "1", fit_r, convert_to;
    long long K = 0;
    std::optional<long long> decay_K;
    int n_max = 0, level = 0, fit_m = 1, genus_m = 1, genus_d = 1;
    bool genus_fit = false;
    std::string genus_r = "1";

    auto* solve = app.add_subcommand("solve", "unit-root basis and Frobenius of a matrix");
    solve->add_option("matrix", path, "matrix JSON file")->required();

    auto* breaks = app.add_subcommand("breaks", "ramification breaks of a minimal Frobenius");
    breaks->add_option("series", path, "series JSON file")->required();
    breaks->add_option("--K", K, "number of break levels")->required();
    breaks->add_option("--fit-r", fit_r, "also fit s_{km+i} = a_i p^{mrk} + b_i at this rate");
    breaks->add_option("--fit-m", fit_m, "period for the fit");

    auto* genus = app.add_subcommand("genus", "genus table of a tower");
    genus->add_option("tower", path, "tower JSON file")->required();
    genus->add_option("--n", n_max, "deepest level")->required();
    genus->add_flag("--fit", genus_fit, "fit genus polynomials in p^k");
    genus->add_option("--fit-m", genus_m, "period for the genus fit");
    genus->add_option("--fit-d", genus_d, "Lie dimension d for the genus fit");
    genus->add_option("--fit-r", genus_r, "rate r for the genus fit");

    auto* decay = app.add_subcommand("decay", "partial-valuation profile and decay class");
    decay->add_option("series", path, "series JSON file")->required();
    decay->add_option("--K", decay_K, "profile depth (default: prec)");

    auto* reduce = app.add_subcommand("reduce", "drive a matrix into rank-one unit-root form");
    reduce->add_option("matrix", path, "matrix JSON file")->required();
    reduce->add_option("--level", level, "target divisibility level N0")->required();
    reduce->add_option("--d", d_bound, "decay bound d for row one beyond the second break");

    SweepConfig cfg;
    std::string slopes_str = "0,1";
    auto* sweep_cmd = app.add_subcommand("sweep", "randomized pipeline sweep");
    sweep_cmd->add_option("--seed", cfg.seed, "64-bit seed")->required();
    sweep_cmd->add_option("--trials", cfg.trials, "trial count")->required();
    sweep_cmd->add_option("--rank", cfg.rank, "matrix rank");
    sweep_cmd->add_option("--slopes", slopes_str, "comma-separated diagonal pi-exponents");
    sweep_cmd->add_option("--p", cfg.p, "prime");
    sweep_cmd->add_option("--sweep-prec", cfg.prec, "pi-adic precision");
    sweep_cmd->add_option("--sweep-window", cfg.window, "exponent window");

    auto* convert = app.add_subcommand("convert", "convert between upper and lower breaks");
    convert->add_option("breaks", path, "breaks JSON file")->required();
    convert->add_option("--to", convert_to, "target numbering: lower or upper")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(path, g);
        if (breaks->parsed()) return run_breaks(path, g, K, fit_r, fit_m);
        if (genus->parsed()) return run_genus(path, g, n_max, genus_fit, genus_m, genus_d, genus_r);
        if (decay->parsed()) return run_decay(path, g, decay_K);
        if (reduce->parsed()) return run_reduce(path, g, level, d_bound);
        if (convert->parsed()) return run_convert(path, g, convert_to);
        if (sweep_cmd->parsed()) {
            if (g.prec) cfg.prec = *g.prec;
            if (g.window) cfg.window = *g.window;
            if (const char* cap_env = std::getenv("UNITROOT_MAX_WINDOW")) {
                if (cfg.window > std::stoll(cap_env))
                    throw ContractError("cli", "window <= UNITROOT_MAX_WINDOW");
            }
            cfg.slopes.clear();
            std::stringstream ss(slopes_str);
            std::string tok;
            while (std::getline(ss, tok, ',')) cfg.slopes.push_back(std::stoi(tok));
            emit(g, unitroot::sweep(cfg).dump(2));
            return 0;
        }
    } catch (const unitroot::WindowOverflow& ex) {
        std::cerr << unitroot::io::error_to_json("window", ex.operation(), "", ex.what()).dump()
                  << "\n";
        return 3;
    } catch (const unitroot::SchemaError& ex) {
        std::cerr << unitroot::io::error_to_json("schema", "", "", ex.what()).dump() << "\n";
        return 4;
    } catch (const unitroot::ContractError& ex) {
        std::cerr << unitroot::io::error_to_json("contract", ex.operation(), ex.contract(),
                                                 ex.what())
                         .dump()
                  << "\n";
        return 2;
    } catch (const unitroot::Error& ex) {
        std::cerr << unitroot::io::error_to_json("contract", "", "", ex.what()).dump() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << unitroot::io::error_to_json("internal", "", "", ex.what()).dump() << "\n";
        return 5;
    }
    return 1;
}
