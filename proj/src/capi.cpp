#include "dioph_lab.h"

#include "dioph/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

namespace {

using namespace dioph;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (p) std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

template <typename F>
dioph_status guarded(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (const PrecisionExhausted& e) {
        g_last_error = e.what();
        return DIOPH_ERR_PRECISION;
    } catch (const ExactTie& e) {
        g_last_error = e.what();
        return DIOPH_ERR_TIE;
    } catch (const GrowthBudgetError& e) {
        g_last_error = e.what();
        return DIOPH_ERR_BUDGET;
    } catch (const InitScanBudgetError& e) {
        g_last_error = e.what();
        return DIOPH_ERR_BUDGET;
    } catch (const SynthError& e) {
        g_last_error = e.what();
        return DIOPH_ERR_CONDITION;
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return DIOPH_ERR_ARGUMENT;
    } catch (const std::domain_error& e) {
        g_last_error = e.what();
        return DIOPH_ERR_ARGUMENT;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return DIOPH_ERR_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DIOPH_ERR_INTERNAL;
    }
}

// One coordinate of a target: integer, p/q, plain decimal, or sqrt:N.
struct Coord {
    bool is_sqrt = false;
    mpz_class sqrt_arg;
    mpq_class value;
    bool negative = false; // applies to the sqrt form
};

mpq_class parse_decimal(const std::string& s) {
    auto dot = s.find('.');
    if (dot == std::string::npos) return mpq_class(mpz_class(s));
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    if (digits.empty() || digits == "-" || digits == "+")
        throw std::invalid_argument("empty decimal literal");
    mpz_class num(digits);
    mpz_class den = 1;
    for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

Coord parse_coord(std::string s) {
    Coord c;
    if (s.empty()) throw std::invalid_argument("empty target coordinate");
    std::string body = s;
    if (body[0] == '-' && body.rfind("-sqrt:", 0) == 0) {
        c.negative = true;
        body = body.substr(1);
    }
    if (body.rfind("sqrt:", 0) == 0) {
        c.is_sqrt = true;
        c.sqrt_arg = mpz_class(body.substr(5));
        if (c.sqrt_arg < 0) throw std::invalid_argument("sqrt of a negative integer");
        return c;
    }
    if (s.find('/') != std::string::npos) {
        c.value = rat_parse(s);
        return c;
    }
    c.value = parse_decimal(s);
    return c;
}

Target target_of_string(const std::string& spec) {
    std::vector<Coord> coords;
    std::size_t start = 0;
    while (start <= spec.size()) {
        auto comma = spec.find(',', start);
        std::string tok =
            spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!tok.empty()) coords.push_back(parse_coord(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (coords.empty() || coords.size() > 3)
        throw std::invalid_argument("target needs 1 to 3 coordinates");
    bool any_sqrt = false;
    for (const auto& c : coords) any_sqrt |= c.is_sqrt;
    if (!any_sqrt) {
        std::vector<mpq_class> vals;
        for (const auto& c : coords) vals.push_back(c.value);
        return rational_target(vals, spec);
    }
    int n = static_cast<int>(coords.size());
    auto eval = [coords](unsigned) {
        std::vector<Real> out;
        for (const auto& c : coords) {
            if (c.is_sqrt) {
                Real v = sqrt(real_of(mpz_class(c.sqrt_arg)));
                out.push_back(c.negative ? -v : v);
            } else {
                out.push_back(real_of(c.value));
            }
        }
        return out;
    };
    return function_target(n, eval, std::max(192u, precision_bits()), spec);
}

EngineOptions engine_options() {
    EngineOptions o;
    o.start_bits = std::max(192u, precision_bits());
    o.precision_cap = std::max(4096u, o.start_bits);
    return o;
}

json selftest_json() {
    json checks = json::array();
    auto add = [&](const std::string& name, bool ok, const std::string& note = "") {
        json c;
        c["name"] = name;
        c["ok"] = ok;
        if (!note.empty()) c["note"] = note;
        checks.push_back(c);
    };

    {
        PolyCoeffs pc = poly_coeffs(1, Real(0.5));
        bool ok = abs(pc.M - 2) < 1e-12 && abs(pc.N - 4) < 1e-12 && abs(pc.P - 1) < 1e-12;
        add("quadratic coefficients at lambda 1/2", ok);
    }
    {
        Real g = root_gk(1, Real(0.5)).value;
        add("k=1 growth root at lambda 1/2",
            abs(g - Real("1.70710678118654752")) < Real("1e-9"));
    }
    {
        Real ls = lambda_star();
        add("critical lambda value", abs(ls - Real("0.424506903418841")) < Real("1e-7"),
            decimal_string(ls, 5));
    }
    {
        bool ok = true;
        std::string note;
        try {
            auto eval = [](unsigned) {
                return std::vector<Real>{(sqrt(Real(5)) - 1) / 2};
            };
            Target t = function_target(1, eval, 192, "inverse golden ratio");
            auto recs = best_approximations(t, 1000);
            mpz_class f1 = 1, f2 = 2;
            for (std::size_t i = 0; i < recs.size(); ++i) {
                if (recs[i].q != f1) ok = false;
                mpz_class nxt = f1 + f2;
                f1 = f2;
                f2 = nxt;
            }
            if (recs.size() < 10) ok = false;
        } catch (const std::exception& e) {
            ok = false;
            note = e.what();
        }
        add("engine denominators are Fibonacci on the golden ratio", ok, note);
    }
    {
        bool ok = true;
        std::string note;
        try {
            SynthConfig cfg;
            cfg.lambda = 0.5;
            cfg.k = 1;
            cfg.q1 = 2000;
            cfg.steps = 8;
            SynthResult r = synthesize(cfg);
            ok = r.condition_report.exact_all();
            if (ok) {
                VerifyOutcome v = verify_artifact(synth_artifact_json(r));
                ok = v.all_ok();
                if (!ok) note = v.detail.dump();
            }
        } catch (const std::exception& e) {
            ok = false;
            note = e.what();
        }
        add("small synthesis run verifies and round-trips", ok, note);
    }

    bool all = true;
    for (const auto& c : checks) all = all && c["ok"].get<bool>();
    json j;
    j["checks"] = checks;
    j["all_ok"] = all;
    return j;
}

} // namespace

extern "C" {

const char* dioph_version(void) { return kVersion; }

const char* dioph_last_error(void) { return g_last_error.c_str(); }

void dioph_free_string(char* s) { std::free(s); }

void dioph_set_precision(unsigned bits) {
    if (bits == 0) return;
    set_precision_bits(std::max(bits, 64u));
}

unsigned dioph_get_precision(void) { return precision_bits(); }

dioph_status dioph_roots(const double* lambdas, size_t n_lambda, const int* ks, size_t n_k,
                         const char* format, char** out_text) {
    return guarded([&]() {
        if (!lambdas || !ks || !out_text || n_lambda == 0 || n_k == 0)
            throw std::invalid_argument("roots: null or empty input");
        std::vector<double> ls(lambdas, lambdas + n_lambda);
        std::vector<int> kk(ks, ks + n_k);
        std::string fmt = format ? format : "json";
        std::string text;
        if (fmt == "csv")
            text = roots_csv(ls, kk);
        else if (fmt == "json")
            text = roots_json(ls, kk).dump(2);
        else
            throw std::invalid_argument("roots: format must be json or csv");
        *out_text = dup_string(text);
        return DIOPH_OK;
    });
}

dioph_status dioph_analyze(const char* target, const char* q_max, char** out_json) {
    return guarded([&]() {
        if (!target || !q_max || !out_json)
            throw std::invalid_argument("analyze: null input");
        Target t = target_of_string(target);
        mpz_class qm(q_max);
        auto records = walk_records(t, qm, engine_options());
        json doc = analysis_json(records, t.description);
        *out_json = dup_string(doc.dump(2));
        return DIOPH_OK;
    });
}

dioph_status dioph_synthesize(double lambda, int k, int steps, const char* q1,
                              char** out_json) {
    return guarded([&]() {
        if (!q1 || !out_json) throw std::invalid_argument("synthesize: null input");
        SynthConfig cfg;
        cfg.lambda = lambda;
        cfg.k = k;
        cfg.steps = steps;
        cfg.q1 = mpz_class(q1);
        cfg.radius_bits = std::clamp(precision_bits(), 192u, 4096u);
        SynthResult r = synthesize(cfg);
        json doc = synth_artifact_json(r);
        *out_json = dup_string(doc.dump(2));
        return r.condition_report.exact_all() ? DIOPH_OK : DIOPH_ERR_CONDITION;
    });
}

dioph_status dioph_verify(const char* artifact_json, char** out_json) {
    return guarded([&]() {
        if (!artifact_json || !out_json) throw std::invalid_argument("verify: null input");
        json artifact = json::parse(artifact_json);
        VerifyOutcome v = verify_artifact(artifact);
        *out_json = dup_string(v.detail.dump(2));
        if (v.precision_exhausted) return DIOPH_ERR_PRECISION;
        return v.all_ok() ? DIOPH_OK : DIOPH_ERR_CONDITION;
    });
}

dioph_status dioph_selftest(char** out_json) {
    return guarded([&]() {
        if (!out_json) throw std::invalid_argument("selftest: null output");
        json j = selftest_json();
        *out_json = dup_string(j.dump(2));
        return j["all_ok"].get<bool>() ? DIOPH_OK : DIOPH_ERR_CONDITION;
    });
}

struct dioph_synth {
    dioph::SynthSession session;
    explicit dioph_synth(dioph::SynthConfig cfg) : session(std::move(cfg)) {}
};

dioph_status dioph_synth_new(double lambda, int k, int steps, const char* q1,
                             dioph_synth** out) {
    return guarded([&]() {
        if (!q1 || !out) throw std::invalid_argument("synth_new: null input");
        SynthConfig cfg;
        cfg.lambda = lambda;
        cfg.k = k;
        cfg.steps = steps;
        cfg.q1 = mpz_class(q1);
        *out = new dioph_synth(std::move(cfg));
        return DIOPH_OK;
    });
}

dioph_status dioph_synth_init(dioph_synth* s) {
    return guarded([&]() {
        if (!s) throw std::invalid_argument("synth_init: null handle");
        s->session.init_triple();
        return DIOPH_OK;
    });
}

dioph_status dioph_synth_step(dioph_synth* s) {
    return guarded([&]() {
        if (!s) throw std::invalid_argument("synth_step: null handle");
        s->session.step();
        return DIOPH_OK;
    });
}

long dioph_synth_size(const dioph_synth* s) { return s ? s->session.size() : 0; }

dioph_status dioph_synth_vector(const dioph_synth* s, long index, char** out_json) {
    return guarded([&]() {
        if (!s || !out_json) throw std::invalid_argument("synth_vector: null input");
        const VecList& vs = s->session.vectors();
        if (index < 0 || static_cast<size_t>(index) >= vs.size())
            throw std::invalid_argument("synth_vector: index out of range");
        *out_json = dup_string(intvec_json(vs[index]).dump());
        return DIOPH_OK;
    });
}

dioph_status dioph_synth_report(const dioph_synth* s, char** out_json) {
    return guarded([&]() {
        if (!s || !out_json) throw std::invalid_argument("synth_report: null input");
        ConditionReport rep = s->session.verify_conditions();
        *out_json = dup_string(condition_json(rep).dump(2));
        return DIOPH_OK;
    });
}

void dioph_synth_free(dioph_synth* s) { delete s; }

} // extern "C"
