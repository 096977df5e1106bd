#include "dioph/report.hpp"

#include "dioph/real.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace dioph {

namespace {

using nlohmann::json;

std::string dec(const mpz_class& z) { return z.get_str(); }

json vec_dec(const std::vector<mpz_class>& v) {
    json a = json::array();
    for (const auto& z : v) a.push_back(dec(z));
    return a;
}

json chain_values(const std::vector<Real>& v, unsigned digits) {
    json a = json::array();
    for (const auto& x : v) a.push_back(decimal_string(x, digits));
    return a;
}

int pos_of(int k, std::size_t i) { return schedule_position(k, static_cast<long>(i) + 1); }

} // namespace

json manifest_json(const RunManifest& m) {
    json j;
    j["tool"] = m.tool;
    j["version"] = m.version;
    j["subcommand"] = m.subcommand;
    j["precision_bits"] = m.precision_bits;
    j["params"] = m.params;
    return j;
}

std::string rat_str(const mpq_class& q) {
    mpq_class c = q;
    c.canonicalize();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

mpq_class rat_parse(const std::string& s) {
    auto slash = s.find('/');
    mpq_class q;
    if (slash == std::string::npos) {
        q = mpq_class(mpz_class(s));
    } else {
        mpz_class num(s.substr(0, slash)), den(s.substr(slash + 1));
        if (den <= 0) throw std::invalid_argument("rational with nonpositive denominator");
        q = mpq_class(num, den);
    }
    q.canonicalize();
    return q;
}

std::pair<std::string, std::string> xi_decimal(const RatInterval& xi_sq) {
    if (xi_sq.hi == 0) return {"0", "0"};
    Real xl = sqrt(real_of(xi_sq.lo < 0 ? mpq_class(0) : xi_sq.lo));
    Real xh = sqrt(real_of(xi_sq.hi));
    Real mid = (xl + xh) / 2, err = (xh - xl) / 2;
    return {decimal_string(mid, 17), decimal_string(err, 3)};
}

json record_json(const BestApproxRecord& r) {
    json j;
    j["q"] = dec(r.q);
    j["a"] = vec_dec(r.a);
    auto [xi, err] = xi_decimal(r.xi_sq);
    j["xi"] = xi;
    j["xi_err"] = err;
    j["xi_sq"] = json::array({rat_str(r.xi_sq.lo), rat_str(r.xi_sq.hi)});
    return j;
}

json records_json(const std::vector<BestApproxRecord>& rs) {
    json a = json::array();
    for (const auto& r : rs) a.push_back(record_json(r));
    return a;
}

BestApproxRecord record_parse(const json& j) {
    BestApproxRecord r;
    r.q = mpz_class(j.at("q").get<std::string>());
    for (const auto& s : j.at("a")) r.a.emplace_back(s.get<std::string>());
    r.xi_sq.lo = rat_parse(j.at("xi_sq").at(0).get<std::string>());
    r.xi_sq.hi = rat_parse(j.at("xi_sq").at(1).get<std::string>());
    return r;
}

json estimate_json(const ExponentEstimate& e) {
    json j;
    j["omega_est"] = e.omega_est;
    j["omega_hat_est"] = e.omega_hat_est;
    j["ratio_limsup_est"] = e.ratio_limsup_est;
    j["window_begin"] = e.window_begin;
    j["window_end"] = e.window_end;
    return j;
}

json word_json(const PatternWord& w) {
    json j;
    j["letters"] = w.letters;
    j["burn_in"] = w.burn_in;
    json ws = json::array();
    for (const auto& [v, k] : w.witnesses) ws.push_back(json::array({v, k}));
    j["witnesses"] = ws;
    return j;
}

json k_estimate_json(const KEstimate& k) {
    json j;
    j["k"] = k.k_value;
    json ev;
    for (const auto& [run, count] : k.evidence) ev[std::to_string(run)] = count;
    j["evidence"] = ev;
    j["proxy_rule"] = k.proxy_rule;
    return j;
}

json schmidt_json(const std::vector<SchmidtReport>& reps) {
    json a = json::array();
    for (const auto& r : reps) {
        json j;
        j["letter_index"] = r.letter_index;
        j["run_length"] = r.run_length;
        j["witness"] = json::array({r.witness.first, r.witness.second});
        j["h2_old"] = dec(r.h2_old);
        j["h2_new"] = dec(r.h2_new);
        j["h2_line"] = dec(r.h2_line);
        j["holds"] = r.holds;
        j["pair_l"] = r.pair_l;
        j["log_det_ratio"] = r.log_det_ratio;
        a.push_back(j);
    }
    return a;
}

json chain_json(int k, double lambda, const ExponentChain& ch) {
    json j;
    j["k"] = k;
    j["lambda"] = lambda;
    j["g_k"] = decimal_string(ch.g_k, 30);
    j["g_kj"] = chain_values(ch.g_kj, 30);
    j["u_seq"] = chain_values(ch.u_seq, 30);
    return j;
}

json condition_json(const ConditionReport& rep) {
    json j;
    j["primitive_ok"] = rep.primitive_ok;
    j["combination_ok"] = rep.combination_ok;
    j["bases_ok"] = rep.bases_ok;
    j["angle_ok"] = rep.angle_ok;
    j["nesting_ok"] = rep.nesting_ok;
    j["exact_all"] = rep.exact_all();
    j["numeric_checked"] = rep.numeric_checked;
    json bands;
    for (const auto& [name, b] : rep.bands) {
        bands[name] = {{"min_log2", b.min_log2},
                       {"max_log2", b.max_log2},
                       {"spread_log2", b.spread_log2()},
                       {"samples", b.samples}};
    }
    j["bands"] = bands;
    j["notes"] = rep.notes;
    return j;
}

json step_json(const StepRecord& s) {
    json j;
    j["index"] = s.index;
    j["stage"] = s.stage;
    j["position"] = s.position;
    j["out_index"] = s.out_index;
    json co = json::array();
    for (const auto& c : s.coeffs) co.push_back(dec(c));
    j["coeffs"] = co;
    j["candidate_rank"] = s.candidate_rank;
    j["tau_flipped"] = s.tau_flipped;
    j["radius_bits"] = s.radius_bits;
    j["log2_q"] = s.log2_q;
    j["ratio"] = s.ratio;
    j["gamma"] = s.gamma;
    j["zeta_log2"] = s.zeta_log2;
    j["zeta_band"] = s.zeta_band;
    j["volume_band"] = s.volume_band;
    j["numeric_det"] = s.numeric_det;
    return j;
}

json intvec_json(const IntVec& v) {
    json j;
    j["q"] = dec(v.q);
    j["a"] = json::array({dec(v.a[0]), dec(v.a[1]), dec(v.a[2])});
    return j;
}

IntVec intvec_parse(const json& j) {
    IntVec v;
    v.q = mpz_class(j.at("q").get<std::string>());
    for (int i = 0; i < 3; ++i) v.a[i] = mpz_class(j.at("a").at(i).get<std::string>());
    return v;
}

json analysis_json(const std::vector<BestApproxRecord>& records,
                   const std::string& target_description) {
    json j;
    j["target"] = target_description;
    j["count"] = records.size();
    j["records"] = records_json(records);
    try {
        PatternWord w = pattern_word(records);
        j["word"] = word_json(w);
        try {
            j["k_estimate"] = k_estimate_json(k_estimate(w));
        } catch (const std::exception& e) {
            j["k_estimate_error"] = e.what();
        }
        try {
            j["schmidt"] = schmidt_json(schmidt_check(records, w));
        } catch (const std::exception& e) {
            j["schmidt_error"] = e.what();
        }
    } catch (const std::exception& e) {
        j["word_error"] = e.what();
    }
    try {
        j["exponents"] = estimate_json(exponent_stats(records));
    } catch (const std::exception& e) {
        j["exponents_error"] = e.what();
    }
    return j;
}

json synth_artifact_json(const SynthResult& r) {
    json j;
    json cfg;
    cfg["lambda"] = r.config_used.lambda;
    cfg["k"] = r.config_used.k;
    cfg["q1"] = dec(r.config_used.q1);
    cfg["steps"] = r.config_used.steps;
    cfg["search_radius_cap"] = r.config_used.search_radius_cap;
    cfg["precision_cap"] = r.config_used.precision_cap;
    cfg["retry_doublings"] = r.config_used.retry_doublings;
    cfg["radius_bits"] = r.config_used.radius_bits;
    cfg["max_total_digits"] = r.config_used.max_total_digits;
    cfg["numeric_check_bits"] = r.config_used.numeric_check_bits;
    j["config"] = cfg;
    j["chain"] = chain_json(r.config_used.k, r.config_used.lambda, r.chain);
    j["completion_vector"] = intvec_json(r.completion);
    json vs = json::array();
    for (const auto& v : r.vectors) vs.push_back(intvec_json(v));
    j["vectors"] = vs;
    json steps = json::array();
    for (const auto& s : r.log) steps.push_back(step_json(s));
    j["steps"] = steps;
    json alpha;
    alpha["description"] = r.alpha.description;
    json enc = json::array();
    for (const auto& iv : r.alpha.enclosure)
        enc.push_back(json::array({rat_str(iv.lo), rat_str(iv.hi)}));
    alpha["enclosure"] = enc;
    j["alpha"] = alpha;
    j["records"] = records_json(r.records);
    j["word"] = word_json(r.realized_word);
    j["realized_ratios"] = r.realized_ratios;
    j["condition_report"] = condition_json(r.condition_report);
    try {
        j["schmidt"] = schmidt_json(schmidt_check(r.records, r.realized_word));
    } catch (const std::exception& e) {
        j["schmidt_error"] = e.what();
    }
    return j;
}

json roots_json(const std::vector<double>& lambdas, const std::vector<int>& ks) {
    json rows = json::array();
    for (double l : lambdas) {
        Real lr(l);
        check_lambda(lr);
        Real G3 = G_of(3, lr);
        Real gb = gbar(lr);
        for (int k : ks) {
            ExponentChain ch = exponent_chain(k, lr);
            json row;
            row["lambda"] = l;
            row["k"] = k;
            row["g_k"] = decimal_string(ch.g_k, 12);
            row["G_lambda"] = decimal_string(G3, 12);
            row["gbar"] = decimal_string(gb, 12);
            json sub = json::array();
            for (const auto& g : ch.g_kj) sub.push_back(decimal_string(g, 12));
            row["g_kj"] = sub;
            row["u_seq"] = chain_values(ch.u_seq, 12);
            row["u_period"] = k + 1;
            rows.push_back(row);
        }
    }
    json j;
    j["rows"] = rows;
    return j;
}

std::string roots_csv(const std::vector<double>& lambdas, const std::vector<int>& ks) {
    json doc = roots_json(lambdas, ks);
    int kmax = 0;
    for (int k : ks) kmax = std::max(kmax, k);
    std::ostringstream os;
    os << "lambda,k,g_k,G_lambda,gbar";
    for (int i = 0; i < kmax; ++i) os << ",g_k" << i;
    os << ",u_period\n";
    for (const auto& row : doc["rows"]) {
        os << row["lambda"].get<double>() << "," << row["k"].get<int>() << ","
           << row["g_k"].get<std::string>() << "," << row["G_lambda"].get<std::string>() << ","
           << row["gbar"].get<std::string>();
        const json& sub = row["g_kj"];
        for (int i = 0; i < kmax; ++i)
            os << "," << (i < static_cast<int>(sub.size()) ? sub[i].get<std::string>() : "");
        os << "," << row["u_period"].get<int>() << "\n";
    }
    return os.str();
}

VerifyOutcome verify_artifact(const json& artifact) {
    VerifyOutcome out;
    json& detail = out.detail;
    detail["mismatches"] = json::array();
    auto complain = [&](const std::string& what) { detail["mismatches"].push_back(what); };

    const json& cfg = artifact.at("config");
    const double lambda = cfg.at("lambda").get<double>();
    const int k = cfg.at("k").get<int>();
    const std::size_t check_bits = cfg.value("numeric_check_bits", std::size_t(20000));
    const unsigned radius_bits = cfg.value("radius_bits", 192u);

    VecList vecs;
    for (const auto& v : artifact.at("vectors")) vecs.push_back(intvec_parse(v));
    const std::size_t n = vecs.size();
    if (n < 4) throw std::invalid_argument("artifact holds fewer than 4 vectors");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (vecs[i].q >= vecs[i + 1].q) complain("denominators not strictly increasing");

    IntVec w = intvec_parse(artifact.at("completion_vector"));
    {
        IntVec fresh = complete_to_basis(vecs[0], vecs[1], vecs[2]);
        if (!(fresh == w)) complain("completion vector is not the canonical completion");
    }

    // Replay the stored assembly: combinations, outside-vector bookkeeping,
    // determinant chain.
    bool comb = true, dets = true;
    mpz_class d0 = det4(w, vecs[0], vecs[1], vecs[2]);
    if (d0 != 1 && d0 != -1) {
        dets = false;
        complain("seed quadruple is not unimodular");
    }
    int sign = (d0 < 0) ? -1 : 1;
    long cur_out = 0;
    auto out_vec = [&](long idx) -> const IntVec& { return idx == 0 ? w : vecs[idx - 1]; };
    std::size_t expect_index = 4;
    std::size_t dets_checked = 1;
    for (const auto& sj : artifact.at("steps")) {
        int stage = sj.at("stage").get<int>();
        if (stage == 0) continue;
        std::size_t index = sj.at("index").get<std::size_t>();
        if (index != expect_index) {
            comb = false;
            complain("step list skips vector " + std::to_string(expect_index));
            break;
        }
        ++expect_index;
        const std::size_t zi = index - 1; // storage index of the built vector
        if (zi >= n) {
            comb = false;
            break;
        }
        std::vector<mpz_class> co;
        for (const auto& c : sj.at("coeffs")) co.emplace_back(c.get<std::string>());
        IntVec z;
        if (stage == 1 && co.size() == 2) {
            for (int r = 0; r < 4; ++r)
                z.coord(r) = vecs[zi - 3].coord(r) + co[0] * vecs[zi - 2].coord(r) +
                             co[1] * vecs[zi - 1].coord(r);
        } else if (stage == 2 && co.size() == 3) {
            const IntVec& o = out_vec(sj.at("out_index").get<long>());
            for (int r = 0; r < 4; ++r)
                z.coord(r) = o.coord(r) + co[0] * vecs[zi - 3].coord(r) +
                             co[1] * vecs[zi - 2].coord(r) + co[2] * vecs[zi - 1].coord(r);
        } else {
            comb = false;
            complain("step " + std::to_string(index) + " has a malformed shape");
            continue;
        }
        if (!(z == vecs[zi])) {
            comb = false;
            complain("vector " + std::to_string(index) + " is not its stored combination");
        }
        if (sj.at("out_index").get<long>() != cur_out) {
            dets = false;
            complain("outside-vector log diverges at vector " + std::to_string(index));
        }
        if (stage == 2) {
            cur_out = static_cast<long>(zi) - 2;
            sign = -sign;
        }
        if (mpz_sizeinbase(vecs[zi].q.get_mpz_t(), 2) <= check_bits) {
            mpz_class d = det4(out_vec(cur_out), vecs[zi - 2], vecs[zi - 1], vecs[zi]);
            if (d != sign) {
                dets = false;
                complain("determinant chain breaks at vector " + std::to_string(index));
            }
            ++dets_checked;
        }
    }
    if (expect_index != n + 1) {
        comb = false;
        complain("step list does not cover every vector");
    }
    out.combinations_ok = comb;
    out.dets_ok = dets;
    detail["dets_checked"] = dets_checked;

    bool ang = true;
    for (std::size_t v = 2; v < n; ++v) {
        QPoint Pv = point_of(vecs[v]);
        if (!angle_in_quarter_three_quarters(diff_num(point_of(vecs[v - 2]), Pv),
                                             diff_num(point_of(vecs[v - 1]), Pv))) {
            ang = false;
            complain("angle window fails at vector " + std::to_string(v + 1));
        }
    }
    out.angles_ok = ang;

    // Nesting of the neighborhood chain, re-derived from (lambda, k) alone.
    bool nest = true;
    {
        unsigned saved = precision_bits();
        set_precision_bits(std::max(saved, radius_bits + 96));
        ExponentChain ch = exponent_chain(k, Real(lambda));
        Real lr(lambda);
        std::vector<Real> u(k + 1);
        for (int i = 0; i <= k; ++i) {
            Real d = (i < k) ? ch.g_kj[k - 1 - i] : ch.g_k;
            u[i] = 1 + lr * d;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (mpz_sizeinbase(vecs[i + 1].q.get_mpz_t(), 2) > check_bits) continue;
            mpq_class ri = rat_pow_neg(vecs[i].q, u[pos_of(k, i)], radius_bits);
            mpq_class rj = rat_pow_neg(vecs[i + 1].q, u[pos_of(k, i + 1)], radius_bits);
            mpq_class slack = mpq_class(1, mpz_class(1) << (radius_bits >= 16 ? radius_bits - 8 : 8));
            mpq_class ri_lo = ri * (1 - slack), rj_hi = rj * (1 + slack);
            if (!ball_in_ball(point_of(vecs[i + 1]), rj_hi, point_of(vecs[i]), ri_lo)) {
                nest = false;
                complain("neighborhood nesting fails at vector " + std::to_string(i + 2));
            }
        }
        set_precision_bits(saved);
    }
    out.nesting_ok = nest;

    std::vector<BestApproxRecord> records;
    for (const auto& r : artifact.at("records")) records.push_back(record_parse(r));

    PatternWord word;
    bool have_word = false;
    try {
        word = pattern_word(records, artifact.at("word").at("burn_in").get<std::size_t>());
        have_word = true;
        out.word_ok = word.letters == artifact.at("word").at("letters").get<std::string>();
        if (!out.word_ok) complain("stored pattern word differs from a fresh extraction");
    } catch (const std::exception& e) {
        complain(std::string("pattern word extraction failed: ") + e.what());
    }

    if (have_word) {
        try {
            auto reps = schmidt_check(records, word);
            out.schmidt_ok = !reps.empty();
            for (const auto& r : reps)
                if (!r.holds) {
                    out.schmidt_ok = false;
                    complain("height inequality fails at letter " +
                             std::to_string(r.letter_index));
                }
            detail["schmidt_windows"] = reps.size();
        } catch (const std::exception& e) {
            complain(std::string("height check failed: ") + e.what());
        }
    }

    // Engine round trip against the stored enclosure: the first few stored
    // vectors must be exactly the best approximations from q1 on. The stored
    // enclosure has no refiner behind it, so leave two vectors of headroom;
    // the box only resolves records comfortably below the final scale.
    if (n >= 5 && artifact.contains("alpha")) {
        std::size_t take = std::min<std::size_t>(10, n - 2);
        Target t;
        t.n = 3;
        t.description = "stored artifact alpha";
        for (const auto& iv : artifact.at("alpha").at("enclosure"))
            t.enclosure.push_back(
                {rat_parse(iv.at(0).get<std::string>()), rat_parse(iv.at(1).get<std::string>())});
        out.round_trip_ran = true;
        try {
            auto walked = walk_records(t, vecs[take - 1].q);
            std::vector<IntVec> got;
            for (const auto& r : walked) {
                if (r.q < vecs[0].q) continue; // pre-construction approximations
                got.push_back(vec_of_record(r));
            }
            out.round_trip_ok = got.size() == take;
            if (!out.round_trip_ok)
                complain("engine returned " + std::to_string(got.size()) + " vectors, expected " +
                         std::to_string(take));
            for (std::size_t i = 0; i < got.size() && i < take; ++i)
                if (!(got[i] == vecs[i])) {
                    out.round_trip_ok = false;
                    complain("engine disagrees at vector " + std::to_string(i + 1));
                }
            detail["round_trip_vectors"] = take;
        } catch (const PrecisionExhausted& e) {
            out.precision_exhausted = true;
            complain(std::string("round trip ran out of precision: ") + e.what());
        }
    }

    detail["combinations_ok"] = out.combinations_ok;
    detail["dets_ok"] = out.dets_ok;
    detail["angles_ok"] = out.angles_ok;
    detail["nesting_ok"] = out.nesting_ok;
    detail["word_ok"] = out.word_ok;
    detail["schmidt_ok"] = out.schmidt_ok;
    detail["round_trip_ran"] = out.round_trip_ran;
    detail["round_trip_ok"] = out.round_trip_ok;
    detail["all_ok"] = out.all_ok();
    return out;
}

} // namespace dioph
