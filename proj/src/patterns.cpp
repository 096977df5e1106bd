#include "dioph/patterns.hpp"

#include <algorithm>

namespace dioph {

namespace {

mpz_class dot4(const std::array<mpz_class, 4>& n, const IntVec& z) {
    mpz_class s = n[0] * z.q;
    for (int i = 0; i < 3; ++i) s += n[i + 1] * z.a[i];
    return s;
}

VecList triple_at(const std::vector<BestApproxRecord>& records, std::size_t v) {
    return {vec_of_record(records[v - 1]), vec_of_record(records[v]),
            vec_of_record(records[v + 1])};
}

double log2_xi(const RatInterval& xi) {
    if (xi.hi == 0) throw std::domain_error("log2_xi: exact-zero xi has no logarithm");
    if (xi.lo > 0) return 0.25 * (log2_approx(xi.lo) + log2_approx(xi.hi));
    return 0.5 * log2_approx(xi.hi);
}

} // namespace

IntVec vec_of_record(const BestApproxRecord& r) {
    if (r.a.size() != 3) throw std::domain_error("vec_of_record: record is not 3-dimensional");
    return IntVec(r.q, r.a[0], r.a[1], r.a[2]);
}

std::vector<std::size_t> independent_triple_indices(
    const std::vector<BestApproxRecord>& records) {
    if (records.size() < 3)
        throw std::domain_error("independent_triple_indices: need at least 3 records");
    std::vector<std::size_t> out;
    for (std::size_t v = 1; v + 1 < records.size(); ++v)
        if (rank(triple_at(records, v)) == 3) out.push_back(v);
    return out;
}

PatternWord pattern_word(const std::vector<BestApproxRecord>& records, std::size_t burn_in) {
    PatternWord word;
    word.burn_in = burn_in;
    if (records.size() < 3) throw std::domain_error("pattern_word: need at least 3 records");
    std::vector<std::size_t> idx;
    for (std::size_t v = std::max<std::size_t>(burn_in + 1, 1); v + 1 < records.size(); ++v)
        if (rank(triple_at(records, v)) == 3) idx.push_back(v);
    if (idx.size() < 2)
        throw std::domain_error("pattern_word: fewer than 2 independent triples after burn-in");
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        std::size_t v = idx[i], j = idx[i + 1];
        // same 3-space iff the next triple is annihilated by the normal of
        // the current one; rank of the union is 3 or 4, nothing else
        auto n = cross4(vec_of_record(records[v - 1]), vec_of_record(records[v]),
                        vec_of_record(records[v + 1]));
        bool same = dot4(n, vec_of_record(records[j - 1])) == 0 &&
                    dot4(n, vec_of_record(records[j])) == 0 &&
                    dot4(n, vec_of_record(records[j + 1])) == 0;
        word.letters.push_back(same ? 'A' : 'B');
        word.witnesses.emplace_back(v, j);
    }
    return word;
}

KEstimate k_estimate(const PatternWord& word) {
    const std::string& w = word.letters;
    if (w.find('B') == std::string::npos)
        throw std::domain_error(
            "k_estimate: no letter B in the analysis window (window too short, or the "
            "components are dependent)");
    KEstimate est;
    est.proxy_rule =
        "A-run length counts when closed by a B; k = largest length occurring at least twice, "
        "at least once in the final third of the word";
    std::vector<std::pair<std::size_t, std::size_t>> closed; // (run length, B position)
    std::size_t run = 0;
    for (std::size_t pos = 0; pos < w.size(); ++pos) {
        if (w[pos] == 'A') {
            ++run;
        } else {
            ++est.evidence[run];
            closed.emplace_back(run, pos);
            run = 0;
        }
    }
    std::size_t final_third = (2 * w.size()) / 3;
    long best = -1;
    for (const auto& [len, count] : est.evidence) {
        if (count < 2) continue;
        bool late = false;
        for (const auto& [l, pos] : closed)
            if (l == len && pos >= final_third) {
                late = true;
                break;
            }
        if (late) best = std::max(best, static_cast<long>(len));
    }
    if (best < 0)
        throw std::domain_error("k_estimate: no A-run length recurs in the window; the window "
                                "is too short for an estimate");
    est.k_value = best;
    return est;
}

std::vector<SchmidtReport> schmidt_check(const std::vector<BestApproxRecord>& records,
                                         const PatternWord& word) {
    std::vector<SchmidtReport> out;
    std::size_t run = 0;
    for (std::size_t pos = 0; pos < word.letters.size(); ++pos) {
        if (word.letters[pos] == 'A') {
            ++run;
            continue;
        }
        SchmidtReport rep;
        rep.letter_index = pos;
        rep.run_length = run;
        run = 0;
        rep.witness = word.witnesses[pos];
        auto [v, j] = rep.witness;
        VecList told = triple_at(records, v);
        VecList tnew = triple_at(records, j);
        rep.h2_old = height_sq(saturate(told));
        rep.h2_new = height_sq(saturate(tnew));
        // the intersection plane: common kernel of the two integer normals
        auto n1 = cross4(told[0], told[1], told[2]);
        auto n2 = cross4(tnew[0], tnew[1], tnew[2]);
        std::vector<std::vector<mpz_class>> M = {{n1[0], n1[1], n1[2], n1[3]},
                                                 {n2[0], n2[1], n2[2], n2[3]}};
        auto ker = int_kernel(M);
        SublatticeBasis line;
        for (const auto& row : ker) line.vectors.push_back(IntVec(row[0], row[1], row[2], row[3]));
        line.rank = static_cast<int>(ker.size());
        line.saturated = true;
        rep.h2_line = height_sq(line);
        rep.holds = rep.h2_old * rep.h2_new >= rep.h2_line;
        rep.pair_l = j;
        mpz_class gram2 =
            gram_det_sq({vec_of_record(records[j - 1]), vec_of_record(records[j])});
        rep.log_det_ratio = 0.5 * log2_approx(gram2) -
                            (log2_xi(records[j - 1].xi_sq) + log2_approx(records[j].q));
        out.push_back(std::move(rep));
    }
    return out;
}

} // namespace dioph
