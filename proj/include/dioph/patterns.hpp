#pragma once

// Pattern analysis of a best-approximation sequence in R^3: which consecutive
// triples z_{v-1}, z_v, z_{v+1} are independent, the word over {A, B} built
// from successive independent triples (A: same 3-space, B: new 3-space), the
// finite-window estimate of k, and the exact Schmidt height inequality on
// each A^m B window.

#include "dioph/approx.hpp"
#include "dioph/linalg.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dioph {

// Record -> lattice point (q, a1, a2, a3). Requires a 3-coordinate record.
IntVec vec_of_record(const BestApproxRecord& r);

// All v with rank(z_{v-1}, z_v, z_{v+1}) = 3, exactly. Needs >= 3 records.
std::vector<std::size_t> independent_triple_indices(const std::vector<BestApproxRecord>& records);

struct PatternWord {
    std::string letters; // e.g. "ABAAB"
    // witnesses[i] = (v, j): letter i compares the triples at v and j (v < j);
    // the second triple of letter i is the first triple of letter i+1
    std::vector<std::pair<std::size_t, std::size_t>> witnesses;
    std::size_t burn_in = 0; // records below this index were ignored
};

// Word over consecutive independent triples, skipping the first `burn_in`
// records (the word is a tail object; early records are start-up noise).
// Throws if fewer than two independent triples survive the burn-in.
PatternWord pattern_word(const std::vector<BestApproxRecord>& records, std::size_t burn_in = 3);

struct KEstimate {
    long k_value = 0;
    std::map<std::size_t, std::size_t> evidence; // A-run length -> B's it precedes
    std::string proxy_rule; // how "infinitely many times" was proxied
};

// Largest A-run length immediately preceding a B that recurs in the window
// (at least twice, once in the final third). Throws when the word has no B,
// or when no run length recurs (window too short to estimate).
KEstimate k_estimate(const PatternWord& word);

struct SchmidtReport {
    std::size_t letter_index = 0;             // position of the B in the word
    std::size_t run_length = 0;               // m in A^m B
    std::pair<std::size_t, std::size_t> witness; // (v, j) of the B letter
    mpz_class h2_old, h2_new, h2_line;        // H^2 of old span, new span, intersection
    bool holds = false;                       // h2_old * h2_new >= h2_line
    std::size_t pair_l = 0;                   // Lambda = <z_{l-1}, z_l>_Z below
    double log_det_ratio = 0;                 // log2( det Lambda / (xi_{l-1} q_l) )
};

// For each maximal A^m B window: saturate the 3-space held through the run,
// the 3-space after the B, and their intersection plane, and verify the
// height inequality exactly on integer Gram determinants. Also logs how far
// det Lambda sits from xi_{l-1} q_l for the transition pair.
std::vector<SchmidtReport> schmidt_check(const std::vector<BestApproxRecord>& records,
                                         const PatternWord& word);

} // namespace dioph
