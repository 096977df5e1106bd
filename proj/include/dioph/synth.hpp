#pragma once

// Constructive synthesis of a point alpha in R^3 whose best-approximation
// vectors realize the periodic pattern A^k B with prescribed growth data
// (lambda and the root chain from exponents.hpp). The build is inductive:
// an initial primitive triple, then one new vector per step, each chosen
// inside a shrinking ball W_j around an off-center point X_j of the current
// approximation, alternating k in-space steps (pattern A) with one step that
// leaves the current 3-space (pattern B). All accept/reject decisions are
// exact rational or integer comparisons; the only rounded quantities are the
// ball radii q^{-u}, which are pinned as dyadic enclosures and escalated on
// an ambiguous verdict.

#include "dioph/approx.hpp"
#include "dioph/exponents.hpp"
#include "dioph/geometry.hpp"
#include "dioph/linalg.hpp"
#include "dioph/patterns.hpp"

#include <gmpxx.h>

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace dioph {

struct SynthConfig {
    double lambda = 0.5;   // in [0.34, 0.99]
    int k = 1;             // A-run length of the target word
    mpz_class q1 = 1000000;
    int steps = 30;        // total vectors to generate (the initial triple counts)
    long search_radius_cap = 8000000; // max tries per initial congruence scan
    unsigned precision_cap = 4096;    // radius-enclosure escalation cap, bits
    int retry_doublings = 6;          // q1 doublings before giving up
    unsigned radius_bits = 192;       // starting mantissa for q^{-u} enclosures
    double max_total_digits = 4e6;    // growth budget: decimal digits of the final q
    std::size_t numeric_check_bits = 20000; // bignum re-verification cutoff
};

struct NeighborhoodSpec {
    QPoint center;      // X_j for kind 'W', Z_j for kind 'U'
    mpq_class radius_lo, radius_hi; // enclosure of q_j^{-u_j} (over 10 for 'W')
    QPoint anchor_prev; // Z_{j-1}, the angular reference
    char kind = 'U';
};

struct StepRecord {
    long index = 0;     // 1-based index of the vector this entry describes
    int stage = 0;      // 0 = initial triple, 1 = in-space step, 2 = space-changing step
    int position = -1;  // schedule position of the growth exponent used
    long out_index = 0; // vector serving as the outside basis vector (0 = completion vector)
    std::vector<mpz_class> coeffs; // integer combination coefficients of the step
    int candidate_rank = -1; // which rounding candidate was accepted (0 = nearest)
    bool tau_flipped = false;
    unsigned radius_bits = 0;
    double log2_q = 0;
    double ratio = 0;       // log q_index / log q_{index-1}
    double gamma = 0;       // prescribed exponent for that ratio
    double zeta_log2 = 0;   // log2 of the chord zeta_{index-1} = q_{index-1}|Z_{index-1}-Z_index|
    double zeta_band = 0;   // log2( zeta_{index-1} * q_index^lambda ), should sit in a flat band
    double volume_band = 0; // log2( Delta^2 / (zeta' zeta q)^2 ) for the new triple
    bool numeric_det = false; // chain determinant re-verified with bignums
};

struct BandStat {
    double min_log2 = 0, max_log2 = 0;
    std::size_t samples = 0;
    void add(double v);
    double spread_log2() const { return samples ? max_log2 - min_log2 : 0; }
};

struct ConditionReport {
    bool primitive_ok = false;   // every consecutive triple primitive
    bool combination_ok = false; // every vector is the stored integer combination
    bool bases_ok = false;       // the running quadruple stays unimodular
    bool angle_ok = false;       // angle at each new point within (pi/4, 3pi/4)
    bool nesting_ok = false;     // U_{j+1} in W_j in U_j held at every step
    std::size_t numeric_checked = 0; // steps re-verified with bignum determinants
    std::map<std::string, BandStat> bands;
    std::vector<std::string> notes;
    bool exact_all() const {
        return primitive_ok && combination_ok && bases_ok && angle_ok && nesting_ok;
    }
};

struct SynthError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown before any work when the prescribed exponents make the requested
// number of steps unrepresentable (the final q would exceed the digit budget).
struct GrowthBudgetError : SynthError {
    double predicted_digits, budget_digits, period_factor;
    GrowthBudgetError(std::string msg, double pred, double budget, double period)
        : SynthError(std::move(msg)), predicted_digits(pred), budget_digits(budget),
          period_factor(period) {}
};

// Thrown before scanning when the initial congruence scans would need more
// tries than the cap; the fix is a smaller q1 (the scan cost grows with q1).
struct InitScanBudgetError : SynthError {
    double expected_tries;
    long cap;
    InitScanBudgetError(std::string msg, double tries, long cap_)
        : SynthError(std::move(msg)), expected_tries(tries), cap(cap_) {}
};

// A step that could not place the next vector; synthesize() retries with a
// doubled q1 on this one.
struct StepFailure : SynthError {
    long step_index;
    std::string check;
    StepFailure(std::string msg, long idx, std::string chk)
        : SynthError(std::move(msg)), step_index(idx), check(std::move(chk)) {}
};

// One synthesis run; strictly sequential. Construct, init_triple(), then
// step() until enough vectors exist. synthesize() below drives the retry
// loop and is what most callers want.
class SynthSession {
  public:
    explicit SynthSession(SynthConfig cfg);
    ~SynthSession();
    SynthSession(const SynthSession&) = delete;
    SynthSession& operator=(const SynthSession&) = delete;

    void init_triple();
    void step();
    long size() const;

    const VecList& vectors() const;
    const SynthConfig& config() const;
    const ExponentChain& chain() const;
    const std::vector<StepRecord>& step_log() const;

    // Records with xi^2 enclosures assembled from the chord lengths plus the
    // nested-ball tail bound.
    std::vector<BestApproxRecord> records() const;

    // The W ball the next step would use (center X, radius rho/10); alpha
    // lives inside it however far the synthesis is extended.
    NeighborhoodSpec current_w() const;

    // Coordinate box around the current W ball; encloses alpha.
    std::vector<RatInterval> alpha_box() const;

    // Extends the synthesis until the alpha box is narrower than 2^-bits per
    // coordinate. Returns false when a step fails or a budget is exceeded.
    bool refine_alpha(unsigned bits, std::vector<RatInterval>& enc);

    // Exact condition verdicts plus the logged-constant bands. Needs >= 5
    // vectors.
    ConditionReport verify_conditions() const;

    // Initial completion vector (the outside basis vector before any
    // space-changing step has run).
    const IntVec& completion_vector() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct SynthResult {
    VecList vectors;
    IntVec completion; // initial basis completion, the first outside vector
    std::vector<BestApproxRecord> records;
    Target alpha;
    PatternWord realized_word; // empty letters + note when too short to analyze
    std::vector<double> realized_ratios;
    ConditionReport condition_report;
    std::vector<StepRecord> log;
    SynthConfig config_used; // q1 reflects any retry doublings
    ExponentChain chain;
};

// Full run with q1-retry: init, steps, verification, word extraction, alpha
// target emission. The alpha target's refiner keeps the session alive and
// extends it on demand.
SynthResult synthesize(const SynthConfig& config);

} // namespace dioph
