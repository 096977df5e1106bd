#pragma once

// Best-approximation engine (Euclidean norm) for targets in R^n, n in {1,2,3}.
// Targets are interval enclosures with an optional on-demand refiner, so every
// rounding and every xi comparison is either decided exactly or escalated;
// nothing is ever decided from a bare floating-point value.

#include "dioph/real.hpp"

#include <gmpxx.h>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dioph {

struct RatInterval {
    mpq_class lo, hi; // lo <= hi
};

// alpha known through a per-coordinate rational enclosure. The refiner, when
// present, replaces the enclosure with one of width <= 2^-bits per coordinate
// (still containing alpha) and returns false if it cannot go that far.
struct Target {
    int n = 3;
    std::vector<RatInterval> enclosure;
    std::function<bool(unsigned bits, std::vector<RatInterval>& enc)> refiner;
    std::string description;
};

struct BestApproxRecord {
    mpz_class q;
    std::vector<mpz_class> a;
    RatInterval xi_sq; // encloses |q alpha - a|^2
};

struct ExponentEstimate {
    double omega_est = 0;
    double omega_hat_est = 0;
    double ratio_limsup_est = 0;
    std::size_t window_begin = 0, window_end = 0; // record index range used
};

struct EngineOptions {
    unsigned start_bits = 192;
    unsigned precision_cap = 4096; // refiner escalation stops here
};

// Raised when the refiner cap is reached before a rounding or comparison is
// decided; q is the denominator that could not be disambiguated.
struct PrecisionExhausted : std::runtime_error {
    mpz_class q;
    PrecisionExhausted(std::string msg, mpz_class q_)
        : std::runtime_error(std::move(msg)), q(std::move(q_)) {}
};

// Raised on an exact tie (two lattice points with equal xi at the same q, or
// a later q matching the running minimum exactly). The sequence of best
// approximations is not well defined past such a q, so we refuse to choose.
struct ExactTie : std::runtime_error {
    mpz_class q;
    ExactTie(std::string msg, mpz_class q_)
        : std::runtime_error(std::move(msg)), q(std::move(q_)) {}
};

// Exact target (degenerate enclosure, no refiner needed).
Target rational_target(const std::vector<mpq_class>& alpha, std::string description = "");

// Target evaluated on demand at a given precision; eval(bits) must return
// coordinates accurate to a few ulps at that precision. Used for targets like
// algebraic numbers in tests and CLI input.
Target function_target(int n, std::function<std::vector<Real>(unsigned bits)> eval,
                       unsigned initial_bits, std::string description = "");

// Exact xi^2 enclosure of a candidate (q, a) under a given enclosure of alpha.
RatInterval xi_sq_interval(const std::vector<RatInterval>& enclosure, const mpz_class& q,
                           const std::vector<mpz_class>& a);

// Scan engine: every q from 1 to q_max, keeping the running minimum. Exact
// records; O(q_max) work. Terminates early on an exact rational hit (xi = 0).
std::vector<BestApproxRecord> best_approximations(const Target& target, const mpz_class& q_max,
                                                  const EngineOptions& opts = {});

// Jump engine: identical output, but moves from record to record by
// enumerating the lattice points of a bounded cylinder (LLL-reduced basis,
// exhaustive Fincke-Pohst), so huge denominator gaps cost only per-record
// work. Used to certify synthesized sequences whose q grow doubly fast.
std::vector<BestApproxRecord> walk_records(const Target& target, const mpz_class& q_max,
                                           const EngineOptions& opts = {});

// Finite-window proxies for omega, omega-hat and the ratio limsup, over the
// tail window (default: last half of the records). Requires >= 8 records.
ExponentEstimate exponent_stats(const std::vector<BestApproxRecord>& records,
                                double tail_fraction = 0.5);

} // namespace dioph
