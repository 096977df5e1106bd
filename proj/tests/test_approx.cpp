#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dioph/approx.hpp"

#include <gmpxx.h>

#include <random>
#include <vector>

using namespace dioph;

namespace {

// Exact brute-force reference: for every q, the best a is the per-coordinate
// nearest integer to q alpha. Detects ties the same way the engine must.
struct BruteResult {
    std::vector<BestApproxRecord> records;
    bool tie = false;
    mpz_class tie_q;
};

BruteResult brute_force(const std::vector<mpq_class>& alpha, long q_max) {
    BruteResult out;
    mpq_class best = -1;
    for (long q = 1; q <= q_max; ++q) {
        mpq_class xi = 0;
        std::vector<mpz_class> a(alpha.size());
        bool tie_here = false;
        for (size_t i = 0; i < alpha.size(); ++i) {
            mpq_class t = alpha[i] * q;
            // Nearest integer; a half-integer value is a coordinate tie.
            mpz_class fl;
            mpz_fdiv_q(fl.get_mpz_t(), t.get_num().get_mpz_t(), t.get_den().get_mpz_t());
            mpq_class frac = t - mpq_class(fl);
            if (frac == mpq_class(1, 2)) tie_here = true;
            a[i] = (frac > mpq_class(1, 2)) ? fl + 1 : fl;
            mpq_class d = t - mpq_class(a[i]);
            xi += d * d;
        }
        if (best >= 0 && !tie_here && xi == best && best != 0) tie_here = true;
        if (tie_here && (best < 0 || xi <= best)) {
            out.tie = true;
            out.tie_q = q;
            return out;
        }
        if (best < 0 || xi < best) {
            best = xi;
            BestApproxRecord r;
            r.q = q;
            r.a = a;
            r.xi_sq = {xi, xi};
            out.records.push_back(std::move(r));
            if (best == 0) break;
        }
    }
    return out;
}

std::vector<mpq_class> random_alpha(std::mt19937_64& rng, int n, long max_den) {
    std::uniform_int_distribution<long> dd(2, max_den);
    std::vector<mpq_class> a(n);
    for (int i = 0; i < n; ++i) {
        long den = dd(rng);
        std::uniform_int_distribution<long> dn(1, den - 1);
        a[i] = mpq_class(dn(rng), den);
        a[i].canonicalize();
    }
    return a;
}

Target golden_target(unsigned bits = 192) {
    return function_target(
        1,
        [](unsigned b) {
            Real prev = precision_bits();
            set_precision_bits(b);
            Real v = (sqrt(Real(5)) - 1) / 2;
            set_precision_bits(prev.convert_to<unsigned>());
            return std::vector<Real>{v};
        },
        bits, "golden ratio conjugate");
}

} // namespace

TEST_CASE("golden ratio gives the Fibonacci denominators with unit determinants") {
    std::vector<BestApproxRecord> rec = best_approximations(golden_target(), 1000);
    REQUIRE(rec.size() >= 10);
    // Fibonacci: 1, 2, 3, 5, 8, ...
    long fib[] = {1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987};
    for (size_t i = 0; i < rec.size() && i < 15; ++i) CHECK(rec[i].q == fib[i]);
    for (size_t i = 0; i + 1 < rec.size(); ++i) {
        mpz_class det = rec[i].q * rec[i + 1].a[0] - rec[i + 1].q * rec[i].a[0];
        CHECK((det == 1 || det == -1));
    }
    // xi^2 enclosures are tight and positive.
    for (const auto& r : rec) {
        CHECK(r.xi_sq.lo > 0);
        CHECK(r.xi_sq.hi >= r.xi_sq.lo);
    }
}

TEST_CASE("engine matches exact brute force on random rational targets") {
    std::mt19937_64 rng(777001);
    int done = 0;
    while (done < 12) {
        int n = 1 + static_cast<int>(rng() % 3);
        std::vector<mpq_class> alpha = random_alpha(rng, n, 60);
        BruteResult ref = brute_force(alpha, 400);
        Target t = rational_target(alpha);
        if (ref.tie) {
            CHECK_THROWS_AS((void)best_approximations(t, 400), ExactTie);
        } else {
            std::vector<BestApproxRecord> rec = best_approximations(t, 400);
            REQUIRE(rec.size() == ref.records.size());
            for (size_t i = 0; i < rec.size(); ++i) {
                CHECK(rec[i].q == ref.records[i].q);
                REQUIRE(rec[i].a.size() == static_cast<size_t>(n));
                for (int c = 0; c < n; ++c) CHECK(rec[i].a[c] == ref.records[i].a[c]);
                CHECK(rec[i].xi_sq.lo <= ref.records[i].xi_sq.lo);
                CHECK(rec[i].xi_sq.hi >= ref.records[i].xi_sq.hi);
            }
        }
        ++done;
    }
}

TEST_CASE("the jump engine reproduces the scan engine record for record") {
    std::mt19937_64 rng(424242);
    int done = 0;
    while (done < 6) {
        int n = 1 + static_cast<int>(rng() % 3);
        std::vector<mpq_class> alpha = random_alpha(rng, n, 40);
        Target t = rational_target(alpha);
        std::vector<BestApproxRecord> scan, walk;
        bool tie = false;
        try {
            scan = best_approximations(t, 500);
        } catch (const ExactTie&) {
            tie = true;
        }
        if (tie) {
            CHECK_THROWS_AS((void)walk_records(t, 500), ExactTie);
            ++done;
            continue;
        }
        walk = walk_records(t, 500);
        REQUIRE(walk.size() == scan.size());
        for (size_t i = 0; i < walk.size(); ++i) {
            CHECK(walk[i].q == scan[i].q);
            for (size_t c = 0; c < walk[i].a.size(); ++c)
                CHECK(walk[i].a[c] == scan[i].a[c]);
        }
        ++done;
    }
    // Also on an irrational target.
    std::vector<BestApproxRecord> s = best_approximations(golden_target(), 2000);
    std::vector<BestApproxRecord> w = walk_records(golden_target(), 2000);
    REQUIRE(s.size() == w.size());
    for (size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i].q == w[i].q);
        CHECK(s[i].a[0] == w[i].a[0]);
    }
}

TEST_CASE("integer shifts of the target shift the records exactly") {
    std::vector<mpq_class> alpha = {mpq_class(13, 37), mpq_class(5, 11), mpq_class(7, 29)};
    std::vector<mpq_class> shifted = {alpha[0] + 2, alpha[1] - 1, alpha[2]};
    auto r0 = best_approximations(rational_target(alpha), 200);
    auto r1 = best_approximations(rational_target(shifted), 200);
    REQUIRE(r0.size() == r1.size());
    for (size_t i = 0; i < r0.size(); ++i) {
        CHECK(r0[i].q == r1[i].q);
        CHECK(r1[i].a[0] == r0[i].a[0] + 2 * r0[i].q);
        CHECK(r1[i].a[1] == r0[i].a[1] - r0[i].q);
        CHECK(r1[i].a[2] == r0[i].a[2]);
    }
}

TEST_CASE("exact hits terminate, mirror ties stop rational scans") {
    // An integer target hits xi = 0 at q = 1 and the scan stops there.
    std::vector<mpq_class> ints = {mpq_class(2), mpq_class(-1), mpq_class(5)};
    auto rec = best_approximations(rational_target(ints), 100000);
    REQUIRE(rec.size() == 1);
    CHECK(rec[0].q == 1);
    CHECK(rec[0].xi_sq.lo == 0);
    CHECK(rec[0].xi_sq.hi == 0);
    CHECK(rec[0].a[0] == 2);
    CHECK(rec[0].a[2] == 5);

    // A fractional rational target can never reach its exact hit: residues of
    // q alpha and (L - q) alpha mirror each other, so the last record before
    // the lcm L is always tied by its mirror and the engine refuses there.
    std::vector<mpq_class> alpha = {mpq_class(3, 7), mpq_class(2, 7), mpq_class(6, 7)};
    bool tied = false;
    try {
        (void)best_approximations(rational_target(alpha), 100000);
    } catch (const ExactTie& e) {
        tied = true;
        CHECK(e.q > 1);
        CHECK(e.q < 7);
    }
    CHECK(tied);
}

TEST_CASE("exact ties are refused, not resolved arbitrarily") {
    // q = 1: a = 0 and a = 1 both give xi = 1/2.
    Target t = rational_target({mpq_class(1, 2)});
    CHECK_THROWS_AS((void)best_approximations(t, 10), ExactTie);
    try {
        (void)best_approximations(t, 10);
    } catch (const ExactTie& e) {
        CHECK(e.q == 1);
    }
}

TEST_CASE("undecidable enclosures raise the precision error") {
    // A fixed-width enclosure with no refiner cannot decide roundings forever.
    Target t;
    t.n = 1;
    t.enclosure = {{mpq_class(49, 100), mpq_class(51, 100)}};
    t.refiner = nullptr;
    t.description = "stuck enclosure";
    CHECK_THROWS_AS((void)best_approximations(t, 100), PrecisionExhausted);

    // A refiner that refuses to go past a coarse width behaves the same.
    // Seed the enclosure coarsely too; at 16 bits the golden section needs
    // refinement near q ~ 300 already.
    Target t2 = function_target(
        1,
        [](unsigned) {
            Real s = sqrt(Real(5));
            return std::vector<Real>{(s - 1) / 2};
        },
        16, "coarse golden section");
    t2.refiner = [base = t2.refiner](unsigned bits, std::vector<RatInterval>& enc) {
        if (bits > 24) return false;
        return base(bits, enc);
    };
    EngineOptions opts;
    opts.start_bits = 16;
    opts.precision_cap = 4096;
    CHECK_THROWS_AS((void)best_approximations(t2, 100000, opts), PrecisionExhausted);
}

TEST_CASE("exponent estimates behave on the golden ratio") {
    auto rec = best_approximations(golden_target(), 2000000);
    REQUIRE(rec.size() >= 15);
    ExponentEstimate e = exponent_stats(rec);
    // For the golden ratio omega = omega-hat = 1 and log q ratios tend to 1.
    CHECK(e.omega_est == doctest::Approx(1.0).epsilon(0.08));
    CHECK(e.omega_hat_est == doctest::Approx(1.0).epsilon(0.08));
    CHECK(e.ratio_limsup_est == doctest::Approx(1.0).epsilon(0.15));
    CHECK(e.window_begin < e.window_end);
    CHECK(e.window_end <= rec.size());

    std::vector<BestApproxRecord> few(rec.begin(), rec.begin() + 5);
    CHECK_THROWS_AS((void)exponent_stats(few), std::domain_error);
}

TEST_CASE("xi interval helper is exact on degenerate enclosures") {
    std::vector<RatInterval> enc = {{mpq_class(1, 3), mpq_class(1, 3)},
                                    {mpq_class(2, 5), mpq_class(2, 5)}};
    RatInterval xi = xi_sq_interval(enc, 7, {mpz_class(2), mpz_class(3)});
    // |7*(1/3,2/5) - (2,3)|^2 = (1/3)^2 + (1/5)^2 = 34/225.
    CHECK(xi.lo == mpq_class(34, 225));
    CHECK(xi.hi == mpq_class(34, 225));
    // Widening the enclosure widens the interval but keeps it bracketing.
    std::vector<RatInterval> wide = {{mpq_class(33, 100), mpq_class(34, 100)},
                                     {mpq_class(39, 100), mpq_class(41, 100)}};
    RatInterval wxi = xi_sq_interval(wide, 7, {mpz_class(2), mpz_class(3)});
    CHECK(wxi.lo <= mpq_class(34, 225));
    CHECK(wxi.hi >= mpq_class(34, 225));
    CHECK(wxi.lo >= 0);
}
