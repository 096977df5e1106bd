#include "dioph/approx.hpp"

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <map>
#include <optional>

namespace dioph {

namespace {

enum class Round { ok, ambiguous, tie };

// nearest integer to the interval [t, u] (one coordinate of q*alpha); ok only
// when the whole interval rounds to the same integer
Round nearest_int(const mpq_class& t, const mpq_class& u, mpz_class& m) {
    mpq_class shifted = t + mpq_class(1, 2);
    mpz_fdiv_q(m.get_mpz_t(), shifted.get_num().get_mpz_t(), shifted.get_den().get_mpz_t());
    if (u - m < mpq_class(1, 2) && t - m > mpq_class(-1, 2)) return Round::ok;
    if (t == u) return Round::tie; // exactly on a half-integer
    return Round::ambiguous;
}

void square_interval(const mpq_class& lo, const mpq_class& hi, mpq_class& out_lo,
                     mpq_class& out_hi) {
    mpq_class l2 = lo * lo, h2 = hi * hi;
    if (lo <= 0 && hi >= 0) {
        out_lo = 0;
        out_hi = l2 > h2 ? l2 : h2;
    } else {
        out_lo = l2 < h2 ? l2 : h2;
        out_hi = l2 > h2 ? l2 : h2;
    }
}

void validate_target(const Target& t) {
    if (t.n < 1 || t.n > 3) throw std::domain_error("target dimension must be 1..3");
    if (t.enclosure.size() != static_cast<size_t>(t.n))
        throw std::domain_error("target enclosure size mismatch");
    for (const auto& iv : t.enclosure)
        if (iv.lo > iv.hi) throw std::domain_error("target enclosure interval inverted");
}

// shared escalation state for one engine invocation
struct Enclosure {
    std::vector<RatInterval> enc;
    unsigned bits;
    unsigned cap;
    const Target* target;

    Enclosure(const Target& t, const EngineOptions& o)
        : enc(t.enclosure), bits(o.start_bits), cap(o.precision_cap), target(&t) {}

    mpq_class width() const {
        mpq_class w = 0;
        for (const auto& iv : enc)
            if (iv.hi - iv.lo > w) w = iv.hi - iv.lo;
        return w;
    }

    void refine(const mpz_class& q_at) {
        if (!target->refiner || bits >= cap)
            throw PrecisionExhausted("enclosure refinement exhausted at q=" + q_at.get_str(),
                                     q_at);
        bits = std::min(bits * 2, cap);
        if (!target->refiner(bits, enc))
            throw PrecisionExhausted("target refiner failed at q=" + q_at.get_str() + ", bits=" +
                                         std::to_string(bits),
                                     q_at);
    }

    // refine until every interval is narrower than 2^-need
    void refine_to(unsigned need, const mpz_class& q_at) {
        if (need > cap)
            throw PrecisionExhausted("needed precision " + std::to_string(need) +
                                         " bits exceeds cap at q=" + q_at.get_str(),
                                     q_at);
        mpq_class goal(mpz_class(1), mpz_class(1) << need);
        while (width() > goal) refine(q_at);
    }
};

// rounds q*alpha to the nearest integer vector under the current enclosure,
// escalating as needed; tie_out marks an exact half-integer hit
std::vector<mpz_class> round_at(Enclosure& E, const mpz_class& q, bool& tie_out) {
    int n = E.target->n;
    std::vector<mpz_class> a(n);
    while (true) {
        tie_out = false;
        bool redo = false;
        for (int i = 0; i < n && !redo; ++i) {
            mpq_class t = E.enc[i].lo * q, u = E.enc[i].hi * q;
            switch (nearest_int(t, u, a[i])) {
                case Round::ok: break;
                case Round::tie: tie_out = true; break;
                case Round::ambiguous:
                    E.refine(q);
                    redo = true;
                    break;
            }
        }
        if (!redo) return a;
    }
}

} // namespace

RatInterval xi_sq_interval(const std::vector<RatInterval>& enclosure, const mpz_class& q,
                           const std::vector<mpz_class>& a) {
    mpq_class lo = 0, hi = 0, sl, sh;
    for (size_t i = 0; i < enclosure.size(); ++i) {
        mpq_class dl = enclosure[i].lo * q - a[i];
        mpq_class dh = enclosure[i].hi * q - a[i];
        square_interval(dl, dh, sl, sh);
        lo += sl;
        hi += sh;
    }
    return {lo, hi};
}

Target rational_target(const std::vector<mpq_class>& alpha, std::string description) {
    Target t;
    t.n = static_cast<int>(alpha.size());
    for (const auto& x : alpha) t.enclosure.push_back({x, x});
    t.description = std::move(description);
    return t;
}

Target function_target(int n, std::function<std::vector<Real>(unsigned bits)> eval,
                       unsigned initial_bits, std::string description) {
    auto build = [eval, n](unsigned bits, std::vector<RatInterval>& enc) {
        unsigned old = precision_bits();
        set_precision_bits(bits + 64);
        std::vector<Real> vals = eval(bits + 64);
        set_precision_bits(old);
        if (vals.size() != static_cast<size_t>(n)) return false;
        mpq_class slack(mpz_class(1), mpz_class(1) << (bits + 8));
        enc.clear();
        for (const auto& v : vals) {
            mpq_class c = dyadic_of(v, bits + 32);
            enc.push_back({c - slack, c + slack});
        }
        return true;
    };
    Target t;
    t.n = n;
    t.description = std::move(description);
    if (!build(initial_bits, t.enclosure))
        throw std::domain_error("function_target: evaluator returned wrong dimension");
    t.refiner = [build](unsigned bits, std::vector<RatInterval>& enc) { return build(bits, enc); };
    return t;
}

std::vector<BestApproxRecord> best_approximations(const Target& target, const mpz_class& q_max,
                                                  const EngineOptions& opts) {
    validate_target(target);
    if (q_max < 1) throw std::domain_error("q_max must be >= 1");
    Enclosure E(target, opts);
    std::vector<BestApproxRecord> records;
    mpq_class ml, mh; // running-minimum enclosure
    size_t min_idx = 0;

    for (mpz_class q = 1; q <= q_max; ++q) {
        bool tie = false;
        std::vector<mpz_class> a = round_at(E, q, tie);
        RatInterval xi = xi_sq_interval(E.enc, q, a);
        if (records.empty()) {
            if (tie) throw ExactTie("rounding tie at q=1", mpz_class(1));
            records.push_back({q, a, xi});
            ml = xi.lo;
            mh = xi.hi;
            min_idx = 0;
            if (xi.hi == 0) break;
            continue;
        }
        bool is_record = false;
        while (true) {
            if (xi.hi < ml) {
                is_record = true;
                break;
            }
            if (xi.lo > mh) break;
            if (xi.lo == xi.hi && ml == mh) // both exact and overlapping => equal
                throw ExactTie("xi ties the running minimum exactly at q=" + q.get_str(), q);
            E.refine(q);
            xi = xi_sq_interval(E.enc, q, a);
            const auto& best = records[min_idx];
            RatInterval m2 = xi_sq_interval(E.enc, best.q, best.a);
            ml = m2.lo;
            mh = m2.hi;
        }
        if (!is_record) continue;
        if (tie)
            throw ExactTie("two nearest vectors at record q=" + q.get_str(), q);
        records[min_idx].xi_sq = {ml, mh};
        records.push_back({q, a, xi});
        min_idx = records.size() - 1;
        ml = xi.lo;
        mh = xi.hi;
        if (xi.hi == 0) break; // exact rational hit; xi cannot decrease further
    }
    return records;
}

ExponentEstimate exponent_stats(const std::vector<BestApproxRecord>& records,
                                double tail_fraction) {
    if (records.size() < 8) throw std::domain_error("exponent_stats: need at least 8 records");
    if (!(tail_fraction > 0 && tail_fraction <= 1))
        throw std::domain_error("exponent_stats: tail_fraction must be in (0,1]");
    size_t n = records.size();
    size_t begin = static_cast<size_t>(n * (1.0 - tail_fraction));
    if (begin > n - 2) begin = n - 2;

    ExponentEstimate est;
    est.window_begin = begin;
    est.window_end = n;
    bool any = false;
    double omega = 0, omega_hat = 0, ratio = 1;
    bool first_hat = true;
    for (size_t v = begin; v + 1 < n; ++v) {
        const auto& r = records[v];
        const auto& r1 = records[v + 1];
        if (r.xi_sq.hi == 0) continue; // exact hit: exponents are not defined past it
        double lq = log2_approx(r.q);
        double lq1 = log2_approx(r1.q);
        double lxi;
        if (r.xi_sq.lo > 0)
            lxi = 0.25 * (log2_approx(r.xi_sq.lo) + log2_approx(r.xi_sq.hi));
        else
            lxi = 0.5 * log2_approx(r.xi_sq.hi);
        if (lq > 0) {
            omega = std::max(omega, -lxi / lq);
            ratio = std::max(ratio, lq1 / lq);
            any = true;
        }
        double hat = -lxi / lq1;
        if (first_hat || hat < omega_hat) {
            omega_hat = hat;
            first_hat = false;
        }
    }
    if (!any || first_hat)
        throw std::domain_error("exponent_stats: window has no usable ratio pairs");
    est.omega_est = omega;
    est.omega_hat_est = omega_hat;
    est.ratio_limsup_est = ratio;
    return est;
}

// ---------------------------------------------------------------------------
// jump engine: LLL + exhaustive Fincke-Pohst over a bounded cylinder
// ---------------------------------------------------------------------------

namespace {

using ZMat = std::vector<std::vector<mpz_class>>; // column-major: ZMat[j] = column j

mpz_class round_q(const mpq_class& x) {
    mpq_class s = x + mpq_class(1, 2);
    mpz_class m;
    mpz_fdiv_q(m.get_mpz_t(), s.get_num().get_mpz_t(), s.get_den().get_mpz_t());
    return m;
}

mpq_class dotz(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b) {
    mpz_class s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return mpq_class(s);
}

// textbook LLL (delta = 3/4) on integer columns, tracking the unimodular
// transform: B_out = B_in * U. Dimensions here are tiny (<= 4).
void lll_reduce(ZMat& B, ZMat& U) {
    size_t d = B.size();
    U.assign(d, std::vector<mpz_class>(d, 0));
    for (size_t i = 0; i < d; ++i) U[i][i] = 1;

    std::vector<std::vector<mpq_class>> mu(d, std::vector<mpq_class>(d));
    std::vector<mpq_class> Bn(d); // |b*_i|^2
    auto gso = [&]() {
        std::vector<std::vector<mpq_class>> bstar(d, std::vector<mpq_class>(B[0].size()));
        for (size_t i = 0; i < d; ++i) {
            for (size_t r = 0; r < B[i].size(); ++r) bstar[i][r] = mpq_class(B[i][r]);
            for (size_t j = 0; j < i; ++j) {
                mpq_class num = 0;
                for (size_t r = 0; r < B[i].size(); ++r) num += mpq_class(B[i][r]) * bstar[j][r];
                mu[i][j] = Bn[j] == 0 ? mpq_class(0) : mpq_class(num / Bn[j]);
                for (size_t r = 0; r < B[i].size(); ++r) bstar[i][r] -= mu[i][j] * bstar[j][r];
            }
            Bn[i] = 0;
            for (size_t r = 0; r < B[i].size(); ++r) Bn[i] += bstar[i][r] * bstar[i][r];
        }
    };
    gso();
    size_t k = 1;
    int guard = 0;
    while (k < d) {
        if (++guard > 100000) throw std::logic_error("lll_reduce: did not terminate");
        for (size_t j = k; j-- > 0;) {
            mpz_class r = round_q(mu[k][j]);
            if (r != 0) {
                for (size_t t = 0; t < B[k].size(); ++t) B[k][t] -= r * B[j][t];
                for (size_t t = 0; t < d; ++t) U[k][t] -= r * U[j][t];
                gso();
            }
        }
        mpq_class lhs = Bn[k];
        mpq_class rhs = (mpq_class(3, 4) - mu[k][k - 1] * mu[k][k - 1]) * Bn[k - 1];
        if (lhs >= rhs) {
            ++k;
        } else {
            std::swap(B[k], B[k - 1]);
            std::swap(U[k], U[k - 1]);
            gso();
            k = k > 1 ? k - 1 : 1;
        }
    }
}

// all integer coefficient vectors x (excluding 0) with |B x|^2 <= C, exactly.
// Bounds per level are estimated in high-precision floats with +-1 slack and
// every candidate is accepted by an exact rational test, so the enumeration
// is exhaustive.
std::vector<std::vector<mpz_class>> enumerate_short(const ZMat& B, const mpz_class& C) {
    size_t d = B.size();
    // Gram and exact Cholesky-style decomposition: |Bx|^2 =
    // sum_i q[i][i] (x_i + sum_{j>i} q[i][j] x_j)^2
    std::vector<std::vector<mpq_class>> A(d, std::vector<mpq_class>(d));
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j) A[i][j] = dotz(B[i], B[j]); // note: A[col][col]
    std::vector<std::vector<mpq_class>> Q(d, std::vector<mpq_class>(d, mpq_class(0)));
    for (size_t i = 0; i < d; ++i) {
        Q[i][i] = A[i][i];
        if (Q[i][i] == 0) throw std::logic_error("enumerate_short: degenerate basis");
        for (size_t j = i + 1; j < d; ++j) Q[i][j] = A[i][j] / Q[i][i];
        for (size_t k = i + 1; k < d; ++k)
            for (size_t l = k; l < d; ++l) A[k][l] -= Q[i][i] * Q[i][k] * Q[i][l];
        for (size_t k = i + 1; k < d; ++k)
            for (size_t l = 0; l < k; ++l) A[k][l] = A[l][k];
    }

    std::vector<std::vector<mpz_class>> out;
    std::vector<mpz_class> x(d, 0);
    // depth-first from the last coordinate; rem = remaining budget (exact)
    std::function<void(size_t, const mpq_class&)> rec = [&](size_t i, const mpq_class& rem) {
        size_t idx = i - 1;
        // center c = sum_{j>idx} Q[idx][j] x_j
        mpq_class c = 0;
        for (size_t j = idx + 1; j < d; ++j) c += Q[idx][j] * x[j];
        // |x_idx + c| <= sqrt(rem / q_ii): float estimate widened by 1 each way
        Real bound = sqrt(real_of(rem) / real_of(Q[idx][idx]));
        Real lo_r = -real_of(c) - bound - 1;
        Real hi_r = -real_of(c) + bound + 1;
        mpz_class lo, hi;
        mpfr_get_z(lo.get_mpz_t(), lo_r.backend().data(), MPFR_RNDD);
        mpfr_get_z(hi.get_mpz_t(), hi_r.backend().data(), MPFR_RNDU);
        for (mpz_class v = lo; v <= hi; ++v) {
            mpq_class term = mpq_class(v) + c;
            term = Q[idx][idx] * term * term;
            if (term > rem) continue; // exact rejection
            x[idx] = v;
            if (idx == 0) {
                bool all_zero = true;
                for (const auto& xv : x)
                    if (xv != 0) {
                        all_zero = false;
                        break;
                    }
                if (!all_zero) out.push_back(x);
            } else {
                rec(idx, rem - term);
            }
        }
        x[idx] = 0;
    };
    rec(d, mpq_class(C));
    return out;
}

} // namespace

std::vector<BestApproxRecord> walk_records(const Target& target, const mpz_class& q_max,
                                           const EngineOptions& opts) {
    validate_target(target);
    if (q_max < 1) throw std::domain_error("q_max must be >= 1");
    int n = target.n;
    size_t d = static_cast<size_t>(n) + 1;
    Enclosure E(target, opts);
    std::vector<BestApproxRecord> records;

    // the q = 1 record is the nearest integer vector
    {
        bool tie = false;
        std::vector<mpz_class> a = round_at(E, mpz_class(1), tie);
        if (tie) throw ExactTie("rounding tie at q=1", mpz_class(1));
        records.push_back({mpz_class(1), a, xi_sq_interval(E.enc, mpz_class(1), a)});
    }

    while (records.back().xi_sq.hi != 0) {
        const BestApproxRecord cur = records.back();
        mpq_class ml = cur.xi_sq.lo, mh = cur.xi_sq.hi;
        std::optional<BestApproxRecord> next;

        mpz_class T = cur.q * 2;
        while (true) {
            // scale factors: map (q, a) -> (r0 q, p_i q - t a_i), sized so the
            // whole search cylinder fits in a ball of radius ~ K
            size_t Tbits = mpz_sizeinbase(T.get_mpz_t(), 2);
            mpz_class K = mpz_class(1) << (Tbits + 96);
            Real s_up = sqrt(real_of(mh));
            mpz_class t;
            {
                Real tr = real_of(K) / s_up;
                mpfr_get_z(t.get_mpz_t(), tr.backend().data(), MPFR_RNDD);
                if (t < 1) t = 1;
            }
            // enclosure must be tight enough that t*T*width stays tiny vs K
            double need_d = log2_approx(t) + log2_approx(T) - log2_approx(K) + 32;
            unsigned need = need_d < 32 ? 32u : static_cast<unsigned>(need_d) + 1;
            E.refine_to(need, cur.q);

            ZMat B(d, std::vector<mpz_class>(d, 0));
            mpz_class r0;
            mpz_cdiv_q(r0.get_mpz_t(), K.get_mpz_t(), T.get_mpz_t());
            B[0][0] = r0;
            for (int i = 0; i < n; ++i) {
                mpq_class c = (E.enc[i].lo + E.enc[i].hi) / 2;
                B[0][i + 1] = round_q(mpq_class(t) * c);
                B[i + 1][i + 1] = -t;
            }
            ZMat U;
            lll_reduce(B, U);
            mpz_class C = 8 * K * K;
            auto coords = enumerate_short(B, C);

            // distinct q values in (q_cur, T]; the nearest vector is re-derived
            // by exact rounding, so duplicate a's per q are harmless
            std::vector<mpz_class> qs;
            for (const auto& xv : coords) {
                mpz_class q = 0;
                for (size_t j = 0; j < d; ++j) q += U[j][0] * xv[j];
                if (q < 0) q = -q;
                if (q > cur.q && q <= T) qs.push_back(q);
            }
            std::sort(qs.begin(), qs.end());
            qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

            for (const auto& q : qs) {
                bool tie = false;
                std::vector<mpz_class> a = round_at(E, q, tie);
                RatInterval xi = xi_sq_interval(E.enc, q, a);
                bool is_record = false;
                while (true) {
                    if (xi.hi < ml) {
                        is_record = true;
                        break;
                    }
                    if (xi.lo > mh) break;
                    if (xi.lo == xi.hi && ml == mh)
                        throw ExactTie("xi ties the running minimum exactly at q=" + q.get_str(),
                                       q);
                    E.refine(q);
                    xi = xi_sq_interval(E.enc, q, a);
                    RatInterval m2 = xi_sq_interval(E.enc, cur.q, cur.a);
                    ml = m2.lo;
                    mh = m2.hi;
                }
                if (!is_record) continue;
                if (tie) throw ExactTie("two nearest vectors at record q=" + q.get_str(), q);
                next = BestApproxRecord{q, a, xi};
                break;
            }
            if (next || T >= q_max) break;
            T *= 4;
            if (T > q_max) T = q_max;
        }
        if (!next || next->q > q_max) break;
        records.back().xi_sq = {ml, mh};
        records.push_back(*next);
    }
    return records;
}

} // namespace dioph
