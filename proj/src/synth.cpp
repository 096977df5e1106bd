#include "dioph/synth.hpp"

#include "dioph/real.hpp"

#include <mpfr.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>

namespace dioph {

void BandStat::add(double v) {
    if (samples == 0) {
        min_log2 = max_log2 = v;
    } else {
        min_log2 = std::min(min_log2, v);
        max_log2 = std::max(max_log2, v);
    }
    ++samples;
}

namespace {

struct PrecisionGuard {
    unsigned saved;
    explicit PrecisionGuard(unsigned want) : saved(precision_bits()) {
        if (want > saved) set_precision_bits(want);
    }
    ~PrecisionGuard() { set_precision_bits(saved); }
};

mpz_class round_mpq(const mpq_class& x) {
    mpz_class n = 2 * x.get_num() + x.get_den();
    mpz_class d = 2 * x.get_den();
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), n.get_mpz_t(), d.get_mpz_t());
    return q;
}

mpz_class floor_real(const Real& x) {
    mpz_class r;
    mpfr_get_z(r.get_mpz_t(), x.backend().data(), MPFR_RNDD);
    return r;
}

mpz_class round_real(const Real& x) { return floor_real(x + Real(0.5)); }

// Squared distance as the uncanceled fraction num/den with
// den = (p.den * q.den)^2; avoids rational canonicalization on huge parts.
void dist2_parts(const QPoint& p, const QPoint& q, mpz_class& num, mpz_class& den) {
    num = 0;
    for (int i = 0; i < 3; ++i) {
        mpz_class t = p.num[i] * q.den - q.num[i] * p.den;
        num += t * t;
    }
    mpz_class d = p.den * q.den;
    den = d * d;
}

double log2_frac(const mpz_class& num, const mpz_class& den) {
    return log2_approx(num) - log2_approx(den);
}

mpq_class pow2_mpq(long e) {
    mpz_class p = 1;
    p <<= static_cast<unsigned long>(e >= 0 ? e : -e);
    return e >= 0 ? mpq_class(p) : mpq_class(mpz_class(1), p);
}

struct REncl {
    mpq_class lo, hi;
    unsigned bits = 0;
};

// Enclosure of q^{-u}: dyadic midpoint plus a relative slack of 2^(8-bits)
// on both sides, covering the rounding of the pow/log evaluation.
REncl radius_enclosure(const mpz_class& q, const Real& u, unsigned bits) {
    REncl e;
    e.bits = bits;
    mpq_class mid = rat_pow_neg(q, u, bits);
    mpq_class slack = pow2_mpq(-static_cast<long>(bits >= 16 ? bits - 8 : 8));
    e.lo = mid * (1 - slack);
    e.hi = mid * (1 + slack);
    return e;
}

// Enclosure of (q (d +- t))^2 given d^2 = d2n/d2d exactly and a tail bound
// t >= 0. The cross term is bounded without a square root: for every s > 0,
// 2dt <= s d^2 + t^2 / s, and s is picked near t/d so the bound is tight.
RatInterval xi_sq_from_chord(const mpz_class& q, const mpz_class& d2n, const mpz_class& d2d,
                             const mpq_class& t) {
    mpq_class d2(d2n);
    d2 /= mpq_class(d2d);
    mpq_class q2(q * q);
    mpq_class t2 = t * t;
    if (t == 0) {
        mpq_class v = q2 * d2;
        return {v, v};
    }
    if (d2 == 0) return {mpq_class(0), q2 * t2};
    long e = std::lround(0.5 * (log2_approx(t2) - log2_frac(d2n, d2d)));
    mpq_class s = pow2_mpq(e);
    mpq_class cross = s * d2 + t2 / s;
    mpq_class lo = q2 * (d2 + t2 - cross);
    if (lo < 0) lo = 0;
    mpq_class hi = q2 * (d2 + t2 + cross);
    return {lo, hi};
}

mpz_class center_mod(const mpz_class& x, const mpz_class& m) {
    mpz_class r;
    mpz_fdiv_r(r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
    if (2 * r >= m) r -= m;
    return r;
}

mpz_class dot3(const std::array<mpz_class, 3>& a, const std::array<mpz_class, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

std::size_t bit_length(const mpz_class& z) { return mpz_sizeinbase(z.get_mpz_t(), 2); }

struct StepPlan {
    int stage = 1;
    int dim = 2;
    QPoint X;
    REncl rho;           // U radius enclosure at the newest vector
    mpq_class wr_lo, wr_hi; // rho / 10
    bool flipped = false;
    std::array<mpz_class, 3> base{};  // rounded combination coefficients
    std::array<double, 3> frac{};     // coefficient minus base, for ordering
};

} // namespace

struct SynthSession::Impl {
    SynthConfig cfg;
    ExponentChain ch;
    Real lambda_r{0};
    std::vector<double> gam; // growth exponent per schedule position
    std::vector<Real> u_r;   // radius exponent per schedule position
    double period_factor = 1;

    VecList vecs;
    IntVec w_init;  // completion vector from the initial basis extension
    IntVec zout;    // current outside basis vector
    long out_index = 0; // 1-based index of zout among vecs, 0 = completion vector
    int det_sign = 0;
    int init_det_sign = 0;
    bool initialized = false;
    unsigned cur_bits = 0;
    long escalations = 0;
    std::size_t numeric_checked = 0;

    std::vector<StepRecord> recs;
    std::vector<RatInterval> xi; // xi[i] for vecs[i], known once vecs[i+1] exists
    std::vector<double> zchord;  // zchord[i] = log2 of q_i |Z_i - Z_{i+1}|
    std::vector<std::string> notes;

    mutable std::optional<StepPlan> plan;

    explicit Impl(SynthConfig c);

    int pos0(std::size_t i) const { return schedule_position(cfg.k, static_cast<long>(i) + 1); }
    QPoint pt(std::size_t i) const { return point_of(vecs[i]); }
    double log2q(std::size_t i) const { return log2_approx(vecs[i].q); }
    REncl rho_at(std::size_t i, unsigned bits) const {
        return radius_enclosure(vecs[i].q, u_r[pos0(i)], bits);
    }
    const IntVec& out_vec(long idx1) const { return idx1 == 0 ? w_init : vecs[idx1 - 1]; }

    void init_triple();
    void scan_z2();
    void scan_z3();
    void ensure_plan() const;
    void step();
    int ball_verdict(const mpz_class& d2n, const mpz_class& d2d, StepPlan& p,
                     std::size_t m); // 1 inside, 0 outside (escalates in between)
    std::vector<BestApproxRecord> records() const;
    std::vector<RatInterval> alpha_box() const;
    bool refine_alpha(unsigned bits, std::vector<RatInterval>& enc);
    ConditionReport verify_conditions() const;
    void push_init_record(std::size_t i);
};

SynthSession::Impl::Impl(SynthConfig c) : cfg(std::move(c)) {
    if (!(cfg.lambda >= 0.34 && cfg.lambda <= 0.99))
        throw std::domain_error("synth: lambda must lie in [0.34, 0.99]");
    if (cfg.k < 1 || cfg.k > 64) throw std::domain_error("synth: k must lie in [1, 64]");
    if (cfg.steps < 5) throw std::domain_error("synth: need steps >= 5");
    if (cfg.q1 < 16) throw std::domain_error("synth: q1 must be at least 16");
    if (cfg.radius_bits < 64) cfg.radius_bits = 64;
    if (cfg.precision_cap < cfg.radius_bits) cfg.precision_cap = cfg.radius_bits;
    cur_bits = cfg.radius_bits;

    PrecisionGuard pg(cfg.radius_bits + 96);
    lambda_r = Real(cfg.lambda);
    ch = exponent_chain(cfg.k, lambda_r);
    gam.resize(cfg.k + 1);
    u_r.resize(cfg.k + 1);
    for (int i = 0; i <= cfg.k; ++i) {
        Real d = (i < cfg.k) ? ch.g_kj[cfg.k - 1 - i] : ch.g_k;
        gam[i] = d.convert_to<double>();
        u_r[i] = 1 + lambda_r * d;
    }
    period_factor = 1;
    for (double g : gam) period_factor *= g;

    double digits = log2_approx(cfg.q1) * 0.30102999566398120;
    for (int i = 0; i + 1 < cfg.steps; ++i) digits *= gam[pos0(i)];
    if (digits > cfg.max_total_digits) {
        std::ostringstream os;
        os << "growth budget: " << cfg.steps << " vectors would need about " << digits
           << " decimal digits in the last denominator (budget " << cfg.max_total_digits
           << ", per-period factor " << period_factor
           << "); fewer steps, a smaller q1, or a tamer lambda/k make this representable";
        throw GrowthBudgetError(os.str(), digits, cfg.max_total_digits, period_factor);
    }

    // The initial congruence scans hit a shell whose volume fraction shrinks
    // as q1 grows; predict the try count and refuse hopeless configurations
    // up front rather than spinning.
    double l1 = log2_approx(cfg.q1) * 0.30102999566398120;
    double g1 = gam[pos0(0)], g2 = gam[pos0(1)];
    double e2 = std::pow(10.0, 3.0 * (1.0 - g1 * (1.0 - cfg.lambda)) * l1) / 1.65;
    double e3 = std::pow(10.0, 3.0 * (1.0 - g2 * (1.0 - cfg.lambda)) * l1 * g1) / (1.65 * 0.35);
    double worst = std::max(e2, e3);
    if (worst > 0.5 * static_cast<double>(cfg.search_radius_cap)) {
        std::ostringstream os;
        os << "initial scan budget: seeding the first vectors needs about " << worst
           << " congruence tries (cap " << cfg.search_radius_cap
           << "); a smaller q1 shrinks this cost";
        throw InitScanBudgetError(os.str(), worst, cfg.search_radius_cap);
    }
}

void SynthSession::Impl::push_init_record(std::size_t i) {
    StepRecord r;
    r.index = static_cast<long>(i) + 1;
    r.stage = 0;
    r.radius_bits = cur_bits;
    r.log2_q = log2q(i);
    if (i > 0) {
        r.position = pos0(i - 1);
        r.gamma = gam[pos0(i - 1)];
        r.ratio = r.log2_q / log2q(i - 1);
        r.zeta_log2 = zchord[i - 1];
        r.zeta_band = zchord[i - 1] + cfg.lambda * r.log2_q;
    }
    recs.push_back(std::move(r));
}

void SynthSession::Impl::init_triple() {
    if (initialized) throw std::logic_error("synth: init_triple called twice");
    PrecisionGuard pg(cur_bits + 96);

    // Seed direction: sqrt(2)-1, -(2-sqrt(3)), sqrt(5)-2, truncated to 30
    // digits. The three square roots come from distinct quadratic fields, so
    // no small integer combination of the coordinates and 1 vanishes and the
    // congruence walks below cannot collapse into a rational hyperplane.
    static const char* kSeedNum[3] = {"414213562373095048801688724209",
                                      "-267949192431122706472553658494",
                                      "236067977499789696409173668731"};
    IntVec z1;
    z1.q = cfg.q1;
    mpz_class seed_den("1000000000000000000000000000000");
    for (int i = 0; i < 3; ++i) {
        mpq_class ci(mpz_class(kSeedNum[i]), seed_den);
        ci.canonicalize();
        z1.a[i] = round_mpq(ci * mpq_class(cfg.q1));
    }
    while (!is_primitive({z1})) z1.a[2] += 1;
    vecs.push_back(z1);
    push_init_record(0);

    scan_z2();
    scan_z3();

    w_init = complete_to_basis(vecs[0], vecs[1], vecs[2]);
    zout = w_init;
    out_index = 0;
    mpz_class d0 = det4(zout, vecs[0], vecs[1], vecs[2]);
    if (d0 != 1 && d0 != -1)
        throw std::logic_error("synth: completion vector does not close a basis");
    det_sign = init_det_sign = static_cast<int>(d0.get_si());
    ++numeric_checked;

    // Exact nesting of the seed neighborhoods; the scans only targeted the
    // shells, this pins the containments the rest of the chain builds on.
    REncl r1 = rho_at(0, cur_bits), r2 = rho_at(1, cur_bits), r3 = rho_at(2, cur_bits);
    QPoint p1 = pt(0), p2 = pt(1), p3 = pt(2);
    if (!ball_in_ball(p2, r2.hi, p1, r1.lo))
        throw StepFailure("seed neighborhoods do not nest (U2 in U1)", 2, "init_nesting");
    if (!ball_in_ball(p3, r3.hi, p2, r2.lo))
        throw StepFailure("seed neighborhoods do not nest (U3 in U2)", 3, "init_nesting");

    initialized = true;
    plan.reset();
}

void SynthSession::Impl::scan_z2() {
    const mpz_class& q1 = vecs[0].q;
    REncl rho1 = rho_at(0, cur_bits);
    PrecisionGuard pg(cur_bits + 96);
    mpz_class Q0 = round_real(exp(Real(gam[pos0(0)]) * log(real_of(q1))));
    mpz_class lo_q2 = Q0 / 2 + 1, hi_q2 = 2 * Q0;
    if (lo_q2 <= q1) lo_q2 = q1 + 1;

    // Accept |w|^2 in [0.3 rho_hi, 0.75 rho_lo] * q1 q2, conservative against
    // the radius enclosure, so the chord verdicts hold for the true radius.
    mpz_class up_num = 5625 * rho1.lo.get_num() * rho1.lo.get_num() * q1 * q1;
    mpz_class up_den = 10000 * rho1.lo.get_den() * rho1.lo.get_den();
    mpz_class dn_num = 900 * rho1.hi.get_num() * rho1.hi.get_num() * q1 * q1;
    mpz_class dn_den = 10000 * rho1.hi.get_den() * rho1.hi.get_den();

    std::array<mpz_class, 3> delta; // a1 mod q1, the per-increment residue step
    for (int i = 0; i < 3; ++i)
        mpz_fdiv_r(delta[i].get_mpz_t(), vecs[0].a[i].get_mpz_t(), q1.get_mpz_t());

    struct Walker {
        mpz_class q2;
        std::array<mpz_class, 3> w;
        bool alive = true;
    };
    auto start = [&](const mpz_class& q2) {
        Walker wk;
        wk.q2 = q2;
        for (int i = 0; i < 3; ++i) wk.w[i] = center_mod(-q2 * vecs[0].a[i], q1);
        return wk;
    };
    Walker up = start(Q0), down = start(Q0 - 1);
    if (up.q2 > hi_q2) up.alive = false;
    if (down.q2 < lo_q2) down.alive = false;

    auto try_accept = [&](const Walker& wk) -> bool {
        mpz_class w2 = wk.w[0] * wk.w[0] + wk.w[1] * wk.w[1] + wk.w[2] * wk.w[2];
        mpz_class qq = wk.q2 * wk.q2;
        if (w2 * up_den > up_num * qq) return false;
        if (w2 * dn_den < dn_num * qq) return false;
        IntVec z2;
        z2.q = wk.q2;
        for (int i = 0; i < 3; ++i) z2.a[i] = (wk.q2 * vecs[0].a[i] + wk.w[i]) / q1;
        if (!is_primitive({vecs[0], z2})) return false;
        vecs.push_back(z2);
        return true;
    };

    long tries = 0;
    while ((up.alive || down.alive) && tries < cfg.search_radius_cap) {
        if (up.alive) {
            ++tries;
            if (try_accept(up)) break;
            up.q2 += 1;
            if (up.q2 > hi_q2) up.alive = false;
            for (int i = 0; i < 3; ++i) {
                up.w[i] -= delta[i];
                if (2 * up.w[i] < -q1) up.w[i] += q1;
            }
        }
        if (down.alive) {
            ++tries;
            if (try_accept(down)) break;
            down.q2 -= 1;
            if (down.q2 < lo_q2) down.alive = false;
            for (int i = 0; i < 3; ++i) {
                down.w[i] += delta[i];
                if (2 * down.w[i] >= q1) down.w[i] -= q1;
            }
        }
    }
    if (vecs.size() < 2)
        throw StepFailure("congruence scan for the second vector found no shell hit", 2,
                          "init_z2");

    mpz_class cn, cd;
    dist2_parts(pt(0), pt(1), cn, cd);
    zchord.push_back(log2q(0) + 0.5 * log2_frac(cn, cd));
    REncl rho2 = rho_at(1, cur_bits);
    xi.push_back(xi_sq_from_chord(vecs[0].q, cn, cd, rho2.hi));
    push_init_record(1);
}

void SynthSession::Impl::scan_z3() {
    const mpz_class& q2 = vecs[1].q;
    REncl rho2 = rho_at(1, cur_bits);
    PrecisionGuard pg(cur_bits + 96);
    mpz_class Q1 = round_real(exp(Real(gam[pos0(1)]) * log(real_of(q2))));
    mpz_class lo_q3 = Q1 / 2 + 1, hi_q3 = 2 * Q1;
    if (lo_q3 <= q2) lo_q3 = q2 + 1;

    // Chord from Z2 back to Z1, in scaled integers: the acceptance angle and
    // the lift target are both expressed against it.
    std::array<mpz_class, 3> w = diff_num(pt(0), pt(1));

    // Integer direction perpendicular to w (Gram-Schmidt of the flattest
    // axis), defining the in-shell tilt of the lift target.
    int ax = 0;
    for (int i = 1; i < 3; ++i)
        if (abs(w[i]) < abs(w[ax])) ax = i;
    mpz_class ww = dot3(w, w);
    std::array<mpz_class, 3> p;
    for (int i = 0; i < 3; ++i) p[i] = (i == ax ? ww : mpz_class(0)) - w[ax] * w[i];

    // Lift target per q3: radius 0.525 rho2 q2 q3 at angle atan(2) from w,
    // inside both the shell band and the angle window. Leaning the new chord
    // toward the first point makes the second vector's residual meet the
    // first one at an obtuse angle, so the difference of the two vectors
    // cannot slip under the running record between their denominators. Kept
    // as 64-bit dyadic integer slopes so the scan loop below stays pure mpz.
    Real nw = sqrt(real_of(ww)), np = sqrt(real_of(dot3(p, p)));
    Real s5 = sqrt(Real(5));
    mpq_class rho_mid = (rho2.lo + rho2.hi) / 2;
    Real rmid = Real(0.525) * real_of(rho_mid) * real_of(q2);
    std::array<mpz_class, 3> tnum;
    const Real two64 = ldexp(Real(1), 64);
    for (int i = 0; i < 3; ++i) {
        Real tp = rmid * (real_of(w[i]) / (s5 * nw) + 2 * real_of(p[i]) / (s5 * np));
        tnum[i] = floor_real(tp * two64);
    }
    const mpz_class half64 = mpz_class(1) << 63, full64 = mpz_class(1) << 64;

    mpz_class up_num = 5625 * rho2.lo.get_num() * rho2.lo.get_num() * q2 * q2;
    mpz_class up_den = 10000 * rho2.lo.get_den() * rho2.lo.get_den();
    mpz_class dn_num = 900 * rho2.hi.get_num() * rho2.hi.get_num() * q2 * q2;
    mpz_class dn_den = 10000 * rho2.hi.get_den() * rho2.hi.get_den();

    std::array<mpz_class, 3> delta;
    for (int i = 0; i < 3; ++i)
        mpz_fdiv_r(delta[i].get_mpz_t(), vecs[1].a[i].get_mpz_t(), q2.get_mpz_t());

    struct Walker {
        mpz_class q3;
        std::array<mpz_class, 3> r; // -q3 a2 mod q2, in [0, q2)
        bool alive = true;
    };
    auto start = [&](const mpz_class& q3) {
        Walker wk;
        wk.q3 = q3;
        for (int i = 0; i < 3; ++i)
            mpz_fdiv_r(wk.r[i].get_mpz_t(), mpz_class(-q3 * vecs[1].a[i]).get_mpz_t(),
                       q2.get_mpz_t());
        return wk;
    };
    Walker up = start(Q1), down = start(Q1 - 1);
    if (up.q3 > hi_q3) up.alive = false;
    if (down.q3 < lo_q3) down.alive = false;

    auto try_accept = [&](const Walker& wk) -> bool {
        std::array<mpz_class, 3> wp;
        for (int i = 0; i < 3; ++i) {
            mpz_class t;
            mpz_class tq = tnum[i] * wk.q3 + half64;
            mpz_fdiv_q(t.get_mpz_t(), tq.get_mpz_t(), full64.get_mpz_t());
            mpz_class u = wk.r[i] - t;
            mpz_class kq = round_mpq(mpq_class(u, q2)); // nearest multiple of q2
            wp[i] = wk.r[i] - kq * q2;
        }
        mpz_class w2 = dot3(wp, wp);
        mpz_class qq = wk.q3 * wk.q3;
        if (w2 * up_den > up_num * qq) return false;
        if (w2 * dn_den < dn_num * qq) return false;
        if (!angle_in_quarter_half(wp, w)) return false;
        IntVec z3;
        z3.q = wk.q3;
        for (int i = 0; i < 3; ++i) z3.a[i] = (wk.q3 * vecs[1].a[i] + wp[i]) / q2;
        if (!is_primitive({vecs[0], vecs[1], z3})) return false;
        // Final arbiter for the angle at the new vertex.
        QPoint p3 = point_of(z3);
        if (!angle_in_quarter_three_quarters(diff_num(pt(0), p3), diff_num(pt(1), p3)))
            return false;
        vecs.push_back(z3);
        return true;
    };

    long tries = 0;
    while ((up.alive || down.alive) && tries < cfg.search_radius_cap) {
        if (up.alive) {
            ++tries;
            if (try_accept(up)) break;
            up.q3 += 1;
            if (up.q3 > hi_q3) up.alive = false;
            for (int i = 0; i < 3; ++i) {
                up.r[i] -= delta[i];
                if (up.r[i] < 0) up.r[i] += q2;
            }
        }
        if (down.alive) {
            ++tries;
            if (try_accept(down)) break;
            down.q3 -= 1;
            if (down.q3 < lo_q3) down.alive = false;
            for (int i = 0; i < 3; ++i) {
                down.r[i] += delta[i];
                if (down.r[i] >= q2) down.r[i] -= q2;
            }
        }
    }
    if (vecs.size() < 3)
        throw StepFailure("congruence scan for the third vector found no shell hit", 3,
                          "init_z3");

    mpz_class cn, cd;
    dist2_parts(pt(1), pt(2), cn, cd);
    zchord.push_back(log2q(1) + 0.5 * log2_frac(cn, cd));
    REncl rho3 = rho_at(2, cur_bits);
    xi.push_back(xi_sq_from_chord(vecs[1].q, cn, cd, rho3.hi));
    push_init_record(2);

    // Covolume of the seed triple against the chord/denominator product.
    auto n4 = cross4(vecs[0], vecs[1], vecs[2]);
    mpz_class det2 = n4[0] * n4[0] + n4[1] * n4[1] + n4[2] * n4[2] + n4[3] * n4[3];
    recs.back().volume_band =
        log2_approx(det2) - 2 * (zchord[0] + zchord[1] + recs.back().log2_q);
}

void SynthSession::Impl::ensure_plan() const {
    if (plan) return;
    if (!initialized) throw std::logic_error("synth: session not initialized");
    const std::size_t m = vecs.size() - 1;
    PrecisionGuard pg(cur_bits + 96);

    StepPlan p;
    p.stage = (pos0(m) == cfg.k) ? 2 : 1;
    p.dim = (p.stage == 1) ? 2 : 3;
    p.rho = rho_at(m, cur_bits);
    p.wr_lo = p.rho.lo / 10;
    p.wr_hi = p.rho.hi / 10;

    QPoint Zm = pt(m), Zp = pt(m - 1);
    std::array<mpz_class, 3> v = diff_num(Zp, Zm); // toward the previous point

    // Frame legs for the offset, exact in the chart. Stage 1 must keep the
    // center inside the plane through the last three points, or the 4x3 stage
    // solve below turns inconsistent; it therefore rounds the two plane
    // coefficients and rebuilds the center from the exact legs. Stage 2 has a
    // full-rank 4x4 solve, so it may leave that plane and round per
    // coordinate. Floating point is enough for directions and magnitudes:
    // every placement decision on the resulting center is exact.
    std::array<mpq_class, 3> e1q, e2q;
    std::array<Real, 3> e1r, e2r;
    {
        mpz_class d1 = Zp.den * Zm.den;
        for (int i = 0; i < 3; ++i) {
            e1q[i] = mpq_class(v[i], d1);
            e1q[i].canonicalize();
            e1r[i] = real_of(e1q[i]);
        }
    }
    if (p.stage == 1) {
        QPoint Zq = pt(m - 2);
        std::array<mpz_class, 3> u = diff_num(Zq, Zm);
        mpz_class d2 = Zq.den * Zm.den;
        for (int i = 0; i < 3; ++i) {
            e2q[i] = mpq_class(u[i], d2);
            e2q[i].canonicalize();
            e2r[i] = real_of(e2q[i]);
        }
    } else {
        // Toward the outside vector's chart image; also valid when the
        // outside vector has q = 0 (a point at infinity).
        Real qm = real_of(vecs[m].q), qo = real_of(zout.q);
        for (int i = 0; i < 3; ++i)
            e2r[i] = real_of(zout.a[i]) * qm - qo * real_of(vecs[m].a[i]);
    }

    // Gram-Schmidt of the second leg against the first. The angle window held
    // at each vertex keeps the legs at least 45 degrees apart in stage 1, so
    // the subtraction does not cancel.
    Real vv = e1r[0] * e1r[0] + e1r[1] * e1r[1] + e1r[2] * e1r[2];
    Real sv = e2r[0] * e1r[0] + e2r[1] * e1r[1] + e2r[2] * e1r[2];
    Real mu = sv / vv;
    std::array<Real, 3> w;
    Real ww(0);
    for (int i = 0; i < 3; ++i) {
        w[i] = e2r[i] - mu * e1r[i];
        ww += w[i] * w[i];
    }
    if (ww == 0)
        throw StepFailure("step plane is degenerate", static_cast<long>(m) + 2, "center");

    // Orientation: the offset direction is orthogonal to the previous
    // displacement by construction, so the dot rule always ties; break the
    // tie by the first nonzero coordinate, and fall back to the mirrored
    // center when the stage solve runs the wrong way.
    Real wsign(1);
    for (int i = 0; i < 3; ++i) {
        if (w[i] == 0) continue;
        if (w[i] < 0) {
            wsign = -1;
            for (int j = 0; j < 3; ++j) w[j] = -w[j];
        }
        break;
    }

    std::string why;
    Real rr = real_of(p.rho.hi);
    Real cw = rr / (2 * sqrt(ww)), cv = rr / (4 * sqrt(vv));
    for (int flip = 0; flip < 2; ++flip) {
        const Real sgn(flip ? -1 : 1);
        std::array<mpq_class, 3> xs;
        if (p.stage == 1) {
            // Center = Zm + sc e1 + tc e2, with the orthogonalized direction
            // folded back onto the exact legs.
            Real tc = sgn * cw * wsign;
            Real sc = cv - tc * mu;
            mpq_class th = dyadic_of(tc, cur_bits + 32);
            mpq_class sh = dyadic_of(sc, cur_bits + 32);
            for (int i = 0; i < 3; ++i) {
                mpq_class zi(Zm.num[i], Zm.den);
                zi.canonicalize();
                xs[i] = zi + sh * e1q[i] + th * e2q[i];
            }
        } else {
            for (int i = 0; i < 3; ++i) {
                mpq_class off = dyadic_of(sgn * cw * w[i] + cv * e1r[i], cur_bits + 32);
                mpq_class zi(Zm.num[i], Zm.den);
                zi.canonicalize();
                xs[i] = zi + off;
            }
        }
        QPoint X = qpoint_from_mpq(xs);

        if (!ball_in_ball(X, p.wr_hi, Zm, p.rho.lo)) {
            why = "center ball left the step neighborhood";
            continue;
        }
        if (!balls_disjoint(X, p.wr_hi, Zm, p.wr_hi)) {
            why = "center ball meets the vertex ball";
            continue;
        }
        if (!ball_in_cone_shell(Zm, v, X, p.wr_hi)) {
            why = "center ball left the angle cone";
            continue;
        }

        // Stage solve: tau X-bar equals the base vector plus the window
        // combination; a positive tau means the lift points the right way.
        std::array<mpz_class, 4> N = {X.den, X.num[0], X.num[1], X.num[2]};
        mpq_class tau;
        std::array<mpq_class, 3> coef;
        bool solved = false;
        if (p.stage == 1) {
            std::array<std::array<mpz_class, 3>, 4> M;
            std::array<mpz_class, 4> b;
            for (int r = 0; r < 4; ++r) {
                M[r] = {N[r], -vecs[m - 1].coord(r), -vecs[m].coord(r)};
                b[r] = vecs[m - 2].coord(r);
            }
            if (auto x = solve_4x3(M, b)) {
                tau = (*x)[0];
                coef[0] = (*x)[1];
                coef[1] = (*x)[2];
                solved = true;
            }
        } else {
            std::array<std::array<mpz_class, 4>, 4> M;
            std::array<mpz_class, 4> b;
            for (int r = 0; r < 4; ++r) {
                M[r] = {N[r], -vecs[m - 2].coord(r), -vecs[m - 1].coord(r),
                        -vecs[m].coord(r)};
                b[r] = zout.coord(r);
            }
            if (auto x = solve_4x4(M, b)) {
                tau = (*x)[0];
                coef[0] = (*x)[1];
                coef[1] = (*x)[2];
                coef[2] = (*x)[3];
                solved = true;
            }
        }
        if (!solved) {
            why = "stage system is singular";
            continue;
        }
        if (tau <= 0) {
            why = "stage solve points away from the lift";
            continue;
        }

        p.X = X;
        p.flipped = flip != 0;
        for (int i = 0; i < p.dim; ++i) {
            p.base[i] = round_mpq(coef[i]);
            mpq_class f = coef[i] - mpq_class(p.base[i]);
            p.frac[i] = f.get_d();
        }
        plan = std::move(p);
        return;
    }
    throw StepFailure("no usable step center: " + why, static_cast<long>(m) + 2, "center");
}

// Compares an exact squared distance against the W radius enclosure,
// escalating the enclosure until the verdict is unambiguous. Returns 1 for
// inside, 0 for outside; an ambiguity that survives the precision cap counts
// as outside.
int SynthSession::Impl::ball_verdict(const mpz_class& d2n, const mpz_class& d2d, StepPlan& p,
                                     std::size_t m) {
    for (;;) {
        mpz_class lo_l = d2n * p.wr_lo.get_den() * p.wr_lo.get_den();
        mpz_class lo_r = p.wr_lo.get_num() * p.wr_lo.get_num() * d2d;
        if (lo_l <= lo_r) return 1;
        mpz_class hi_l = d2n * p.wr_hi.get_den() * p.wr_hi.get_den();
        mpz_class hi_r = p.wr_hi.get_num() * p.wr_hi.get_num() * d2d;
        if (hi_l > hi_r) return 0;
        if (cur_bits >= cfg.precision_cap) {
            notes.push_back("membership verdict still ambiguous at the precision cap near "
                            "vector " +
                            std::to_string(m + 2) + "; candidate rejected");
            return 0;
        }
        cur_bits = std::min(cur_bits * 2, cfg.precision_cap);
        ++escalations;
        p.rho = rho_at(m, cur_bits);
        p.wr_lo = p.rho.lo / 10;
        p.wr_hi = p.rho.hi / 10;
    }
}

void SynthSession::Impl::step() {
    ensure_plan();
    const std::size_t m = vecs.size() - 1;

    // Budget the next denominator before doing any heavy arithmetic.
    double digits_next = log2q(m) * 0.30102999566398120 * gam[pos0(m)];
    if (digits_next > cfg.max_total_digits) {
        std::ostringstream os;
        os << "growth budget: the next denominator needs about " << digits_next
           << " decimal digits (budget " << cfg.max_total_digits << ")";
        throw GrowthBudgetError(os.str(), digits_next, cfg.max_total_digits, period_factor);
    }

    StepPlan p = *plan;
    QPoint Zm = pt(m), Zp = pt(m - 1);

    // Candidate offsets around the rounded coefficients, nearest first.
    struct Cand {
        std::array<long, 3> off;
        double key;
    };
    std::vector<Cand> cands;
    const long lim = (p.dim == 2) ? 9 : 27;
    for (long t = 0; t < lim; ++t) {
        Cand c{};
        long u = t;
        c.key = 0;
        for (int i = 0; i < p.dim; ++i) {
            c.off[i] = (u % 3) - 1;
            u /= 3;
            double d = p.frac[i] + static_cast<double>(c.off[i]);
            c.key += d * d;
        }
        cands.push_back(c);
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.key != b.key) return a.key < b.key;
        return a.off < b.off;
    });

    int rank = -1, accepted = -1;
    IntVec z_new;
    REncl rho_next;
    for (const Cand& c : cands) {
        ++rank;
        std::array<mpz_class, 3> co;
        for (int i = 0; i < p.dim; ++i) co[i] = p.base[i] + c.off[i];
        IntVec z;
        if (p.stage == 1) {
            for (int r = 0; r < 4; ++r)
                z.coord(r) = vecs[m - 2].coord(r) + co[0] * vecs[m - 1].coord(r) +
                             co[1] * vecs[m].coord(r);
        } else {
            for (int r = 0; r < 4; ++r)
                z.coord(r) = zout.coord(r) + co[0] * vecs[m - 2].coord(r) +
                             co[1] * vecs[m - 1].coord(r) + co[2] * vecs[m].coord(r);
        }
        if (z.q <= vecs[m].q) continue;

        QPoint Zc = point_of(z);
        mpz_class d2n, d2d;
        dist2_parts(Zc, p.X, d2n, d2d);
        if (ball_verdict(d2n, d2d, p, m) != 1) continue;
        if (!angle_in_quarter_three_quarters(diff_num(Zp, Zc), diff_num(Zm, Zc))) continue;

        rho_next = radius_enclosure(z.q, u_r[pos0(m + 1)], cur_bits);
        // U(Z_new, rho_next) inside the waiting ball: |Zc - X| <= wr - rho_next,
        // reusing the distance parts computed for the membership test.
        mpq_class slack = p.wr_lo - rho_next.hi;
        if (slack < 0) continue;
        if (d2n * slack.get_den() * slack.get_den() >
            slack.get_num() * slack.get_num() * d2d)
            continue;

        z_new = z;
        accepted = rank;
        break;
    }
    if (accepted < 0)
        throw StepFailure("no candidate passed the exact step tests",
                          static_cast<long>(m) + 2, "candidates");

    // Bookkeeping: chord, xi enclosure for the closed record, bands, record.
    QPoint Zc = point_of(z_new);
    mpz_class cn, cd;
    dist2_parts(Zm, Zc, cn, cd);
    zchord.push_back(log2q(m) + 0.5 * log2_frac(cn, cd));
    xi.push_back(xi_sq_from_chord(vecs[m].q, cn, cd, rho_next.hi));

    StepRecord r;
    r.index = static_cast<long>(m) + 2;
    r.stage = p.stage;
    r.position = pos0(m);
    r.out_index = out_index;
    r.candidate_rank = accepted;
    r.tau_flipped = p.flipped;
    r.radius_bits = cur_bits;
    r.log2_q = log2_approx(z_new.q);
    r.ratio = r.log2_q / log2q(m);
    r.gamma = gam[pos0(m)];
    r.zeta_log2 = zchord[m];
    r.zeta_band = zchord[m] + cfg.lambda * r.log2_q;
    for (int i = 0; i < p.dim; ++i)
        r.coeffs.push_back(p.base[i] + cands[accepted].off[i]);

    auto n4 = cross4(vecs[m - 1], vecs[m], z_new);
    mpz_class det2 = n4[0] * n4[0] + n4[1] * n4[1] + n4[2] * n4[2] + n4[3] * n4[3];
    r.volume_band = log2_approx(det2) - 2 * (zchord[m - 1] + zchord[m] + r.log2_q);

    if (p.stage == 2) {
        // The new vector leaves the old 3-space by the exact lattice minimum:
        // its product with the outgoing normal is the chain determinant.
        zout = vecs[m - 2];
        out_index = static_cast<long>(m) - 1;
        det_sign = -det_sign;
    }
    vecs.push_back(z_new);

    if (bit_length(z_new.q) <= cfg.numeric_check_bits) {
        mpz_class d = det4(out_vec(out_index), vecs[m - 1], vecs[m], vecs[m + 1]);
        if (d != det_sign)
            throw std::logic_error("synth: chain determinant broke at vector " +
                                   std::to_string(m + 2));
        r.numeric_det = true;
        ++numeric_checked;
    }
    recs.push_back(std::move(r));
    plan.reset();
}

std::vector<BestApproxRecord> SynthSession::Impl::records() const {
    const std::size_t n = vecs.size();
    std::vector<BestApproxRecord> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].q = vecs[i].q;
        out[i].a = {vecs[i].a[0], vecs[i].a[1], vecs[i].a[2]};
        if (i + 1 < n) out[i].xi_sq = xi[i];
    }
    // Last record: alpha sits in the W ball of the pending step when one can
    // be planned, or in the full U ball as a fallback.
    mpz_class d2n, d2d;
    try {
        ensure_plan();
        dist2_parts(pt(n - 1), plan->X, d2n, d2d);
        out[n - 1].xi_sq = xi_sq_from_chord(vecs[n - 1].q, d2n, d2d, plan->wr_hi);
    } catch (const SynthError&) {
        REncl rho = rho_at(n - 1, cur_bits);
        mpq_class top = mpq_class(vecs[n - 1].q * vecs[n - 1].q) * rho.hi * rho.hi;
        out[n - 1].xi_sq = {mpq_class(0), top};
    }
    return out;
}

std::vector<RatInterval> SynthSession::Impl::alpha_box() const {
    ensure_plan();
    std::vector<RatInterval> box(3);
    for (int i = 0; i < 3; ++i) {
        mpq_class c(plan->X.num[i], plan->X.den);
        c.canonicalize();
        box[i] = {c - plan->wr_hi, c + plan->wr_hi};
    }
    return box;
}

bool SynthSession::Impl::refine_alpha(unsigned bits, std::vector<RatInterval>& enc) {
    if (bits > (1u << 22)) return false;
    mpq_class need = pow2_mpq(-static_cast<long>(bits));
    try {
        ensure_plan();
        long guard = 4096;
        while (2 * plan->wr_hi > need) {
            if (--guard < 0) return false;
            step();
            ensure_plan();
        }
        enc = alpha_box();
        return true;
    } catch (const SynthError&) {
        return false;
    }
}

ConditionReport SynthSession::Impl::verify_conditions() const {
    if (vecs.size() < 5)
        throw std::domain_error("synth: need at least 5 vectors to verify conditions");
    ConditionReport rep;
    const std::size_t n = vecs.size();

    // Every stored combination, recomputed exactly.
    bool comb = true;
    for (const StepRecord& s : recs) {
        if (s.stage == 0) continue;
        const std::size_t zi = static_cast<std::size_t>(s.index) - 1;
        IntVec z;
        if (s.stage == 1) {
            for (int r = 0; r < 4; ++r)
                z.coord(r) = vecs[zi - 3].coord(r) + s.coeffs[0] * vecs[zi - 2].coord(r) +
                             s.coeffs[1] * vecs[zi - 1].coord(r);
        } else {
            const IntVec& o = out_vec(s.out_index);
            for (int r = 0; r < 4; ++r)
                z.coord(r) = o.coord(r) + s.coeffs[0] * vecs[zi - 3].coord(r) +
                             s.coeffs[1] * vecs[zi - 2].coord(r) +
                             s.coeffs[2] * vecs[zi - 1].coord(r);
        }
        if (!(z == vecs[zi])) comb = false;
    }
    rep.combination_ok = comb;

    // Unimodular chain: replay the sign and re-run the determinant wherever
    // the numbers are small enough to do it directly.
    bool bases = true;
    int sign = init_det_sign;
    std::size_t dets = 1; // the seed basis was checked numerically at init
    {
        mpz_class d = det4(w_init, vecs[0], vecs[1], vecs[2]);
        if (d != init_det_sign) bases = false;
    }
    long cur_out = 0;
    for (const StepRecord& s : recs) {
        if (s.stage == 0) continue;
        const std::size_t zi = static_cast<std::size_t>(s.index) - 1;
        if (s.out_index != cur_out) bases = false; // replay must agree with the log
        if (s.stage == 2) {
            cur_out = static_cast<long>(zi) - 2;
            sign = -sign;
        }
        if (bit_length(vecs[zi].q) <= cfg.numeric_check_bits) {
            mpz_class d =
                det4(out_vec(cur_out), vecs[zi - 2], vecs[zi - 1], vecs[zi]);
            if (d != sign) bases = false;
            ++dets;
        }
    }
    rep.bases_ok = bases;

    // Primitivity: implied by the unimodular chain for every consecutive
    // triple (each one is a window of a basis quadruple); re-checked
    // directly at small sizes.
    bool prim = bases;
    std::size_t prims = 0;
    for (std::size_t i = 0; i + 2 < n; ++i) {
        if (bit_length(vecs[i + 2].q) > cfg.numeric_check_bits) continue;
        if (!is_primitive({vecs[i], vecs[i + 1], vecs[i + 2]})) prim = false;
        ++prims;
    }
    rep.primitive_ok = prim;

    // Angle window at every interior vertex, exact.
    bool ang = true;
    for (std::size_t v = 2; v < n; ++v) {
        QPoint Pv = pt(v);
        if (!angle_in_quarter_three_quarters(diff_num(pt(v - 2), Pv),
                                             diff_num(pt(v - 1), Pv)))
            ang = false;
    }
    rep.angle_ok = ang;

    // Nesting was enforced exactly at every step; re-check the center chain
    // U_{i+1} in U_i where the numbers stay small.
    bool nest = true;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (bit_length(vecs[i + 1].q) > cfg.numeric_check_bits) continue;
        REncl ri = rho_at(i, cfg.radius_bits), rj = rho_at(i + 1, cfg.radius_bits);
        if (!ball_in_ball(pt(i + 1), rj.hi, pt(i), ri.lo)) nest = false;
    }
    rep.nesting_ok = nest;

    rep.numeric_checked = dets + prims;

    for (const StepRecord& s : recs) {
        if (s.index <= 3) continue;
        double lq_prev = s.log2_q / s.ratio;
        rep.bands["growth_pos" + std::to_string(s.position)].add(s.log2_q -
                                                                 s.gamma * lq_prev);
        rep.bands["zeta_decay"].add(s.zeta_band);
        if (s.index > 5) rep.bands["volume"].add(s.volume_band);
    }

    rep.notes = notes;
    rep.notes.push_back("consecutive-triple primitivity and quadruple unimodularity are "
                        "certified by the determinant chain from the seed basis; " +
                        std::to_string(dets) + " determinants and " + std::to_string(prims) +
                        " triples re-checked numerically");
    rep.notes.push_back("every space-changing vector has product exactly +-1 with the "
                        "outgoing normal, the smallest possible distance from the old "
                        "sublattice");
    if (escalations > 0)
        rep.notes.push_back("radius enclosures escalated " + std::to_string(escalations) +
                            " times up to " + std::to_string(cur_bits) + " bits");
    return rep;
}

SynthSession::SynthSession(SynthConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
SynthSession::~SynthSession() = default;

void SynthSession::init_triple() { impl_->init_triple(); }
void SynthSession::step() { impl_->step(); }
long SynthSession::size() const { return static_cast<long>(impl_->vecs.size()); }
const VecList& SynthSession::vectors() const { return impl_->vecs; }
const SynthConfig& SynthSession::config() const { return impl_->cfg; }
const ExponentChain& SynthSession::chain() const { return impl_->ch; }
const std::vector<StepRecord>& SynthSession::step_log() const { return impl_->recs; }
std::vector<BestApproxRecord> SynthSession::records() const { return impl_->records(); }

NeighborhoodSpec SynthSession::current_w() const {
    impl_->ensure_plan();
    NeighborhoodSpec w;
    w.center = impl_->plan->X;
    w.radius_lo = impl_->plan->wr_lo;
    w.radius_hi = impl_->plan->wr_hi;
    w.anchor_prev = impl_->pt(impl_->vecs.size() - 2);
    w.kind = 'W';
    return w;
}

std::vector<RatInterval> SynthSession::alpha_box() const { return impl_->alpha_box(); }

bool SynthSession::refine_alpha(unsigned bits, std::vector<RatInterval>& enc) {
    return impl_->refine_alpha(bits, enc);
}

ConditionReport SynthSession::verify_conditions() const { return impl_->verify_conditions(); }

const IntVec& SynthSession::completion_vector() const {
    if (!impl_->initialized) throw std::logic_error("synth: session not initialized");
    return impl_->w_init;
}

SynthResult synthesize(const SynthConfig& config) {
    SynthConfig cfg = config;
    std::vector<std::string> attempt_notes;
    for (int attempt = 0;; ++attempt) {
        auto s = std::make_shared<SynthSession>(cfg);
        try {
            s->init_triple();
            while (s->size() < cfg.steps) s->step();
        } catch (const StepFailure& e) {
            attempt_notes.push_back("q1=" + cfg.q1.get_str() + ": " + e.what());
            if (attempt >= cfg.retry_doublings) {
                std::string all;
                for (const auto& a : attempt_notes) all += "\n  " + a;
                throw SynthError("synthesis failed after " +
                                 std::to_string(attempt + 1) + " attempts:" + all);
            }
            cfg.q1 *= 2;
            continue;
        }

        SynthResult r;
        r.vectors = s->vectors();
        r.completion = s->completion_vector();
        r.records = s->records();
        r.condition_report = s->verify_conditions();
        for (const auto& a : attempt_notes)
            r.condition_report.notes.push_back("retried after " + a);
        try {
            r.realized_word = pattern_word(r.records, 3);
        } catch (const std::exception& e) {
            r.realized_word.burn_in = 3;
            r.condition_report.notes.push_back(std::string("pattern word unavailable: ") +
                                               e.what());
        }
        for (const StepRecord& sr : s->step_log())
            if (sr.index >= 2) r.realized_ratios.push_back(sr.ratio);
        r.log = s->step_log();
        r.config_used = cfg;
        r.chain = s->chain();

        std::ostringstream desc;
        desc << "synthesized point (lambda=" << cfg.lambda << ", k=" << cfg.k << ")";
        r.alpha.n = 3;
        r.alpha.description = desc.str();
        r.alpha.enclosure = s->alpha_box();
        std::shared_ptr<SynthSession> keep = s;
        r.alpha.refiner = [keep](unsigned bits, std::vector<RatInterval>& enc) {
            return keep->refine_alpha(bits, enc);
        };
        return r;
    }
}

} // namespace dioph
