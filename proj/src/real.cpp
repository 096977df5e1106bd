#include "dioph/real.hpp"

#include <cmath>
#include <stdexcept>

namespace dioph {

namespace {
unsigned g_bits = 256;
}

void set_precision_bits(unsigned bits) {
    if (bits < 64) bits = 64;
    if (bits > 1u << 20) bits = 1u << 20;
    g_bits = bits;
    // boost counts decimal digits; round up so we never undershoot the bits.
    Real::default_precision(static_cast<unsigned>(bits * 0.30103) + 2);
}

unsigned precision_bits() { return g_bits; }

namespace {
struct PrecInit {
    PrecInit() { set_precision_bits(256); }
} g_prec_init;
} // namespace

Real real_of(const mpz_class& z) {
    Real r(0);
    mpfr_set_z(r.backend().data(), z.get_mpz_t(), MPFR_RNDN);
    return r;
}

Real real_of(const mpq_class& q) {
    Real r(0);
    mpfr_set_q(r.backend().data(), q.get_mpq_t(), MPFR_RNDN);
    return r;
}

Real real_of_decimal(const std::string& s) { return Real(s); }

mpq_class rat_of(const Real& x) {
    if (x == 0) return mpq_class(0);
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x.backend().data());
    mpq_class r(m);
    if (e > 0) {
        mpz_mul_2exp(r.get_num().get_mpz_t(), r.get_num().get_mpz_t(),
                     static_cast<mp_bitcnt_t>(e));
    } else if (e < 0) {
        mpz_mul_2exp(r.get_den().get_mpz_t(), r.get_den().get_mpz_t(),
                     static_cast<mp_bitcnt_t>(-e));
        r.canonicalize(); // only strips shared factors of two
    }
    return r;
}

mpq_class dyadic_of(const Real& x, unsigned bits) {
    if (x == 0) return mpq_class(0);
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x.backend().data());
    size_t have = mpz_sizeinbase(m.get_mpz_t(), 2);
    if (have > bits) {
        size_t drop = have - bits;
        mpz_class half;
        mpz_tdiv_q_2exp(half.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(drop - 1));
        // round to nearest on the dropped bits
        mpz_class q;
        mpz_tdiv_q_2exp(q.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(drop));
        if (mpz_tstbit(half.get_mpz_t(), 0)) q += (m >= 0 ? 1 : -1);
        m = q;
        e += static_cast<mpfr_exp_t>(drop);
    }
    mpq_class r(m);
    if (e > 0) {
        mpz_mul_2exp(r.get_num().get_mpz_t(), r.get_num().get_mpz_t(),
                     static_cast<mp_bitcnt_t>(e));
    } else if (e < 0) {
        mpz_mul_2exp(r.get_den().get_mpz_t(), r.get_den().get_mpz_t(),
                     static_cast<mp_bitcnt_t>(-e));
        r.canonicalize();
    }
    return r;
}

mpq_class rat_pow_neg(const mpz_class& q, const Real& u, unsigned bits) {
    if (q <= 0) throw std::domain_error("rat_pow_neg: q must be positive");
    // Work at extra precision so the top `bits` bits are trustworthy.
    unsigned save = Real::default_precision();
    Real::default_precision(static_cast<unsigned>((bits + 96) * 0.30103) + 2);
    Real lq = log(real_of(q));
    Real v = exp(-(u * lq));
    Real::default_precision(save);
    return dyadic_of(v, bits);
}

double log2_approx(const mpz_class& z) {
    signed long e = 0;
    double d = mpz_get_d_2exp(&e, z.get_mpz_t());
    return std::log2(std::fabs(d)) + static_cast<double>(e);
}

double log2_approx(const mpq_class& q) {
    return log2_approx(mpz_class(q.get_num())) - log2_approx(mpz_class(q.get_den()));
}

std::string decimal_string(const Real& x, unsigned digits) {
    return x.str(digits, std::ios_base::fixed);
}

} // namespace dioph
