#pragma once

// High-precision floating point layer. Algebraic quantities (roots of the
// R_k quadratics, powers q^{-u}) are irrational, so they live here; every
// decision that must be exact is made downstream on integers or rationals
// derived from these values (see geometry.hpp).

#include <boost/multiprecision/mpfr.hpp>
#include <gmpxx.h>
#include <string>

namespace dioph {

using Real = boost::multiprecision::mpfr_float;

// Global working precision in bits (default 256). Affects Reals created
// after the call. The CLI maps --precision-bits / DIOPH_LAB_PRECISION here.
void set_precision_bits(unsigned bits);
unsigned precision_bits();

Real real_of(const mpz_class& z);
Real real_of(const mpq_class& q);
Real real_of_decimal(const std::string& s);

// Exact rational value of a Real (every mpfr value is m * 2^e).
mpq_class rat_of(const Real& x);

// Rational m * 2^e with `bits` mantissa bits, nearest to x. Used to pin the
// neighborhood radii q^{-u_j} as exact rationals once per step.
mpq_class dyadic_of(const Real& x, unsigned bits);

// q^{-u} as an exact dyadic rational with `bits` mantissa bits; q > 0.
mpq_class rat_pow_neg(const mpz_class& q, const Real& u, unsigned bits);

// Cheap magnitude probes (double mantissa + full exponent, fine for logs
// and band diagnostics; never used for exact decisions).
double log2_approx(const mpz_class& z);  // z > 0
double log2_approx(const mpq_class& q); // q > 0

std::string decimal_string(const Real& x, unsigned digits);

} // namespace dioph
