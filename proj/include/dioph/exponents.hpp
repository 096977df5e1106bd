#pragma once

// Scalar parameter calculus behind the growth-ratio analysis: the geometric
// sums S_k, the quadratic family R_k and its distinguished root, the lower
// bound function G_n, the sigma/f recursion chain, limit values, and the
// periodic exponent schedule used by the synthesizer.
//
// Everything here is tolerance-based high-precision arithmetic; roots are
// algebraic irrationals, so exact rationals buy nothing downstream.

#include "dioph/real.hpp"

#include <vector>

namespace dioph {

// Shared parameter pair. theta = (1-lambda)/lambda.
struct ParamSet {
    Real lambda;
    Real theta;
    int k = 1;

    ParamSet(const Real& lambda_, int k_);
};

struct RootResult {
    Real value;
    Real lo, hi; // bracket with a certified sign change
    int iterations = 0;
};

struct PolyCoeffs {
    Real M, N, P; // R_k(g) = M g^2 - N g + P
};

struct ExponentChain {
    Real g_k;
    std::vector<Real> g_kj;  // subsidiary factors, indices 0..k-1
    std::vector<Real> u_seq; // periodic radius exponents, length k+1
};

// Accepted lambda range. Endpoints of (1/3, 1) are excluded with margin.
inline constexpr double kLambdaMin = 0.3334;
inline constexpr double kLambdaMax = 0.9999;

Real theta_of(const Real& lambda);
void check_lambda(const Real& lambda); // domain error outside [0.3334, 0.9999]

// S_k = sum_{j<k} theta^j; S_0 = 0. Equals k at theta = 1.
Real series_S(int k, const Real& theta);

// M_k = theta S_{k+1}, N_k = 2 theta^k + S_k/lambda + theta S_{k-1},
// P_k = S_{k-1}/lambda + theta^{k-1}.
PolyCoeffs poly_coeffs(int k, const Real& lambda);

Real R_eval(int k, const Real& lambda, const Real& g);

// Unique root of R_k in (max{1, 1/theta}, 2/theta) by bisection (no Newton;
// the bracket has a single certified sign change). 200-iteration cap.
RootResult root_gk(int k, const Real& lambda, const Real& tol = Real("1e-12"));

// Unique positive root of g^{n-1} = (w/(1-w)) (g^{n-2} + ... + 1) for n >= 2,
// with a +infinity sentinel at w = 1. Requires 1/n <= w <= 1.
Real G_of(int n, const Real& omega_hat);

// sigma(g, lambda) = (1/(1-lambda) - g) / (g - 1/theta), defined on the
// window lambda/(1-lambda) < g <= 1/(1-lambda); it vanishes at the top end.
Real sigma(const Real& g, const Real& lambda);

// [f_1, ..., f_k]: f_1 = 1/(theta - sigma), f_j = 1/(1/lambda - theta f_{j-1}).
// Computed both by recursion and by the closed form
// f_j = (theta^{j-1} - sigma S_{j-1}) / (theta^j - sigma S_j); the two must
// agree, which catches window violations early. The top window endpoint
// g = 1/(1-lambda) is admitted here (sigma vanishes there).
// Throws a domain error when theta^j - sigma S_j <= 0 for some j <= k.
std::vector<Real> f_chain(int k, const Real& g, const Real& lambda);

// g_k plus the subsidiary chain g_{k,0} = 1/(theta g_k - 1),
// g_{k,j} = f_j(g_k), and the periodic exponent list
// u_seq[i] = 1 + lambda * D[i] over D = [g_{k,k-1}, ..., g_{k,0}, g_k].
// Both glue identities are re-verified internally before returning.
ExponentChain exponent_chain(int k, const Real& lambda);

// Growth factor for building the (j+1)-th vector, j >= 1: D[(j+k-2) mod (k+1)]
// over the same D order as u_seq. Position k of the period is the single
// stage-2 step.
int schedule_position(int k, long j);

// lim_k g_k: 1/(1-lambda) for lambda >= 1/2, 2 theta^{-1} ... i.e.
// 2 lambda/(1-lambda) for lambda <= 1/2 (both equal 2 at lambda = 1/2).
Real gbar(const Real& lambda);

// The parameter where the k=1 root collides with theta itself:
// (2 + sqrt(5) - sqrt(7 + 2 sqrt(5))) / 2, about 0.42451.
Real lambda_star();

} // namespace dioph
