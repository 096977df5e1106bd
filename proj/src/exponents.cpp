#include "dioph/exponents.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace dioph {

namespace {

Real abs_r(const Real& x) { return x < 0 ? Real(-x) : x; }

Real max_r(const Real& a, const Real& b) { return a < b ? b : a; }

void check_k(int k) {
    if (k < 1) throw std::domain_error("k must be a positive integer");
}

// route-agreement slack: far looser than working precision, far tighter
// than any structural error could produce
Real route_eps() {
    return boost::multiprecision::ldexp(Real(1), -60);
}

} // namespace

Real theta_of(const Real& lambda) { return (1 - lambda) / lambda; }

void check_lambda(const Real& lambda) {
    if (lambda < Real(kLambdaMin) || lambda > Real(kLambdaMax))
        throw std::domain_error("lambda outside accepted range [0.3334, 0.9999]");
}

ParamSet::ParamSet(const Real& lambda_, int k_) : lambda(lambda_), k(k_) {
    check_lambda(lambda);
    check_k(k);
    theta = theta_of(lambda);
}

Real series_S(int k, const Real& theta) {
    if (k < 0) throw std::domain_error("series_S: k must be >= 0");
    Real s = 0, p = 1;
    for (int i = 0; i < k; ++i) {
        s += p;
        p *= theta;
    }
    return s;
}

PolyCoeffs poly_coeffs(int k, const Real& lambda) {
    check_k(k);
    check_lambda(lambda);
    Real th = theta_of(lambda);
    Real thk = pow(th, k);
    PolyCoeffs c;
    c.M = th * series_S(k + 1, th);
    c.N = 2 * thk + series_S(k, th) / lambda + th * series_S(k - 1, th);
    c.P = series_S(k - 1, th) / lambda + pow(th, k - 1);
    return c;
}

Real R_eval(int k, const Real& lambda, const Real& g) {
    PolyCoeffs c = poly_coeffs(k, lambda);
    return c.M * g * g - c.N * g + c.P;
}

RootResult root_gk(int k, const Real& lambda, const Real& tol) {
    check_k(k);
    check_lambda(lambda);
    if (!(tol > 0)) throw std::domain_error("root_gk: tol must be positive");
    Real th = theta_of(lambda);
    Real lo0 = max_r(Real(1), 1 / th);
    Real hi0 = 2 / th;
    Real width = hi0 - lo0;
    // inset endpoints, then widen back out until the sign change is certified
    Real eps = width / 1024;
    Real lo = lo0 + eps, hi = hi0 - eps;
    for (int t = 0; t < 100 && R_eval(k, lambda, lo) >= 0; ++t) {
        eps /= 4;
        lo = lo0 + eps;
    }
    Real eps2 = width / 1024;
    for (int t = 0; t < 100 && R_eval(k, lambda, hi) <= 0; ++t) {
        eps2 /= 4;
        hi = hi0 - eps2;
    }
    if (!(R_eval(k, lambda, lo) < 0 && R_eval(k, lambda, hi) > 0))
        throw std::runtime_error("root_gk: no certified sign change (precision bug?)");
    RootResult out;
    int it = 0;
    while (hi - lo > tol && it < 200) {
        Real mid = (lo + hi) / 2;
        Real rm = R_eval(k, lambda, mid);
        if (rm < 0) {
            lo = mid;
        } else if (rm > 0) {
            hi = mid;
        } else {
            // dead-center hit: nudge a hair to keep the sign change strict
            Real h = tol / 8;
            if (R_eval(k, lambda, mid - h) < 0 && R_eval(k, lambda, mid + h) > 0) {
                lo = mid - h;
                hi = mid + h;
                ++it;
                break;
            }
            throw std::logic_error("root_gk: degenerate bracket");
        }
        ++it;
    }
    out.lo = lo;
    out.hi = hi;
    out.value = (lo + hi) / 2;
    out.iterations = it;
    return out;
}

Real G_of(int n, const Real& omega_hat) {
    if (n < 2) throw std::domain_error("G_of: n must be >= 2");
    if (omega_hat > 1 || omega_hat * n < 1)
        throw std::domain_error("G_of: omega_hat outside [1/n, 1]");
    if (omega_hat == 1) return std::numeric_limits<Real>::infinity();
    Real th = (1 - omega_hat) / omega_hat;
    // The explicit return type matters: an expression template here would
    // hold references to s and p past their lifetime.
    auto h = [&](const Real& g) -> Real {
        Real s = 0, p = 1;
        for (int i = 0; i <= n - 2; ++i) {
            s += p;
            p *= g;
        }
        return th * p - s; // p = g^{n-1} after the loop
    };
    Real lo = 1;
    Real hlo = h(lo);
    if (hlo == 0) return lo; // omega_hat = 1/n exactly
    if (hlo > 0) throw std::logic_error("G_of: lower bracket sign unexpected");
    Real hi = 2;
    int guard = 0;
    while (h(hi) <= 0) {
        hi *= 2;
        if (++guard > 2000) throw std::logic_error("G_of: no upper bracket");
    }
    Real eps = boost::multiprecision::ldexp(Real(1), -200);
    for (int it = 0; it < 500 && hi - lo > eps * hi; ++it) {
        Real mid = (lo + hi) / 2;
        if (h(mid) < 0)
            lo = mid;
        else
            hi = mid;
    }
    return (lo + hi) / 2;
}

namespace {

// sigma without the strict-window guard; f_chain admits the top endpoint
Real sigma_raw(const Real& g, const Real& lambda) {
    Real th = theta_of(lambda);
    return (1 / (1 - lambda) - g) / (g - 1 / th);
}

} // namespace

Real sigma(const Real& g, const Real& lambda) {
    check_lambda(lambda);
    Real th = theta_of(lambda);
    // The top endpoint is admitted (sigma vanishes there), matching f_chain.
    if (!(g > 1 / th && g <= 1 / (1 - lambda)))
        throw std::domain_error("sigma: g outside the window (lambda/(1-lambda), 1/(1-lambda)]");
    return sigma_raw(g, lambda);
}

std::vector<Real> f_chain(int k, const Real& g, const Real& lambda) {
    check_k(k);
    check_lambda(lambda);
    Real th = theta_of(lambda);
    if (!(g > 1 / th && g <= 1 / (1 - lambda)))
        throw std::domain_error("f_chain: g outside the window (lambda/(1-lambda), 1/(1-lambda)]");
    Real sg = sigma_raw(g, lambda);
    for (int j = 1; j <= k; ++j) {
        if (!(pow(th, j) - sg * series_S(j, th) > 0))
            throw std::domain_error("f_chain: window violated at step " + std::to_string(j) +
                                    " (theta^j - sigma*S_j <= 0)");
    }
    std::vector<Real> rec(k);
    rec[0] = 1 / (th - sg);
    for (int j = 2; j <= k; ++j) rec[j - 1] = 1 / (1 / lambda - th * rec[j - 2]);
    Real eps = route_eps();
    std::vector<Real> out(k);
    for (int j = 1; j <= k; ++j) {
        Real cf = (pow(th, j - 1) - sg * series_S(j - 1, th)) / (pow(th, j) - sg * series_S(j, th));
        if (abs_r(cf - rec[j - 1]) > eps * max_r(Real(1), abs_r(cf)))
            throw std::logic_error("f_chain: closed form and recursion disagree");
        out[j - 1] = cf;
    }
    return out;
}

ExponentChain exponent_chain(int k, const Real& lambda) {
    check_k(k);
    check_lambda(lambda);
    // The gap between the root and its k -> infinity limit decays like
    // theta^k and reaches ~1e-24 within the supported parameter box, while
    // the factor chain below amplifies root error by the product of the
    // squared factors. The root has to be far sharper than both scales or
    // the window checks in f_chain reject a mathematically valid input.
    RootResult rr = root_gk(k, lambda, Real("1e-40"));
    Real g = rr.value;
    Real th = theta_of(lambda);
    ExponentChain ch;
    ch.g_k = g;
    ch.g_kj.resize(k);
    ch.g_kj[0] = 1 / (th * g - 1);
    if (k >= 2) {
        auto fs = f_chain(k - 1, g, lambda);
        for (int j = 1; j < k; ++j) ch.g_kj[j] = fs[j - 1];
    }
    // re-verify both glue identities before handing the chain out
    Real tol9("1e-9");
    Real back = (ch.g_kj[0] + 1) / (th * ch.g_kj[0]);
    if (abs_r(back - g) > tol9 * max_r(Real(1), abs_r(g)))
        throw std::logic_error("exponent_chain: glue identity for g_k failed");
    for (int j = 1; j < k; ++j) {
        Real prev = (ch.g_kj[j] - lambda) / ((1 - lambda) * ch.g_kj[j]);
        if (abs_r(prev - ch.g_kj[j - 1]) > tol9 * max_r(Real(1), abs_r(ch.g_kj[j - 1])))
            throw std::logic_error("exponent_chain: glue identity failed at j=" + std::to_string(j));
    }
    for (int j = 0; j < k; ++j) {
        if (ch.g_kj[j] > g + tol9)
            throw std::logic_error("exponent_chain: subsidiary factor exceeds g_k");
    }
    if (ch.g_kj[0] < 1 - tol9) throw std::logic_error("exponent_chain: g_{k,0} below 1");
    ch.u_seq.resize(k + 1);
    for (int i = 0; i <= k; ++i) {
        Real d = (i < k) ? ch.g_kj[k - 1 - i] : g;
        ch.u_seq[i] = 1 + lambda * d;
    }
    return ch;
}

int schedule_position(int k, long j) {
    if (j < 1) throw std::domain_error("schedule_position: j must be >= 1");
    return static_cast<int>((j + k - 2) % (k + 1));
}

Real gbar(const Real& lambda) {
    check_lambda(lambda);
    if (lambda >= Real(1) / 2) return 1 / (1 - lambda);
    return 2 * lambda / (1 - lambda);
}

Real lambda_star() {
    Real s5 = sqrt(Real(5));
    return (2 + s5 - sqrt(7 + 2 * s5)) / 2;
}

} // namespace dioph
