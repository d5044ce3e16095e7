#include "fishtank/infotheory.hpp"

#include <cmath>
#include <stdexcept>

#include "fishtank/util_math.hpp"

namespace fishtank {

namespace {

// psi(x+c) - psi(x) for large x, from the asymptotic series term by term so
// no cancellation occurs even when c is tiny; |error| ~ c x^{-3} for x >= 1e4.
double digamma_diff_large(double x, double c) {
    const double xc = x + c;
    return std::log1p(c / x) + c / (2.0 * x * xc) + c * (2.0 * x + c) / (12.0 * x * x * xc * xc);
}

// psi'(x) via recurrence into the asymptotic regime.
double trigamma(double x) {
    double acc = 0.0;
    while (x < 40.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x, inv2 = inv * inv;
    // 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7) - 1/(30x^9)
    acc += inv * (1.0 + inv * (0.5 + inv * (1.0 / 6 + inv2 * (-1.0 / 30 + inv2 * (1.0 / 42 - inv2 / 30)))));
    return acc;
}

// S(c) = sum_{k>=1} (1/k) ln(1 + 1/(k+c)), c >= 0.
// Explicit sum to K plus a tail from the log's series expansion.
double log_ratio_series(double c) {
    const uint64_t K = std::max<uint64_t>(100000, uint64_t(c > 0 ? 20.0 * c : 0) + 100000);
    double sum = 0.0;
    for (uint64_t k = K; k >= 1; --k) sum += std::log1p(1.0 / (double(k) + c)) / double(k);

    // tail: sum_j (-1)^{j+1}/j * R_j with R_j = sum_{k>K} 1/(k (k+c)^j)
    const double Kd = double(K);
    double r1;
    if (c < 1e-14) {
        r1 = trigamma(Kd + 1.0);  // sum_{k>K} k^{-2}
    } else {
        r1 = digamma_diff_large(Kd + 1.0, c) / c;
    }
    const double a = Kd + 0.5;
    const double r2 = 0.5 / (a * a) - (2.0 / 3.0) * c / (a * a * a);  // int x^{-1}(x+c)^{-2}
    const double r3 = 1.0 / (3.0 * a * a * a);
    return sum + r1 - 0.5 * r2 + (1.0 / 3.0) * r3;
}

}  // namespace

double hdot(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("hdot: t must be > 0");
    if (t > 1e100) return 0.0;
    const double p0 = std::exp(-t);
    const double q0 = -std::expm1(-t);  // 1 - e^{-t}
    // ln(1 - p0) via log1p keeps full relative precision when q0 ~ 1.
    const double ent = t * p0 - (p0 < 1.0 ? q0 * std::log1p(-p0) : 0.0);
    return ent / kLn2;
}

double idot(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("idot: t must be > 0");
    if (t > 1e100) return 0.0;
    if (t > 36.0) return t * t * std::exp(-t) / (-std::expm1(-t));
    return t * t / std::expm1(t);
}

double h0() {
    return 1.0 / kLn2 + log_ratio_series(0.0) / kLn2;
}

double i0() {
    return 1.6449340668482264365;  // pi^2/6
}

double phi(double q) {
    if (!(q > 1.0)) throw std::invalid_argument("phi: q must be > 1");
    const double c = 1.0 / (q - 1.0);
    return (1.0 - 1.0 / q) / kLn2 + log_ratio_series(c) / kLn2;
}

double rho(double q) {
    if (!(q > 1.0)) throw std::invalid_argument("rho: q must be > 1");
    return trigamma(q / (q - 1.0));
}

FishReport fish_pcsa(double q) {
    if (!(q > 1.0)) throw std::invalid_argument("fish_pcsa: q must be > 1");
    const double lnq = std::log(q);
    const double h = h0(), i = i0();
    return {h / lnq, i / lnq, h / i};
}

FishReport fish_ll(double q) {
    if (!(q > 1.0)) throw std::invalid_argument("fish_ll: q must be > 1");
    const double lnq = std::log(q);
    const double p = phi(q), r = rho(q);
    return {p / lnq, r / lnq, p / r};
}

CurvePoint pcsa_curves(double q, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    if (!(q > 1.0)) throw std::invalid_argument("q must be > 1");
    const double lnq = std::log(q);
    const long k0 = long(std::floor(std::log(lambda) / lnq));
    double ent = 0.0, info = 0.0;
    // columns k >= k0: t = lambda q^{-k} decreasing geometrically
    for (long k = k0;; ++k) {
        const double t = lambda * std::exp(-double(k) * lnq);
        const double he = hdot(t), ie = idot(t);
        ent += he;
        info += ie;
        if (he < 1e-18 && ie < 1e-18 && k > k0 + 4) break;
        if (k > k0 + 100000) break;
    }
    // columns k < k0: t grows, both terms die doubly exponentially
    for (long k = k0 - 1;; --k) {
        const double t = lambda * std::exp(-double(k) * lnq);
        const double he = hdot(t), ie = idot(t);
        ent += he;
        info += ie;
        if (he < 1e-18 && ie < 1e-18) break;
        if (k < k0 - 100000) break;
    }
    return {lambda, ent, info};
}

CurvePoint ll_curves(double q, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    if (!(q > 1.0)) throw std::invalid_argument("q must be > 1");
    const double lnq = std::log(q);
    const long k0 = long(std::floor(std::log(lambda) / lnq));
    // Pr(state = k) = e^{-a} - e^{-b}, a = lambda q^{-(k+1)}, b = a q.
    auto terms = [&](long k, double* he, double* ie) {
        const double a = lambda * std::exp(-double(k + 1) * lnq);
        const double b = a * q;
        const double d = -std::expm1(-(b - a));  // 1 - e^{-(b-a)}
        const double ea = std::exp(-a);
        const double psi = ea * d;
        *he = psi > 0.0 ? -psi * std::log2(psi) : 0.0;
        // lambda * psi' = e^{-a} (b e^{-(b-a)} - a)
        const double u = b * std::exp(-(b - a)) - a;
        *ie = psi > 0.0 ? ea * u * u / d : 0.0;
    };
    double ent = 0.0, info = 0.0;
    for (long k = k0;; ++k) {
        double he, ie;
        terms(k, &he, &ie);
        ent += he;
        info += ie;
        if (he < 1e-18 && ie < 1e-18 && k > k0 + 4) break;
        if (k > k0 + 100000) break;
    }
    for (long k = k0 - 1;; --k) {
        double he, ie;
        terms(k, &he, &ie);
        ent += he;
        info += ie;
        if (he < 1e-18 && ie < 1e-18) break;
        if (k < k0 - 100000) break;
    }
    return {lambda, ent, info};
}

double average_norm_info(bool pcsa, double q, double lambda0, int points) {
    double acc = 0.0;
    for (int l = 0; l < points; ++l) {
        const double lam = lambda0 * std::pow(q, (l + 0.5) / points);
        const CurvePoint c = pcsa ? pcsa_curves(q, lam) : ll_curves(q, lam);
        acc += c.norm_info;
    }
    return acc / points;
}

double min_norm_info_over_period(bool pcsa, double q, double lambda0, int points) {
    double best = HUGE_VAL;
    for (int l = 0; l < points; ++l) {
        const double lam = lambda0 * std::pow(q, double(l) / points);
        const CurvePoint c = pcsa ? pcsa_curves(q, lam) : ll_curves(q, lam);
        if (c.norm_info < best) best = c.norm_info;
    }
    return best;
}

namespace {

// Gauss-Kronrod 7/15 nodes and weights.
constexpr double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                            0.741531185599394, 0.586087235467691, 0.405845151377397,
                            0.207784955007898, 0.0};
constexpr double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                            0.140653259715525, 0.169004726639267, 0.190350578064785,
                            0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

void gk15(double (*f)(double), double a, double b, double* result, double* err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double dx = h * kXgk[i];
        const double fv = (i == 7) ? f(c) : f(c - dx) + f(c + dx);
        resk += kWgk[i] * fv;
        if (i % 2 == 1) resg += kWg[i / 2] * fv;
    }
    if (resg == 0.0 && kXgk[7] == 0.0) resg += kWg[3] * f(c);  // unreachable guard
    *result = resk * h;
    *err = std::abs(resk - resg) * h;
}

double integrate_rec(double (*f)(double), double a, double b, double tol, int depth) {
    double r, e;
    gk15(f, a, b, &r, &e);
    if (e <= tol || depth >= 60) return r;
    const double c = 0.5 * (a + b);
    return integrate_rec(f, a, c, 0.5 * tol, depth + 1) +
           integrate_rec(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate(double (*f)(double), double a, double b, double tol) {
    return integrate_rec(f, a, b, tol, 0);
}

namespace {
double hdot_exp(double x) { return hdot(std::exp(x)); }
double idot_exp(double x) { return idot(std::exp(x)); }
}  // namespace

LemmaReport verify_lemmas() {
    LemmaReport rep;
    // The integrands vanish at least like e^{-40} outside [-40, 40].
    const double hq = integrate(hdot_exp, -40.0, 40.0, 1e-11);
    const double iq = integrate(idot_exp, -40.0, 40.0, 1e-11);
    rep.checks.push_back({"integral hdot(e^x) dx = h0", std::abs(hq - h0()) < 1e-8,
                          std::abs(hq - h0())});
    rep.checks.push_back({"integral idot(e^x) dx = i0", std::abs(iq - i0()) < 1e-8,
                          std::abs(iq - i0())});

    // hdot/idot strictly decreasing on a 10^4-point log grid over [1e-6, 50].
    const int n = 10000;
    int violations = 0;
    double prev = HUGE_VAL;
    for (int k = 0; k < n; ++k) {
        const double t = 1e-6 * std::pow(50.0 / 1e-6, double(k) / (n - 1));
        const double ratio = hdot(t) / idot(t);
        if (!(ratio < prev)) ++violations;
        prev = ratio;
    }
    rep.checks.push_back({"hdot/idot strictly decreasing", violations == 0, double(violations)});

    // t e^{-t} <= hdot(t) ln2 <= 2 sqrt(t) and idot(t) <= 4 e^{-t/2}.
    int bound_violations = 0;
    for (int k = 0; k < n; ++k) {
        const double t = 1e-6 * std::pow(50.0 / 1e-6, double(k) / (n - 1));
        const double he = hdot(t) * kLn2;
        if (he < t * std::exp(-t) * (1.0 - 1e-12) || he > 2.0 * std::sqrt(t) * (1.0 + 1e-12))
            ++bound_violations;
        if (idot(t) > 4.0 * std::exp(-t / 2.0) * (1.0 + 1e-12)) ++bound_violations;
    }
    rep.checks.push_back(
        {"sandwich and tail bounds on grid", bound_violations == 0, double(bound_violations)});
    return rep;
}

}  // namespace fishtank
