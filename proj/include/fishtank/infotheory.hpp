#pragma once

#include <string>
#include <vector>

namespace fishtank {

// Average entropy (bits), average normalized information, and their ratio
// for a sketch family.  The ratio is the storage cost in bits per unit of
// inverse relative variance; lower is better.
struct FishReport {
    double h_avg = 0.0;
    double i_avg = 0.0;
    double fish = 0.0;
};

struct CurvePoint {
    double lambda = 0.0;
    double entropy_bits = 0.0;
    double norm_info = 0.0;  // lambda^2 * Fisher information
};

// Entropy (bits) of the indicator of a cell with Poisson(t) occupancy.
double hdot(double t);
// Normalized Fisher information t^2/(e^t - 1) of the same indicator.
double idot(double t);

// Aggregate per-cell constants: integrals of hdot/idot over all scales.
// h0 = 1/ln2 + sum_{k>=1} (1/k) log2(1+1/k), i0 = pi^2/6.
double h0();
double i0();

// Register-sketch aggregates, q > 1:
// phi(q) = (1-1/q)/ln2 + sum_{k>=1} (1/k) log2((k+1/(q-1)+1)/(k+1/(q-1)))
// rho(q) = sum_{k>=0} (k + q/(q-1))^{-2}
double phi(double q);
double rho(double q);

FishReport fish_pcsa(double q);
FishReport fish_ll(double q);

// Per-cardinality entropy and normalized information, summed over the
// unbounded column range (terms below the noise floor are truncated; both
// summands decay at least geometrically in each direction).
CurvePoint pcsa_curves(double q, double lambda);
CurvePoint ll_curves(double q, double lambda);

// Mean of a curve's norm_info over one multiplicative period in lambda.
double average_norm_info(bool pcsa, double q, double lambda0, int points = 512);
double min_norm_info_over_period(bool pcsa, double q, double lambda0, int points = 2048);

// Adaptive Gauss-Kronrod (7/15) integration.
double integrate(double (*f)(double), double a, double b, double tol);

struct LemmaCheck {
    std::string name;
    bool pass = false;
    double detail = 0.0;  // worst deviation or violation count
};

struct LemmaReport {
    std::vector<LemmaCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Numerical verification of the calculus facts the estimators rest on:
// the hdot/idot integrals reproduce h0/i0 to 1e-8, hdot/idot is strictly
// decreasing, and the sandwich/tail bounds hold on a dense grid.
LemmaReport verify_lemmas();

}  // namespace fishtank
