#pragma once

#include "zeroone/problem.hpp"
#include "zeroone/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace zeroone {

// First- and second-order certification at a candidate triple (x, u, y).
//
// Critical cone at a KKT point with active sets I0 (u = 0, y = 0) and
// I+ (u = 0, y > 0):  C = { d : A_{I+} d = 0, A_{I0} d <= 0 }.

struct PStationarity {
    bool stationary = false;
    double max_violation = 0.0;  ///< max of the three residual norms
    double stationarity = 0.0;   ///< |grad f(x) + A^T y|
    double prox_gap = 0.0;       ///< dist(u, Prox_{alpha lambda h}(u + alpha y))
    double feasibility = 0.0;    ///< |A x + b - u|
};

/// Each of the three residuals must be at most tol.
PStationarity check_p_stationary(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                                 double alpha, double tol);

struct ActiveClassification {
    IndexSet i_minus;  ///< u_i <= tol
    IndexSet i_zero;   ///< |u_i| <= tol, |y_i| <= tol
    IndexSet i_plus;   ///< |u_i| <= tol, y_i > tol
    /// |u_i| <= tol with y_i < -tol: complementarity sign violated, in
    /// neither I0 nor I+.
    IndexSet violating;
    double tolerance = 0.0;
};

/// Default zero tolerance 1e-8 (1 + |u|_inf).
double default_zero_tolerance(const Vector& u);

ActiveClassification classify_active(const Vector& u, const Vector& y, std::optional<double> tol = std::nullopt);

/// |u_i| + |y_i| > tol for every i.
bool strict_complementarity(const Vector& u, const Vector& y, double tol);

enum class VerdictStatus { certified, refuted, inconclusive };

std::string to_string(VerdictStatus status);

struct Verdict {
    VerdictStatus status = VerdictStatus::inconclusive;
    /// Present iff refuted: a cone direction with d^T H d <= 0, unit norm.
    std::optional<Vector> witness;
    /// Smallest Rayleigh quotient seen; absent when the cone is {0}.
    std::optional<double> min_rayleigh;
    std::string evidence;
};

/// {"status", "witness"?, "min_rayleigh"?, "evidence"} as compact JSON.
std::string to_json(const Verdict& verdict);

struct ConeOptions {
    double tol = 1e-10;               ///< Rayleigh threshold
    int samples = 512;                ///< accepted random cone directions
    std::uint64_t seed = 0x5eed;
    std::optional<double> zero_tol;   ///< classify_active tolerance
};

/// Certified, refuted or inconclusive for d^T H d > 0 on C minus the origin.
/// Exact when I0 is empty; otherwise exact on the lineality space
/// null(A_{I+ u I0}) and sampled on the rest of the cone. n > 2000 throws.
Verdict sosc_verdict(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                     const ConeOptions& options = {});

struct SoncResult {
    bool holds = true;
    double min_quadratic = kInf;  ///< +inf when the cone is {0}
    std::optional<Vector> witness;
};

/// d^T H d >= -tol on unit cone directions, same machinery as sosc_verdict.
SoncResult sonc_check(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                      const ConeOptions& options = {});

/// Grid search on { x' : |x' - x|_inf <= radius } with grid points per axis
/// (the center is always included). True iff F(x) <= min F + 1e-12 (1 + |F(x)|)
/// for F = f + lambda h(A . + b). Requires n + m <= 6 and grid <= 7.
bool brute_force_local_min(const CompositeProblem& problem, const Vector& x, const Vector& u, double radius,
                           int grid);

/// alpha* for a KKT triple: every alpha in (0, alpha*) makes it P-stationary.
/// Throws DomainError naming the first violated KKT condition.
double kkt_to_alpha_interval(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y,
                             double tol = 1e-8);

}  // namespace zeroone
