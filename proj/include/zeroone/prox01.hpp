#pragma once

#include "zeroone/problem.hpp"
#include "zeroone/types.hpp"

namespace zeroone {

// Proximal calculus of the 0/1 loss h(u) = |u_+|_0.
//
// For kappa > 0 the scalar proximal problem min_z kappa*[z > 0] + (z - v)^2/2
// has threshold s = sqrt(2 kappa):
//
//   v < 0        -> v
//   0 <= v < s   -> 0
//   v = s        -> {0, v}   (two-valued; canonical selection keeps v)
//   v > s        -> v
//
// The half-open interval [0, s) is the same one that defines the active set
// in the subspace Newton solver, so the canonical selection and active-set
// identification always agree.

/// Number of strictly positive entries.
Index h_eval(const Vector& u);

/// is_tie holds when the objective values at 0 and at v agree to a relative
/// kTieTolerance, which includes v = s exactly.
struct ScalarProx {
    double canonical;
    bool is_tie;
};

inline constexpr double kTieTolerance = 1e-12;

ScalarProx prox_scalar(double v, double kappa);

struct ProxResult {
    Vector point;
    IndexSet tie_indices;
};

ProxResult prox_vector(const Vector& v, double kappa);

/// Moreau envelope of kappa*h at a scalar: 0, v^2/2 or kappa.
double moreau_scalar(double v, double kappa);

/// Sum of moreau_scalar over the entries of v.
double moreau_vector(const Vector& v, double kappa);

/// Membership v in the limiting subdifferential of h at u:
/// v_i >= 0 where u_i = 0 and v_i = 0 where u_i != 0, both to within tol.
bool subdiff_contains(const Vector& u, const Vector& v, double tol);

struct AlphaStar {
    double alpha_u;
    double alpha_y;
    double alpha;
};

/// Supremum of step sizes for which a KKT pair (u, y) is P-stationary.
/// Entries are +infinity when the corresponding vector has no positive entry.
AlphaStar alpha_star(const Vector& u, const Vector& y, double lambda);

struct ResidualTriple {
    double r1 = 0.0;
    double r2 = 0.0;
    double r3 = 0.0;
};

/// Inexactness residuals of an iterate of the augmented Lagrangian
/// subproblem with smooth part g:
///   r1 = |grad_x g|
///   r2 = |[u_G ; alpha * (grad_u g)_{not G}]|
///   r3 = alpha^2/2 |grad_u g|^2 + alpha*lambda*h(u) - Phi_{alpha*lambda}(u - alpha grad_u g)
/// r3 is nonnegative in exact arithmetic; values in [-1e-8, 0) are clamped
/// to zero and anything below signals a bug and throws.
ResidualTriple residuals(const Vector& grad_x, const Vector& grad_u, const Vector& u, const IndexSet& gamma,
                         double alpha, double lambda);

/// Distance from u to the (possibly two-valued) set Prox_{kappa h}(w).
double prox_set_distance(const Vector& u, const Vector& w, double kappa);

/// Violation of the first-order (P-stationarity) conditions:
/// max{ |grad f(x) + A^T y|, dist(u, Prox_{alpha lambda h}(u + alpha y)), |A x + b - u| }.
double foc_metric(const CompositeProblem& problem, const Vector& x, const Vector& u, const Vector& y, double alpha);

}  // namespace zeroone
