#pragma once

// Rigid-motion projections and the constant estimators: Gram matrices of
// the three quadratic forms over a mode basis, Rayleigh-quotient
// eigenvalue estimates (p = 2), sampled lower bounds for general p, and
// the Galerkin solve of the bond-based energy minimization.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "fracorn/fields.hpp"
#include "fracorn/grid.hpp"
#include "fracorn/seminorms.hpp"

namespace fracorn {

// Quadratic forms of a basis at p = 2: W is the Gagliardo bilinear form,
// X the projected one (same singular weight, directional differences),
// M the L2 mass matrix.  All exactly symmetric by construction.
struct GramForms {
  BasisSet basis;
  Eigen::MatrixXd W;
  Eigen::MatrixXd X;
  Eigen::MatrixXd M;
  double h = 0.0;
  double s = 0.5;
  int refine_depth = 4;
};

struct ConstantEstimate {
  std::string name;              // C1 | C2 | KornPoincare | Hardy | ExtNorm
  double value = 0.0;
  double h = 0.0;
  int degree = 0;                // basis degree K
  std::string method;            // eig | irls | random-search
  double error_indicator = 0.0;  // change under refinement when a caller measured one
};

// ----------------------------------------------------------- projections --
struct RigidFit {
  RigidMotion r;
  double residual = 0.0;  // ||u - r||_{L^p}
  bool converged = true;
  int iterations = 0;
};
// p = 2: exact least squares over the skew + translation coefficients;
// other p: iteratively reweighted least squares on the same coefficients
// (tolerance 1e-8 on the coefficient step, at most 200 rounds, step
// halved once whenever the objective would increase).
RigidFit rigid_project_lp(const VectorField& u, const Grid& grid, double p);

struct SkewFit {
  RigidMotion r;          // b = 0; only the skew part matters
  double value = 0.0;     // inf over rigid motions of |u - r|_{W^{s,p}}
  bool converged = true;
  int iterations = 0;
};
// Translations cancel in the seminorm, so only the rotation coefficients
// are optimized: closed form at p = 2 via the polarized bilinear form,
// descent with finite-difference gradients otherwise.
SkewFit rigid_project_seminorm(const VectorField& u, const Grid& grid, const FracParams& par);

// ------------------------------------------------------------- assembly --
// One quadrature sweep fills W and X for an arbitrary field list.
void assemble_pair_forms(const std::vector<VectorField>& fields, const Grid& grid, double s,
                         int refine_depth, Eigen::MatrixXd& W_out, Eigen::MatrixXd& X_out);

// Full Gram assembly for a mode basis (fast structural evaluation of the
// cosine modes); rejects a basis whose mass matrix condition number
// exceeds 1e12.
GramForms assemble_gram(const BasisSet& basis, const Grid& grid, double s, int refine_depth = 4);

// Largest lam with A v = lam B v, B symmetric positive definite.
double max_generalized_eig(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// ------------------------------------------------------------ estimates --
// |u|_W^2 <= C2 ([u]_X^2 + ||u||_2^2): method "eig" returns the largest
// generalized eigenvalue over the span; "random-search" the best of
// 'samples' random unit coefficient vectors (a lower bound of the same
// quotient, labeled by its method).
ConstantEstimate estimate_korn2_constant(const GramForms& forms, const std::string& method = "eig",
                                         int samples = 1000, uint64_t seed = 20260822ull);
// Sampled lower bound of the p-power quotient for general p, each sample
// evaluated by direct quadrature on the grid.
ConstantEstimate korn2_lower_bound_lp(const BasisSet& basis, const Grid& grid,
                                      const FracParams& par, int samples, uint64_t seed);

// inf_r |u-r|_W^2 <= C1 [u]_X^2 on the rigid-deflated span; the maximizer
// is returned in full-basis coordinates for direct re-evaluation.
struct Korn1Result {
  ConstantEstimate estimate;
  Eigen::VectorXd top_coefs;
};
Korn1Result estimate_korn1_constant(const GramForms& forms);

// min_r ||u-r||_2 <= C [u]_X: value is the norm ratio (square root of the
// eigenvalue), which scales like tau^s on a cube of half-side tau.
ConstantEstimate korn_poincare_constant(const GramForms& forms);

// -------------------------------------------------------------- Galerkin --
struct PeridynamicSolution {
  VectorField u;
  Eigen::VectorXd coefs;
  std::vector<VectorField> constrained;  // cutoff-multiplied basis actually used
  Eigen::MatrixXd G;                     // projected-form Gram on that span
  Eigen::VectorXd load;                  // b_i = int f . psi_i
  double energy = 0.0;                   // c'Gc - b'c at the minimizer
  double residual = 0.0;                 // |Gc - b/2| / |b/2|
};
// Minimize [u]_X^2 - int f.u over span{chi*phi_i}: the cutoff chi must
// vanish on omega (checked on samples), and a rigid direction surviving
// in the constrained span is a constraint violation.
PeridynamicSolution solve_peridynamic(const VectorField& fext, const Domain& omega,
                                      const CutoffFn& chi, const BasisSet& basis,
                                      const Grid& grid, double s, int refine_depth = 4);

}  // namespace fracorn
