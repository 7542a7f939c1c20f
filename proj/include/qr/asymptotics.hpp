#pragma once

#include "qr/qkernel.hpp"
#include "qr/rational.hpp"

#include <optional>

namespace qr::asymptotics {

// ---------------------------------------------------------------------------
// Result types
// ---------------------------------------------------------------------------

// Value statistic: E ~ log_Q n + sigma_r (+ tiny periodic fluctuation).
struct ValueAsymptote {
    long r = 0;
    GeomModel model;
    BoundedValue sigma;
    Real prediction(long n) const; // log_Q n + sigma.estimate
};

// Position statistic: expected left-count ~ slope * n.
struct PositionAsymptote {
    long r = 0;
    BoundedValue slope; // strictly inside (0,1)
    GeomModel model;
};

// Rational constants of the permutation (q -> 1) limit model.
struct PermConstants {
    Rat lambda;                               // 2^{-r}
    Rat mu;                                   // 1 - 2^{-r}
    std::optional<Rat> predictedPositionPlusOne; // (n+1)/2^r when n given
};

enum class MellinKind { invQl, lQl };

// ---------------------------------------------------------------------------
// Constants for the value statistic
// ---------------------------------------------------------------------------

// sigma_r as a termwise-merged series: gamma/L + 1/2
// - sum_{j>=1} sum_{b=1}^{r-1} p^b q^{(j-1)b}/(1-q^j)^{b+1}.
// Error bound from the geometric ratio majorant (term_{j+1} <= q * term_j).
BoundedValue sigma(long r, const GeomModel& model, const PrecisionContext& ctx,
                   const MathConstants& constants);

// The j-th termwise-merged element of the three-sum display that sigma's
// published closed form consists of (kept separate because it disagrees with
// the merged series above for r >= 3; the `verify` command reports both).
Real sigmaPaperTermJ(long r, long j, const GeomModel& model);

// Full evaluation of that published three-sum display.
BoundedValue sigmaPaperForm(long r, const GeomModel& model, const PrecisionContext& ctx,
                            const MathConstants& constants);

// Slope of the value kernel extension at z = 0:
// beta_r = L (-1)^r sum_{b=1}^{r-1} (q/p)^{r-1-b} S_b,  S_b = sum_j q^{jb}/(1-q^j)^{b+1}.
BoundedValue beta(long r, const GeomModel& model, const PrecisionContext& ctx);

// The published two-sum display for beta_r (again differing for r >= 3).
BoundedValue betaPaperForm(long r, const GeomModel& model, const PrecisionContext& ctx);

// Analytic extension of the value kernel: F(z) = [x^{r-1}] G(x) D_z(x) with
// G = (((1-x)q;q)_inf - q x ((1-x)q^2;q)_inf)/(q;q)_inf and
// D_z = (q^{z+1};q)_inf / ((1-x)q^{z+1};q)_inf.  At nonnegative integers k it
// reproduces phi_r(k)/(1-q^k); F(0) = (-1)^{r-1}(q/p)^{r-1} and F'(0) = beta_r.
Real phiExtensionAtZ(long r, const Real& z, const GeomModel& model, const PrecisionContext& ctx);

// ---------------------------------------------------------------------------
// Constants for the position statistic
// ---------------------------------------------------------------------------

// psi_2(1) through the closed form consuming the two q-harmonic sums.
BoundedValue psi2At1(const GeomModel& model, const PrecisionContext& ctx);

// Analytic extension psi_r(z) (valid away from the poles at z = 0, 1), as the
// difference of the shifted and unshifted kernel series.  Supports r <= 3.
Real psiExtension(long r, const Real& z, const GeomModel& model, const PrecisionContext& ctx);

// Removable-singularity evaluation of psi_r at z0 in {0,1}: symmetric
// eps-pair averages (eps = 1e-3, 1e-4) plus one Richardson step; errBound is
// the observed extrapolation residual plus slack.  r >= 4 is rejected.
BoundedValue psiAtNumeric(long r, long z0, const GeomModel& model, const PrecisionContext& ctx);

// slope_r = (-1)^{r-1} (p/q)^r psi_r(1); r = 1 closed form, r = 2 via
// psi2At1, r = 3 via psiAtNumeric.
PositionAsymptote positionLeadingCoeff(long r, const GeomModel& model, const PrecisionContext& ctx);

// ---------------------------------------------------------------------------
// q -> 1 limits
// ---------------------------------------------------------------------------

// Truncated q -> 1 expansions of the two q-harmonic sums at q = e^{-t}:
//   invQl: -log(t)/t + gamma/t + 1/4        (error O(t))
//   lQl:   -log(t)/t^2 + (1+gamma)/t^2      (error O(1))
Real mellinReference(double t, MellinKind which);

// Closed form of lim_{q->1} (1-q) sigma_r for r >= 4:
// sum_{k=3}^{r-3} (r-1-k) zeta(k) + (r-1) zeta(2) + zeta(r-2) - zeta(r) - r(r-3)/2.
Real sigmaZetaLimit(long r, const MathConstants& constants);

// Permutation-limit constants lambda_r = 2^{-r}, mu_r = 1 - 2^{-r}, and the
// exact average position + 1 = (n+1)/2^r when n is supplied.
PermConstants permutationConstants(long r, std::optional<long> n = std::nullopt);

} // namespace qr::asymptotics
