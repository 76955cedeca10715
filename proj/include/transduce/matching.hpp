#ifndef TRANSDUCE_MATCHING_HPP
#define TRANSDUCE_MATCHING_HPP

#include <string>
#include <utility>
#include <vector>

#include "transduce/chain.hpp"

namespace transduce {

// Residual of the generalized N-stage matching condition M_N = 0:
// the tridiagonal determinant with first pivot -(chi_a^{-1})^* evaluated
// with every intermediate linewidth forced to zero. Re M_N = 0 is the
// resistance matching condition, Im M_N = 0 the resonant condition.
struct MatchingResidual {
    ComplexRate M{0.0, 0.0};
    double resistance_part = 0.0;  // Re M_N
    double resonant_part = 0.0;    // Im M_N
    bool matched = false;          // |M_N| <= tol * scale
    // Normalization: prod_j max(|pivot_j|, adjacent couplings), so the flag
    // is meaningful on ill-scaled chains.
    double scale = 1.0;
};

inline constexpr double kMatchedTolerance = 1e-9;

struct MatchingSolution {
    std::vector<double> nu;     // operating frequencies nu_j = omega + Delta_j
    double eta_internal = 0.0;  // recomputed through the scattering module
    std::string branch;
    MatchingResidual residual;
    bool boundary_tie = false;  // branch inequalities tied; resonant returned
    bool converged = true;      // numerical searches only
};

// Evaluates M_N[omega]. The caller's chain is not modified; the intermediate
// kappa override happens on the recurrence pivots only.
MatchingResidual matching_determinant(const TransducerChain& chain, double omega);

// ((chi_a^{-1})^* - g_a^2 chi_{2,eff}, (chi_b^{-1})^* - g_b^2 chi_{N+1,eff,r}):
// the impedance matching residuals seen from the a and b ports. For lossless
// intermediates each vanishing is equivalent to M_N = 0.
std::pair<Complex, Complex> impedance_residuals(const TransducerChain& chain,
                                                double omega);

// C^eff_{j,j+1} = g_j^2 / ((chi_{j,eff,r}^{-1})^* chi_{j+1,eff}^{-1}) for
// j = 0..N (0-based pair index). All equal 1 at a lossless matched point.
std::vector<Complex> effective_cooperativities(const TransducerChain& chain,
                                               double omega);

// Closed-form optimal frequencies for the 0-stage chain with all-external
// ends. C > 1: the two off-resonant branches with unity internal efficiency;
// C <= 1: the resonant solution with eta = 4C/(C+1)^2. eta_internal is always
// recomputed numerically.
std::vector<MatchingSolution> solve_0stage(double kappa_a, double kappa_b, double g);

// A matched solution of M_1 = 0 for the 1-stage chain with a lossless middle
// (kappa_2 = 0). One of the two closed-form families (nu_a = 0 or nu_b = 0)
// always admits a real solution; returns the one that does.
MatchingSolution solve_1stage_lossless(double kappa_a, double kappa_b,
                                       double g_a, double g_b);

}  // namespace transduce

#endif  // TRANSDUCE_MATCHING_HPP
