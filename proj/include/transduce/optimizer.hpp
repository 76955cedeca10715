#ifndef TRANSDUCE_OPTIMIZER_HPP
#define TRANSDUCE_OPTIMIZER_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "transduce/chain.hpp"
#include "transduce/matching.hpp"

namespace transduce {

struct OptimizerConfig {
    int starts = 16;           // multi-start budget
    int max_iterations = 400;  // simplex iterations per start
    std::uint64_t seed = 0;
    // Converged when a full restart round improves eta by less than this.
    double eta_improvement_tol = 1e-10;
    int polish_restarts = 6;
    // |nu_j| > threshold * kappa-scale counts as off-resonant when labelling.
    double resonance_threshold = 1e-6;
};

// Maximize eta_internal over the operating frequencies nu_j of a fixed
// chain (kappas and couplings are hardware, frequencies are tunable).
// The chain's detunings provide the initial/pinned nu values.
struct OptimizationProblem {
    TransducerChain chain;
    std::vector<bool> pinned;  // empty means all free
    OptimizerConfig config;
};

// Derivative-free simplex search with deterministic multi-start seeding
// (all-resonant, closed-form branches for N <= 2, seeded random starts)
// plus a matching-determinant Newton polish on lossless-intermediate chains.
// Never throws on exhausted budget: `converged` is false and the best point
// found is still returned.
MatchingSolution optimize_general(const OptimizationProblem& problem);

// Closed-form optimum for the lossy 1-stage chain at given cooperativities
// C_{a,2} = 4 g_a^2/(kappa_a kappa_2), C_{2,b} = 4 g_b^2/(kappa_2 kappa_b).
// Branches: b over-coupled (C_{a,2}+1 < C_{2,b}), all-resonant
// (|C_{a,2}-C_{2,b}| <= 1), a over-coupled (C_{a,2} > C_{2,b}+1).
// kappa_2 = 0 delegates to solve_1stage_lossless.
MatchingSolution optimal_1stage(double c_a2, double c_2b, double kappa_a,
                                double kappa_2, double kappa_b);

// Closed-form optimum for the lossy 2-stage chain; kappas = {kappa_a,
// kappa_2, kappa_3, kappa_b}, all positive. Exact boundary ties return the
// resonant branch with boundary_tie set.
MatchingSolution optimal_2stage(double c_a2, double c_23, double c_3b,
                                const std::array<double, 4>& kappas);

// Dispatches on the chain shape: closed forms for N <= 2 including the
// partially lossless rows (kappa_2 = 0 and/or kappa_3 = 0), numerical
// search otherwise.
MatchingSolution optimal_closed_form(const TransducerChain& chain);

struct PhaseDiagramCell {
    double c1 = 0.0, c2 = 0.0;  // cooperativity coordinates
    std::string region;          // "resonant" or comma-joined off-resonant nus
    double eta_max = 0.0;
    std::vector<double> nu;
};

struct PhaseDiagramSpec {
    int stages = 0;  // 0, 1, or 2
    double c1_min = 0.25, c1_max = 4.0;
    int c1_steps = 50;
    double c2_min = 0.25, c2_max = 4.0;
    int c2_steps = 50;       // ignored for 0-stage scans
    double c_23 = 8.0;       // fixed middle cooperativity for 2-stage maps
    double resonance_threshold = 1e-6;
};

// Cooperativity-space map of the closed-form optimum (kappas normalized
// to 1); cells in row-major order over (c1, c2).
std::vector<PhaseDiagramCell> phase_diagram(const PhaseDiagramSpec& spec);

// Label helper shared with the CLI: which nu_j are off resonance.
std::string region_label(const TransducerChain& chain, const std::vector<double>& nu,
                         double threshold);

}  // namespace transduce

#endif  // TRANSDUCE_OPTIMIZER_HPP
