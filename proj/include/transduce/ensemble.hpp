#ifndef TRANSDUCE_ENSEMBLE_HPP
#define TRANSDUCE_ENSEMBLE_HPP

#include <vector>

#include "transduce/chain.hpp"
#include "transduce/scattering.hpp"

namespace transduce {

// Transduction mediated by two excited levels of an atomic ensemble:
// a <-> level 2 <-> level 3 <-> b, with N_A atoms contributing collectively.
struct EnsembleLevel {
    double detuning = 0.0;  // center of the level's frequency distribution
    double kappa = 0.0;     // homogeneous linewidth
    double gamma = 0.0;     // Lorentzian inhomogeneous FWHM
};

struct EnsembleSpec {
    ModeParams mode_a;  // external end modes and their couplings per atom
    ModeParams mode_b;
    int atom_count = 1;   // N_A
    double g_a = 0.0;     // bare per-atom coupling a <-> level 2
    double g_23 = 0.0;    // within-atom coupling level 2 <-> level 3
    double g_b = 0.0;     // bare per-atom coupling level 3 <-> b
    EnsembleLevel level2;
    EnsembleLevel level3;
    // Lorentzian tails are truncated at +-truncation * gamma for sampling.
    double truncation = 20.0;
};

// The collective-mode picture: a 2-stage chain with end couplings enhanced
// to sqrt(N_A) g and intermediate linewidths broadened to kappa + gamma.
TransducerChain collective_chain(const EnsembleSpec& spec);

// Equal-probability-mass quantile offsets of a centered Lorentzian with
// FWHM gamma, truncated at +-truncation*gamma. All zeros when gamma == 0.
std::vector<double> lorentzian_offsets(int count, double gamma, double truncation);

// Brute-force discretization: K sub-modes per level at Lorentzian quantile
// offsets, each link of the collective chain split evenly over the sub-mode
// endpoints (g/sqrt(K) to an end mode, g/K between levels, all-to-all).
CoupledModeNetwork discretized_ensemble(const EnsembleSpec& spec, int sub_modes);

// eta_total of the discretized network at omega (ports a_ex -> b_ex).
double discretized_ensemble_efficiency(const EnsembleSpec& spec, int sub_modes,
                                       double omega);

}  // namespace transduce

#endif  // TRANSDUCE_ENSEMBLE_HPP
