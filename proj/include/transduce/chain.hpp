#ifndef TRANSDUCE_CHAIN_HPP
#define TRANSDUCE_CHAIN_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace transduce {

using Complex = std::complex<double>;

// Complex quantity in units of rate (inverse susceptibilities, determinants,
// impedances expressed in rate units). All rates in the toolkit share one
// arbitrary user-chosen unit; nothing here ever converts units.
using ComplexRate = Complex;

// Thrown when a continued-fraction evaluation hits a genuine pole
// (exact-zero partial denominator that the determinant fallback cannot
// resolve either).
struct DegenerateChain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Cooperativity is undefined when a total linewidth vanishes.
struct ZeroLinewidth : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidRates : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// One bosonic mode of the chain, in the rotating frame.
struct ModeParams {
    double detuning = 0.0;         // Delta_j
    double kappa_intrinsic = 0.0;  // kappa_{j,i} >= 0
    double kappa_external = 0.0;   // kappa_{j,ex} >= 0, end modes only

    double kappa_total() const { return kappa_intrinsic + kappa_external; }
};

// The N-stage transduction chain: N+2 modes coupled in a line, with the two
// end modes (a = modes.front(), b = modes.back()) coupled to external
// channels. couplings[j] is the rate g_j between modes j and j+1.
//
// Mode indices are 0-based throughout the API: mode 0 is a, mode size()-1
// is b, modes 1..size()-2 are the intermediate stages.
struct TransducerChain {
    std::vector<ModeParams> modes;
    std::vector<double> couplings;
    // A chain with some g_j == 0 is not a conversion chain; it is accepted
    // only when this flag is set (used by degenerate/limit tests).
    bool allow_degenerate = false;

    std::size_t size() const { return modes.size(); }
    int stages() const { return static_cast<int>(modes.size()) - 2; }

    const ModeParams& mode_a() const { return modes.front(); }
    const ModeParams& mode_b() const { return modes.back(); }
    double coupling_a() const { return couplings.front(); }
    double coupling_b() const { return couplings.back(); }

    bool lossless_intermediates() const;

    TransducerChain reversed() const;

    // nu_j = omega + Delta_j for every mode.
    std::vector<double> frequencies_at(double omega) const;

    // Same chain re-expressed with detunings Delta_j := nu_j, to be queried
    // at omega = 0. This is the direct-nu entry point: by the identity
    // nu_j = omega + Delta_j, evaluating any response of the returned chain
    // at omega = 0 equals evaluating this chain where omega + Delta_j = nu_j.
    TransducerChain with_frequencies(const std::vector<double>& nu) const;
};

// Validates and normalizes a chain:
//  - at least two modes, couplings.size() == modes.size() - 1
//  - all kappa >= 0; kappa_external > 0 on both ends and zero elsewhere
//  - g_j < 0 is folded to |g_j| (efficiency depends on g_j^2 only); a note
//    is appended to *warnings when provided
//  - g_j == 0 requires allow_degenerate
// Throws InvalidRates with a field-precise message otherwise.
TransducerChain make_chain(std::vector<ModeParams> modes,
                           std::vector<double> couplings,
                           bool allow_degenerate = false,
                           std::vector<std::string>* warnings = nullptr);

// chi_j^{-1}(omega) = i (omega + Delta_j) + kappa_j / 2
ComplexRate inverse_susceptibility(const ModeParams& mode, double omega);

// Same quantity from nu = omega + Delta directly.
ComplexRate inverse_susceptibility_nu(double nu, double kappa);

// lead[k], k = 0..n: determinant of the leading k x k block of the chain's
// tridiagonal matrix (diagonal chi_j^{-1}, off-diagonal i g_j). lead[0] = 1.
// Division-free three-term recurrence: lead[k] = chi_{k-1}^{-1} lead[k-1]
// + g_{k-2}^2 lead[k-2].
std::vector<ComplexRate> leading_determinants(const TransducerChain& chain,
                                              double omega);

// trail[k], k = 0..n+1: determinant of the trailing block over modes
// k..n-1. trail[n] = 1 and trail[n+1] = 0 are recurrence sentinels.
std::vector<ComplexRate> trailing_determinants(const TransducerChain& chain,
                                               double omega);

// D_N[omega]: determinant of the full (N+2)-dimensional tridiagonal matrix.
ComplexRate tridiagonal_determinant(const TransducerChain& chain, double omega);

// chi_{j,eff}^{-1}: mode j dressed by everything towards b,
// chi_j^{-1} + g_j^2 / (chi_{j+1}^{-1} + g_{j+1}^2 / (... + g_b^2 / chi_b^{-1})).
// Evaluated through the subdeterminant ratio trail[j]/trail[j+1], which is the
// continued fraction wherever that is defined and remains finite across
// cancelling inner zeros. Throws DegenerateChain on a genuine pole.
ComplexRate effective_susceptibility_fwd(const TransducerChain& chain,
                                         std::size_t j, double omega);

// chi_{j,eff,r}^{-1}: mode j dressed by everything towards a.
ComplexRate effective_susceptibility_rev(const TransducerChain& chain,
                                         std::size_t j, double omega);

// C_{j,j+1} = 4 g_j^2 / (kappa_j kappa_{j+1}), 0-based pair index j.
// Throws ZeroLinewidth when either total linewidth is zero.
double cooperativity(const TransducerChain& chain, std::size_t j);

}  // namespace transduce

#endif  // TRANSDUCE_CHAIN_HPP
