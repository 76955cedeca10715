#include "transduce/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace transduce {

namespace {

std::string field(const char* name, std::size_t index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s[%zu]", name, index);
    return buf;
}

}  // namespace

bool TransducerChain::lossless_intermediates() const {
    for (std::size_t j = 1; j + 1 < modes.size(); ++j) {
        if (modes[j].kappa_total() != 0.0) return false;
    }
    return true;
}

TransducerChain TransducerChain::reversed() const {
    TransducerChain rev = *this;
    std::reverse(rev.modes.begin(), rev.modes.end());
    std::reverse(rev.couplings.begin(), rev.couplings.end());
    return rev;
}

std::vector<double> TransducerChain::frequencies_at(double omega) const {
    std::vector<double> nu(modes.size());
    for (std::size_t j = 0; j < modes.size(); ++j) nu[j] = omega + modes[j].detuning;
    return nu;
}

TransducerChain TransducerChain::with_frequencies(const std::vector<double>& nu) const {
    if (nu.size() != modes.size())
        throw InvalidRates("with_frequencies: nu vector length must equal mode count");
    TransducerChain shifted = *this;
    for (std::size_t j = 0; j < modes.size(); ++j) shifted.modes[j].detuning = nu[j];
    return shifted;
}

TransducerChain make_chain(std::vector<ModeParams> modes,
                           std::vector<double> couplings,
                           bool allow_degenerate,
                           std::vector<std::string>* warnings) {
    if (modes.size() < 2)
        throw InvalidRates("modes: a chain needs at least the two end modes");
    if (couplings.size() != modes.size() - 1)
        throw InvalidRates("couplings: expected " + std::to_string(modes.size() - 1) +
                           " entries for " + std::to_string(modes.size()) +
                           " modes, got " + std::to_string(couplings.size()));

    for (std::size_t j = 0; j < modes.size(); ++j) {
        const ModeParams& m = modes[j];
        if (!(m.kappa_intrinsic >= 0.0) || !std::isfinite(m.kappa_intrinsic))
            throw InvalidRates(field("modes", j) + ".kappa_i must be finite and >= 0");
        if (!(m.kappa_external >= 0.0) || !std::isfinite(m.kappa_external))
            throw InvalidRates(field("modes", j) + ".kappa_ex must be finite and >= 0");
        if (!std::isfinite(m.detuning))
            throw InvalidRates(field("modes", j) + ".detuning must be finite");
        const bool is_end = (j == 0 || j + 1 == modes.size());
        if (is_end && m.kappa_external <= 0.0)
            throw InvalidRates(field("modes", j) + ".kappa_ex: end modes must couple externally");
        if (!is_end && m.kappa_external != 0.0)
            throw InvalidRates(field("modes", j) + ".kappa_ex: only end modes may couple externally");
    }

    for (std::size_t j = 0; j < couplings.size(); ++j) {
        double& g = couplings[j];
        if (!std::isfinite(g))
            throw InvalidRates(field("couplings", j) + " must be finite");
        if (g < 0.0) {
            g = -g;
            if (warnings)
                warnings->push_back(field("couplings", j) +
                                    " was negative; using |g| (efficiency depends on g^2 only)");
        }
        if (g == 0.0 && !allow_degenerate)
            throw InvalidRates(field("couplings", j) +
                               " is zero; a conversion chain requires g > 0 "
                               "(set the degenerate flag to allow this)");
    }

    TransducerChain chain;
    chain.modes = std::move(modes);
    chain.couplings = std::move(couplings);
    chain.allow_degenerate = allow_degenerate;
    return chain;
}

ComplexRate inverse_susceptibility(const ModeParams& mode, double omega) {
    return {mode.kappa_total() / 2.0, omega + mode.detuning};
}

ComplexRate inverse_susceptibility_nu(double nu, double kappa) {
    return {kappa / 2.0, nu};
}

std::vector<ComplexRate> leading_determinants(const TransducerChain& chain, double omega) {
    const std::size_t n = chain.size();
    std::vector<ComplexRate> lead(n + 1);
    lead[0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        lead[k] = inverse_susceptibility(chain.modes[k - 1], omega) * lead[k - 1];
        if (k >= 2) {
            const double g = chain.couplings[k - 2];
            lead[k] += g * g * lead[k - 2];
        }
    }
    return lead;
}

std::vector<ComplexRate> trailing_determinants(const TransducerChain& chain, double omega) {
    const std::size_t n = chain.size();
    std::vector<ComplexRate> trail(n + 2);
    trail[n + 1] = 0.0;
    trail[n] = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        trail[k] = inverse_susceptibility(chain.modes[k], omega) * trail[k + 1];
        if (k + 1 < n) {
            const double g = chain.couplings[k];
            trail[k] += g * g * trail[k + 2];
        }
    }
    return trail;
}

ComplexRate tridiagonal_determinant(const TransducerChain& chain, double omega) {
    return leading_determinants(chain, omega).back();
}

ComplexRate effective_susceptibility_fwd(const TransducerChain& chain,
                                         std::size_t j, double omega) {
    const std::size_t n = chain.size();
    if (j >= n) throw InvalidRates("effective_susceptibility_fwd: mode index out of range");
    if (j + 1 == n) return inverse_susceptibility(chain.modes[j], omega);
    // Truncated fraction: nothing deeper enters when the next coupling is off.
    if (chain.couplings[j] == 0.0) return inverse_susceptibility(chain.modes[j], omega);

    const auto trail = trailing_determinants(chain, omega);
    if (trail[j + 1] == ComplexRate(0.0, 0.0))
        throw DegenerateChain("effective susceptibility has a pole at mode " +
                              std::to_string(j) + " for this frequency");
    return trail[j] / trail[j + 1];
}

ComplexRate effective_susceptibility_rev(const TransducerChain& chain,
                                         std::size_t j, double omega) {
    const std::size_t n = chain.size();
    if (j >= n) throw InvalidRates("effective_susceptibility_rev: mode index out of range");
    if (j == 0) return inverse_susceptibility(chain.modes[0], omega);
    if (chain.couplings[j - 1] == 0.0) return inverse_susceptibility(chain.modes[j], omega);

    const auto lead = leading_determinants(chain, omega);
    if (lead[j] == ComplexRate(0.0, 0.0))
        throw DegenerateChain("reverse effective susceptibility has a pole at mode " +
                              std::to_string(j) + " for this frequency");
    return lead[j + 1] / lead[j];
}

double cooperativity(const TransducerChain& chain, std::size_t j) {
    if (j + 1 >= chain.size())
        throw InvalidRates("cooperativity: pair index out of range");
    const double kj = chain.modes[j].kappa_total();
    const double kj1 = chain.modes[j + 1].kappa_total();
    if (kj == 0.0 || kj1 == 0.0)
        throw ZeroLinewidth("cooperativity undefined: total linewidth of mode " +
                            std::to_string(kj == 0.0 ? j : j + 1) + " is zero");
    const double g = chain.couplings[j];
    return 4.0 * g * g / (kj * kj1);
}

}  // namespace transduce
