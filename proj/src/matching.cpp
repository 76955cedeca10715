#include "transduce/matching.hpp"

#include <algorithm>
#include <cmath>

#include "transduce/scattering.hpp"

namespace transduce {

namespace {

TransducerChain all_external_0stage(double kappa_a, double kappa_b, double g,
                                    double nu_a, double nu_b) {
    TransducerChain chain;
    chain.modes = {{nu_a, 0.0, kappa_a}, {nu_b, 0.0, kappa_b}};
    chain.couplings = {g};
    return chain;
}

}  // namespace

MatchingResidual matching_determinant(const TransducerChain& chain, double omega) {
    const std::size_t n = chain.size();
    const std::vector<double> nu = chain.frequencies_at(omega);

    // Pivots of the matching determinant: conjugated-negated first entry
    // (by flipping the sign pattern, which keeps the recurrence branch-free),
    // intermediate kappas overridden to zero, bare last entry.
    std::vector<ComplexRate> pivot(n);
    pivot[0] = ComplexRate(-chain.mode_a().kappa_total() / 2.0, nu[0]);
    for (std::size_t j = 1; j + 1 < n; ++j) pivot[j] = ComplexRate(0.0, nu[j]);
    pivot[n - 1] = ComplexRate(chain.mode_b().kappa_total() / 2.0, nu[n - 1]);

    ComplexRate prev2 = 1.0, prev1 = pivot[0];
    for (std::size_t k = 1; k < n; ++k) {
        const double g = chain.couplings[k - 1];
        const ComplexRate cur = pivot[k] * prev1 + g * g * prev2;
        prev2 = prev1;
        prev1 = cur;
    }

    MatchingResidual residual;
    residual.M = prev1;
    residual.resistance_part = prev1.real();
    residual.resonant_part = prev1.imag();
    residual.scale = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = std::abs(pivot[j]);
        if (j > 0) s = std::max(s, chain.couplings[j - 1]);
        if (j + 1 < n) s = std::max(s, chain.couplings[j]);
        residual.scale *= s;
    }
    residual.matched = std::abs(residual.M) <= kMatchedTolerance * residual.scale;
    return residual;
}

std::pair<Complex, Complex> impedance_residuals(const TransducerChain& chain,
                                                double omega) {
    const std::size_t n = chain.size();
    const Complex chi_a = inverse_susceptibility(chain.mode_a(), omega);
    const Complex chi_b = inverse_susceptibility(chain.mode_b(), omega);

    const ComplexRate chi2_eff = effective_susceptibility_fwd(chain, 1, omega);
    if (chi2_eff == ComplexRate(0.0, 0.0))
        throw DegenerateChain("impedance residual: effective susceptibility vanishes at mode 1");
    const double ga2 = chain.coupling_a() * chain.coupling_a();
    const Complex res_a = std::conj(chi_a) - ga2 / chi2_eff;

    const ComplexRate chiN1_eff_r = effective_susceptibility_rev(chain, n - 2, omega);
    if (chiN1_eff_r == ComplexRate(0.0, 0.0))
        throw DegenerateChain("impedance residual: reverse effective susceptibility vanishes");
    const double gb2 = chain.coupling_b() * chain.coupling_b();
    const Complex res_b = std::conj(chi_b) - gb2 / chiN1_eff_r;
    return {res_a, res_b};
}

std::vector<Complex> effective_cooperativities(const TransducerChain& chain,
                                               double omega) {
    const std::size_t n = chain.size();
    const auto lead = leading_determinants(chain, omega);
    const auto trail = trailing_determinants(chain, omega);

    std::vector<Complex> coop(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        // chi_{j,eff,r}^{-1} = lead[j+1]/lead[j]; chi_{j+1,eff}^{-1} =
        // trail[j+1]/trail[j+2].
        const Complex denom = std::conj(lead[j + 1] / lead[j]) * (trail[j + 1] / trail[j + 2]);
        if (!std::isfinite(denom.real()) || !std::isfinite(denom.imag()) ||
            denom == Complex(0.0, 0.0))
            throw DegenerateChain("effective cooperativity undefined at pair " +
                                  std::to_string(j));
        const double g = chain.couplings[j];
        coop[j] = g * g / denom;
    }
    return coop;
}

std::vector<MatchingSolution> solve_0stage(double kappa_a, double kappa_b, double g) {
    if (!(kappa_a > 0.0) || !(kappa_b > 0.0) || !(g > 0.0))
        throw InvalidRates("solve_0stage: kappa_a, kappa_b, g must be positive");

    const double coop = 4.0 * g * g / (kappa_a * kappa_b);
    std::vector<MatchingSolution> out;

    auto finish = [&](double nu_a, double nu_b, const std::string& branch) {
        const TransducerChain chain = all_external_0stage(kappa_a, kappa_b, g, nu_a, nu_b);
        MatchingSolution sol;
        sol.nu = {nu_a, nu_b};
        sol.branch = branch;
        sol.residual = matching_determinant(chain, 0.0);
        sol.eta_internal = internal_efficiency_closed_form(chain, 0.0);
        out.push_back(std::move(sol));
    };

    if (coop > 1.0) {
        const double root = std::sqrt(coop - 1.0);
        finish(+kappa_a / 2.0 * root, +kappa_b / 2.0 * root, "off_resonant+");
        finish(-kappa_a / 2.0 * root, -kappa_b / 2.0 * root, "off_resonant-");
    } else {
        finish(0.0, 0.0, "resonant");
    }
    return out;
}

MatchingSolution solve_1stage_lossless(double kappa_a, double kappa_b,
                                       double g_a, double g_b) {
    if (!(kappa_a > 0.0) || !(kappa_b > 0.0) || !(g_a > 0.0) || !(g_b > 0.0))
        throw InvalidRates("solve_1stage_lossless: all rates must be positive");

    // Family with nu_a = 0: Im M_1 = 0 gives nu_2 = 4 g_a^2 nu_b/(kappa_a kappa_b),
    // Re M_1 = 0 then requires nu_b^2 = kappa_b (kappa_a g_b^2 - kappa_b g_a^2)/(4 g_a^2).
    double nu_a = 0.0, nu_2 = 0.0, nu_b = 0.0;
    std::string branch;
    const double disc_b = kappa_b * (kappa_a * g_b * g_b - kappa_b * g_a * g_a) /
                          (4.0 * g_a * g_a);
    if (disc_b >= 0.0) {
        nu_b = std::sqrt(disc_b);
        nu_2 = 4.0 * g_a * g_a * nu_b / (kappa_a * kappa_b);
        branch = "nu_a_resonant";
    } else {
        // Mirrored family (nu_b = 0), guaranteed real when the first is not.
        const double disc_a = kappa_a * (kappa_b * g_a * g_a - kappa_a * g_b * g_b) /
                              (4.0 * g_b * g_b);
        nu_a = std::sqrt(disc_a);
        nu_2 = 4.0 * g_b * g_b * nu_a / (kappa_a * kappa_b);
        branch = "nu_b_resonant";
    }

    TransducerChain chain;
    chain.modes = {{nu_a, 0.0, kappa_a}, {nu_2, 0.0, 0.0}, {nu_b, 0.0, kappa_b}};
    chain.couplings = {g_a, g_b};

    MatchingSolution sol;
    sol.nu = {nu_a, nu_2, nu_b};
    sol.branch = branch;
    sol.residual = matching_determinant(chain, 0.0);
    sol.eta_internal = internal_efficiency_closed_form(chain, 0.0);
    return sol;
}

}  // namespace transduce
