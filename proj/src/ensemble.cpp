#include "transduce/ensemble.hpp"

#include <cmath>

namespace transduce {

namespace {

void validate(const EnsembleSpec& spec) {
    if (spec.atom_count < 1)
        throw InvalidRates("ensemble: atom_count must be >= 1");
    if (!(spec.g_a > 0.0) || !(spec.g_23 > 0.0) || !(spec.g_b > 0.0))
        throw InvalidRates("ensemble: couplings must be positive");
    if (spec.level2.gamma < 0.0 || spec.level3.gamma < 0.0)
        throw InvalidRates("ensemble: inhomogeneous widths must be >= 0");
    if (spec.level2.kappa < 0.0 || spec.level3.kappa < 0.0)
        throw InvalidRates("ensemble: homogeneous linewidths must be >= 0");
    if (!(spec.truncation > 0.0))
        throw InvalidRates("ensemble: truncation must be positive");
}

}  // namespace

TransducerChain collective_chain(const EnsembleSpec& spec) {
    validate(spec);
    const double root_n = std::sqrt(static_cast<double>(spec.atom_count));
    TransducerChain chain;
    chain.modes = {spec.mode_a,
                   {spec.level2.detuning, spec.level2.kappa + spec.level2.gamma, 0.0},
                   {spec.level3.detuning, spec.level3.kappa + spec.level3.gamma, 0.0},
                   spec.mode_b};
    chain.couplings = {root_n * spec.g_a, spec.g_23, root_n * spec.g_b};
    return chain;
}

std::vector<double> lorentzian_offsets(int count, double gamma, double truncation) {
    if (count < 1) throw InvalidRates("lorentzian_offsets: count must be >= 1");
    std::vector<double> offsets(count, 0.0);
    if (gamma == 0.0) return offsets;

    // CDF of a centered Lorentzian with FWHM gamma:
    // F(x) = 1/2 + atan(2x/gamma)/pi; quantiles at equal-mass midpoints of
    // the truncated window.
    const double half = gamma / 2.0;
    const double p_lo = 0.5 + std::atan(-truncation * gamma / half) / M_PI;
    const double p_hi = 0.5 + std::atan(+truncation * gamma / half) / M_PI;
    for (int k = 0; k < count; ++k) {
        const double p = p_lo + (p_hi - p_lo) * (k + 0.5) / count;
        offsets[k] = half * std::tan(M_PI * (p - 0.5));
    }
    return offsets;
}

CoupledModeNetwork discretized_ensemble(const EnsembleSpec& spec, int sub_modes) {
    validate(spec);
    if (sub_modes < 1) throw InvalidRates("ensemble: sub_modes must be >= 1");

    const int k = sub_modes;
    const std::size_t n = static_cast<std::size_t>(2 * k) + 2;
    const double root_n = std::sqrt(static_cast<double>(spec.atom_count));
    const double g_end2 = root_n * spec.g_a / std::sqrt(static_cast<double>(k));
    const double g_end3 = root_n * spec.g_b / std::sqrt(static_cast<double>(k));
    const double g_mid = spec.g_23 / static_cast<double>(k);

    const auto off2 = lorentzian_offsets(k, spec.level2.gamma, spec.truncation);
    const auto off3 = lorentzian_offsets(k, spec.level3.gamma, spec.truncation);

    CoupledModeNetwork net;
    net.detunings.resize(n);
    net.coupling = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                         static_cast<Eigen::Index>(n));
    net.decay.resize(n);

    const int a = 0;
    const int b = static_cast<int>(n) - 1;
    net.detunings[a] = spec.mode_a.detuning;
    net.detunings[b] = spec.mode_b.detuning;
    net.decay[a] = {{spec.mode_a.kappa_external, "a_ex"},
                    {spec.mode_a.kappa_intrinsic, "A"}};
    net.decay[b] = {{spec.mode_b.kappa_intrinsic, "B"},
                    {spec.mode_b.kappa_external, "b_ex"}};

    for (int i = 0; i < k; ++i) {
        const int m2 = 1 + i;
        const int m3 = 1 + k + i;
        net.detunings[m2] = spec.level2.detuning + off2[i];
        net.detunings[m3] = spec.level3.detuning + off3[i];
        net.decay[m2] = {{spec.level2.kappa, "M2_" + std::to_string(i)}};
        net.decay[m3] = {{spec.level3.kappa, "M3_" + std::to_string(i)}};
        net.coupling(a, m2) = net.coupling(m2, a) = g_end2;
        net.coupling(m3, b) = net.coupling(b, m3) = g_end3;
        for (int j = 0; j < k; ++j) {
            const int other = 1 + k + j;
            net.coupling(m2, other) = net.coupling(other, m2) = g_mid;
        }
    }
    return net;
}

double discretized_ensemble_efficiency(const EnsembleSpec& spec, int sub_modes,
                                       double omega) {
    const CoupledModeNetwork net = discretized_ensemble(spec, sub_modes);
    return network_efficiency(net, omega, "a_ex", "b_ex");
}

}  // namespace transduce
