#include "transduce/scattering.hpp"

#include <cmath>

#include "transduce/matching.hpp"

namespace transduce {

namespace {

constexpr Complex kImag{0.0, 1.0};

// Tridiagonal dynamical matrix of the chain: diagonal chi_j^{-1}, off-diagonal
// -i g_j (couplings moved to the left-hand side of the Langevin equations).
Eigen::MatrixXcd dynamical_matrix(const TransducerChain& chain, double omega) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        T(j, j) = inverse_susceptibility(chain.modes[j], omega);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        T(j, j + 1) = -kImag * chain.couplings[j];
        T(j + 1, j) = T(j, j + 1);
    }
    return T;
}

Eigen::MatrixXcd invert_or_throw(const Eigen::MatrixXcd& T) {
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(T);
    if (!lu.isInvertible()) {
        // Identify the offending mode from the kernel's dominant component.
        Eigen::MatrixXcd kernel = lu.kernel();
        int worst = 0;
        double best = -1.0;
        for (Eigen::Index j = 0; j < kernel.rows(); ++j) {
            const double mag = std::abs(kernel(j, 0));
            if (mag > best) {
                best = mag;
                worst = static_cast<int>(j);
            }
        }
        throw SingularSystem("dynamical matrix is singular (zero-linewidth mode " +
                                 std::to_string(worst) + " decoupled at this frequency)",
                             worst);
    }
    return lu.inverse();
}

double product_g_squared(const TransducerChain& chain) {
    double p = 1.0;
    for (double g : chain.couplings) p *= g * g;
    return p;
}

}  // namespace

PortLayout PortLayout::for_chain(const TransducerChain& chain) {
    const int n = static_cast<int>(chain.size());
    PortLayout layout;
    auto add = [&](const std::string& label, int mode, double rate) {
        layout.labels.push_back(label);
        layout.mode_of_port.push_back(mode);
        layout.rate_of_port.push_back(rate);
    };
    add("a_ex", 0, chain.mode_a().kappa_external);
    add("A", 0, chain.mode_a().kappa_intrinsic);
    for (int j = 1; j + 1 < n; ++j)
        add("M" + std::to_string(j + 1), j, chain.modes[j].kappa_total());
    add("B", n - 1, chain.mode_b().kappa_intrinsic);
    add("b_ex", n - 1, chain.mode_b().kappa_external);
    layout.a_ex = 0;
    layout.a_env = 1;
    layout.b_env = static_cast<int>(layout.labels.size()) - 2;
    layout.b_ex = static_cast<int>(layout.labels.size()) - 1;
    return layout;
}

double external_efficiency(const TransducerChain& chain) {
    const ModeParams& a = chain.mode_a();
    const ModeParams& b = chain.mode_b();
    return (a.kappa_external / a.kappa_total()) * (b.kappa_external / b.kappa_total());
}

ScatteringResult scattering_matrix(const TransducerChain& chain, double omega) {
    const Eigen::MatrixXcd X = invert_or_throw(dynamical_matrix(chain, omega));
    const PortLayout ports = PortLayout::for_chain(chain);
    const auto p = static_cast<Eigen::Index>(ports.count());

    // Input-output relations: q_out = q_in - sqrt(kappa_q) m(q), with
    // m = X * (per-port drive sqrt(kappa_p)).
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(p, p);
    for (Eigen::Index out = 0; out < p; ++out) {
        const double rq = std::sqrt(ports.rate_of_port[out]);
        if (rq == 0.0) continue;
        for (Eigen::Index in = 0; in < p; ++in) {
            const double rp = std::sqrt(ports.rate_of_port[in]);
            if (rp == 0.0) continue;
            S(out, in) -= rq * rp * X(ports.mode_of_port[out], ports.mode_of_port[in]);
        }
    }

    ScatteringResult result;
    result.omega = omega;
    result.S = std::move(S);
    result.ports = ports;
    result.eta_total = std::norm(result.S(ports.b_ex, ports.a_ex));
    result.eta_external = external_efficiency(chain);
    result.eta_internal = result.eta_total / result.eta_external;
    const auto n = static_cast<Eigen::Index>(chain.size());
    result.r_a = 1.0 - chain.mode_a().kappa_total() * X(0, 0);
    result.r_b = 1.0 - chain.mode_b().kappa_total() * X(n - 1, n - 1);
    return result;
}

double efficiency_closed_form(const TransducerChain& chain, double omega) {
    const ComplexRate d = tridiagonal_determinant(chain, omega);
    const double num = chain.mode_a().kappa_external * chain.mode_b().kappa_external *
                       product_g_squared(chain);
    return num / std::norm(d);
}

double internal_efficiency_closed_form(const TransducerChain& chain, double omega) {
    const ComplexRate d = tridiagonal_determinant(chain, omega);
    const double num = chain.mode_a().kappa_total() * chain.mode_b().kappa_total() *
                       product_g_squared(chain);
    return num / std::norm(d);
}

std::pair<Complex, Complex> reflection_coefficients(const TransducerChain& chain,
                                                    double omega) {
    const std::size_t n = chain.size();
    const auto trail = trailing_determinants(chain, omega);
    const auto lead = leading_determinants(chain, omega);
    const ComplexRate d = lead[n];

    // r_a = (g_a^2 E_3 - (chi_a^{-1})^* E_2) / D with E_k the trailing blocks;
    // the denominator g_a^2 chi_{2,eff} + chi_a^{-1} times E_2 is exactly D.
    const ComplexRate chi_a = inverse_susceptibility(chain.mode_a(), omega);
    const double ga2 = chain.coupling_a() * chain.coupling_a();
    const Complex r_a = (ga2 * trail[2] - std::conj(chi_a) * trail[1]) / d;

    const ComplexRate chi_b = inverse_susceptibility(chain.mode_b(), omega);
    const double gb2 = chain.coupling_b() * chain.coupling_b();
    const Complex r_b = (gb2 * lead[n - 2] - std::conj(chi_b) * lead[n - 1]) / d;
    return {r_a, r_b};
}

AddedNoise added_noise(const TransducerChain& chain, double omega,
                       const PortOccupations& occ) {
    const ScatteringResult sc = scattering_matrix(chain, omega);
    const PortLayout& ports = sc.ports;
    const std::size_t n_mid = chain.size() - 2;

    std::vector<double> occ_by_port(ports.count(), 0.0);
    occ_by_port[ports.a_ex] = occ.a_ex;
    occ_by_port[ports.a_env] = occ.a_env;
    occ_by_port[ports.b_env] = occ.b_env;
    occ_by_port[ports.b_ex] = occ.b_ex;
    for (std::size_t j = 0; j < n_mid && j < occ.intermediate.size(); ++j)
        occ_by_port[2 + j] = occ.intermediate[j];

    auto referred_noise = [&](int out_port, int signal_port) {
        const double eta = std::norm(sc.S(out_port, signal_port));
        double flux = 0.0;
        for (std::size_t q = 0; q < ports.count(); ++q) {
            if (static_cast<int>(q) == signal_port) continue;
            flux += std::norm(sc.S(out_port, static_cast<Eigen::Index>(q))) * occ_by_port[q];
        }
        return flux / eta;
    };

    AddedNoise noise;
    noise.a_to_b = referred_noise(ports.b_ex, ports.a_ex);
    noise.b_to_a = referred_noise(ports.a_ex, ports.b_ex);
    noise.premise_ok = chain.lossless_intermediates() &&
                       matching_determinant(chain, omega).matched;
    return noise;
}

AddedNoise added_noise_closed_form(const TransducerChain& chain, double omega,
                                   const PortOccupations& occ) {
    const ModeParams& a = chain.mode_a();
    const ModeParams& b = chain.mode_b();
    const double ka = a.kappa_total(), ka_ex = a.kappa_external, ka_i = a.kappa_intrinsic;
    const double kb = b.kappa_total(), kb_ex = b.kappa_external, kb_i = b.kappa_intrinsic;

    AddedNoise noise;
    noise.a_to_b = (ka_i / ka_ex) * occ.a_env +
                   (ka / ka_ex) * (kb_i / kb) * occ.b_env +
                   (ka / ka_ex) * (kb / kb_ex) * (kb_i / kb) * (kb_i / kb) * occ.b_ex;
    noise.b_to_a = (kb_i / kb_ex) * occ.b_env +
                   (kb / kb_ex) * (ka_i / ka) * occ.a_env +
                   (kb / kb_ex) * (ka / ka_ex) * (ka_i / ka) * (ka_i / ka) * occ.a_ex;
    noise.premise_ok = chain.lossless_intermediates() &&
                       matching_determinant(chain, omega).matched;
    return noise;
}

void CoupledModeNetwork::validate() const {
    const auto n = static_cast<Eigen::Index>(size());
    if (coupling.rows() != n || coupling.cols() != n)
        throw InvalidRates("network: coupling matrix must be square of the mode count");
    if (decay.size() != size())
        throw InvalidRates("network: one decay channel list per mode required");
    for (Eigen::Index j = 0; j < n; ++j) {
        if (coupling(j, j) != 0.0)
            throw InvalidRates("network: coupling diagonal must be zero");
        for (Eigen::Index k = 0; k < n; ++k)
            if (coupling(j, k) != coupling(k, j))
                throw InvalidRates("network: coupling matrix must be symmetric");
    }
    for (const auto& channels : decay)
        for (const auto& ch : channels)
            if (!(ch.rate >= 0.0))
                throw InvalidRates("network: decay rates must be >= 0");
}

CoupledModeNetwork CoupledModeNetwork::from_chain(const TransducerChain& chain) {
    const std::size_t n = chain.size();
    CoupledModeNetwork net;
    net.detunings.resize(n);
    net.coupling = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                         static_cast<Eigen::Index>(n));
    net.decay.resize(n);
    for (std::size_t j = 0; j < n; ++j) net.detunings[j] = chain.modes[j].detuning;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        net.coupling(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + 1)) =
            chain.couplings[j];
        net.coupling(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j)) =
            chain.couplings[j];
    }
    const PortLayout ports = PortLayout::for_chain(chain);
    for (std::size_t p = 0; p < ports.count(); ++p)
        net.decay[ports.mode_of_port[p]].push_back({ports.rate_of_port[p], ports.labels[p]});
    return net;
}

NetworkScattering network_scattering(const CoupledModeNetwork& net, double omega) {
    net.validate();
    const auto n = static_cast<Eigen::Index>(net.size());

    std::vector<double> kappa_total(net.size(), 0.0);
    std::vector<std::string> labels;
    std::vector<int> port_mode;
    std::vector<double> port_rate;
    for (std::size_t m = 0; m < net.size(); ++m) {
        for (const auto& ch : net.decay[m]) {
            kappa_total[m] += ch.rate;
            labels.push_back(ch.label);
            port_mode.push_back(static_cast<int>(m));
            port_rate.push_back(ch.rate);
        }
    }

    Eigen::MatrixXcd T = -kImag * net.coupling.cast<Complex>();
    for (Eigen::Index j = 0; j < n; ++j)
        T(j, j) = Complex(kappa_total[j] / 2.0, omega + net.detunings[j]);

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(T);
    const Eigen::MatrixXcd X = lu.inverse();
    if (!X.allFinite()) {
        int worst = 0;
        double largest = -1.0;
        for (std::size_t m = 0; m < net.size(); ++m) {
            if (kappa_total[m] == 0.0 && largest < 0.0) worst = static_cast<int>(m);
        }
        throw SingularSystem("network dynamical matrix is singular at this frequency", worst);
    }

    const auto p = static_cast<Eigen::Index>(labels.size());
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(p, p);
    for (Eigen::Index out = 0; out < p; ++out) {
        const double rq = std::sqrt(port_rate[out]);
        if (rq == 0.0) continue;
        for (Eigen::Index in = 0; in < p; ++in) {
            const double rp = std::sqrt(port_rate[in]);
            if (rp == 0.0) continue;
            S(out, in) -= rq * rp * X(port_mode[out], port_mode[in]);
        }
    }

    NetworkScattering result;
    result.omega = omega;
    result.S = std::move(S);
    result.port_labels = std::move(labels);
    result.port_mode = std::move(port_mode);
    return result;
}

int NetworkScattering::port(const std::string& label) const {
    for (std::size_t p = 0; p < port_labels.size(); ++p)
        if (port_labels[p] == label) return static_cast<int>(p);
    throw InvalidRates("network has no port labelled '" + label + "'");
}

double network_efficiency(const CoupledModeNetwork& net, double omega,
                          const std::string& from, const std::string& to) {
    const NetworkScattering sc = network_scattering(net, omega);
    return std::norm(sc.S(sc.port(to), sc.port(from)));
}

}  // namespace transduce
