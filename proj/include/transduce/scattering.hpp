#ifndef TRANSDUCE_SCATTERING_HPP
#define TRANSDUCE_SCATTERING_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "transduce/chain.hpp"

namespace transduce {

// The frequency-domain Langevin system is exactly singular at this omega
// (reachable only through zero-linewidth modes decoupled from every port).
struct SingularSystem : std::runtime_error {
    int mode_index;
    SingularSystem(const std::string& what, int mode)
        : std::runtime_error(what), mode_index(mode) {}
};

// Port bookkeeping for a chain: one input/output channel per decay channel,
// in the fixed order a_ex, A (a's environment), M_2..M_{N+1}, B, b_ex.
// Channels with zero rate keep their slot (identity rows of S), so the
// layout has N+4 ports for every N-stage chain.
struct PortLayout {
    std::vector<std::string> labels;
    std::vector<int> mode_of_port;
    std::vector<double> rate_of_port;
    int a_ex = 0, a_env = 1, b_env = -1, b_ex = -1;

    static PortLayout for_chain(const TransducerChain& chain);
    std::size_t count() const { return labels.size(); }
};

struct ScatteringResult {
    double omega = 0.0;
    Eigen::MatrixXcd S;  // ports x ports, S(out, in)
    PortLayout ports;
    double eta_total = 0.0;
    double eta_internal = 0.0;
    double eta_external = 0.0;
    Complex r_a{0.0, 0.0};  // internal reflection coefficient at the a side
    Complex r_b{0.0, 0.0};
};

// eta_ext = kappa_a,ex kappa_b,ex / (kappa_a kappa_b)
double external_efficiency(const TransducerChain& chain);

// Full input-output scattering matrix at omega via a dense linear solve of
// the Langevin system (unit drive per port); the reference path everything
// else is checked against.
ScatteringResult scattering_matrix(const TransducerChain& chain, double omega);

// eta_N[omega] through the division-free determinant recurrence:
// kappa_a,ex kappa_b,ex prod g_j^2 / |D_N|^2.
double efficiency_closed_form(const TransducerChain& chain, double omega);

// eta_{N,int}[omega] = eta_N / eta_ext = kappa_a kappa_b prod g_j^2 / |D_N|^2.
double internal_efficiency_closed_form(const TransducerChain& chain, double omega);

// (r_{N,a}, r_{N,b}): internal reflection coefficients,
// r_a = (g_a^2 chi_{2,eff} - (chi_a^{-1})^*) / (g_a^2 chi_{2,eff} + chi_a^{-1})
// and the mirrored expression at b.
std::pair<Complex, Complex> reflection_coefficients(const TransducerChain& chain,
                                                    double omega);

// Mean photon numbers incident on each port (vacuum by default).
// `intermediate` entries follow the M_2..M_{N+1} port order and only enter
// the full-scattering path.
struct PortOccupations {
    double a_ex = 0.0;
    double a_env = 0.0;
    double b_env = 0.0;
    double b_ex = 0.0;
    std::vector<double> intermediate;
};

struct AddedNoise {
    double a_to_b = 0.0;  // referred to the input of the a -> b conversion
    double b_to_a = 0.0;
    // True when the chain satisfies the closed forms' premise at this omega:
    // lossless intermediates and generalized matching.
    bool premise_ok = true;
};

// Added noise from the full scattering matrix: output photon flux at the far
// external port divided by the conversion efficiency, minus the signal term.
AddedNoise added_noise(const TransducerChain& chain, double omega,
                       const PortOccupations& occ);

// The matched, lossless-intermediate closed forms (three occupation terms
// weighted by kappa ratios). Evaluating off-premise is allowed but flagged
// via premise_ok = false.
AddedNoise added_noise_closed_form(const TransducerChain& chain, double omega,
                                   const PortOccupations& occ);

// --- Generic coupled-mode network (the brute-force oracle) ----------------

struct DecayChannel {
    double rate = 0.0;
    std::string label;
};

// M linearly coupled bosonic modes with arbitrary symmetric coupling graph;
// a TransducerChain embeds as the tridiagonal special case.
struct CoupledModeNetwork {
    std::vector<double> detunings;
    Eigen::MatrixXd coupling;                      // symmetric, zero diagonal
    std::vector<std::vector<DecayChannel>> decay;  // per-mode channel list

    std::size_t size() const { return detunings.size(); }
    void validate() const;

    static CoupledModeNetwork from_chain(const TransducerChain& chain);
};

struct NetworkScattering {
    double omega = 0.0;
    Eigen::MatrixXcd S;
    std::vector<std::string> port_labels;
    std::vector<int> port_mode;

    int port(const std::string& label) const;
};

NetworkScattering network_scattering(const CoupledModeNetwork& net, double omega);

// |S(to, from)|^2 between two labelled ports.
double network_efficiency(const CoupledModeNetwork& net, double omega,
                          const std::string& from, const std::string& to);

}  // namespace transduce

#endif  // TRANSDUCE_SCATTERING_HPP
