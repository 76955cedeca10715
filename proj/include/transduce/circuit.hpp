#ifndef TRANSDUCE_CIRCUIT_HPP
#define TRANSDUCE_CIRCUIT_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "transduce/chain.hpp"

namespace transduce {

struct DegenerateNetwork : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ElementKind { SeriesInductor, ShuntCapacitor };

// Type 1 starts with a series inductor, type 2 with a shunt capacitor.
enum class Topology : int { SeriesFirst = 1, ShuntFirst = 2 };

// One ladder element. For a series branch `reactive` is the inductance L,
// `r_*` are resistances and `gen_imag` is Im(R_gen) of the generalized
// resistance R_gen in i*R; for a shunt branch the same slots hold C,
// conductances, and Im(G_gen). Only end elements may have r_ex != 0.
struct CircuitElement {
    ElementKind kind = ElementKind::SeriesInductor;
    double reactive = 0.0;
    double r_ex = 0.0;
    double r_i = 0.0;
    double gen_imag = 0.0;

    double r_total() const { return r_ex + r_i; }
    // Bare immittance X_j(omega): impedance for series elements, admittance
    // for shunt elements; i*omega*reactive + r_total + i*gen_imag.
    Complex immittance(double omega) const {
        return {r_total(), omega * reactive + gen_imag};
    }
};

struct CircuitNetwork {
    Topology topology = Topology::SeriesFirst;
    std::vector<CircuitElement> elements;  // strict series/shunt alternation

    std::size_t size() const { return elements.size(); }
};

// Maps a chain onto the equivalent ladder network:
// reactive_{j+1} = 1/(g_j^2 reactive_j), r_j = kappa_j reactive_j / 2 (ends
// split by kappa_ex/kappa_i), gen_imag_j = Delta_j reactive_j. The mapping
// has one scale freedom per ladder, fixed by the first reactive value
// (`gauge`); transmission magnitudes are gauge independent.
CircuitNetwork synthesize(const TransducerChain& chain, Topology topology,
                          double gauge = 1.0);

// Inverts the defining relations; exact round-trip of synthesize().
TransducerChain chain_from_circuit(const CircuitNetwork& net);

// X_{j,eff}: element j's immittance dressed by everything towards the load,
// X_j + 1/(X_{j+1} + 1/(... + 1/X_{last})). Computed through the ladder
// subdeterminant recurrence; throws DegenerateNetwork on a pole.
Complex ladder_effective_immittance(const CircuitNetwork& net, std::size_t j,
                                    double omega);

struct PowerTransmission {
    Complex full{0.0, 0.0};      // t^p: external power-wave transmission
    Complex internal{0.0, 0.0};  // t^p_int: total end dissipations as ports
};

// |full|^2 equals eta_total of the source chain and |internal|^2 equals
// eta_internal, at every omega, topology, and gauge.
PowerTransmission power_transmission(const CircuitNetwork& net, double omega);

// Power-wave reflection at the source element against the rest of the
// ladder as the load, (X_L - X_S^*)/(X_L + X_S) in the source element's
// immittance convention. Zero at a conjugate-matched operating point.
Complex source_power_reflection(const CircuitNetwork& net, double omega);

// Impedance bookkeeping of the 1-stage Thevenin picture: Z1 = g_a^2 chi_a,
// Z2 = chi_2^{-1}, Z3 = g_b^2 chi_b. Diagnostic only.
struct TheveninReport {
    Complex z1, z2, z3;
};
TheveninReport thevenin_1stage(const TransducerChain& chain, double omega);

// Plain-text netlist: one element per line
//   kind reactive r_ex r_i gen_imag
// (resistances for series branches, conductances for shunt branches).
std::string to_netlist(const CircuitNetwork& net);

// The same content as a structured document:
// {"topology": 1|2, "elements": [{kind, reactive, r_ex, r_i, gen_imag}...]}.
// Stable format, shared by the CLI export.
nlohmann::json circuit_to_json(const CircuitNetwork& net);

}  // namespace transduce

#endif  // TRANSDUCE_CIRCUIT_HPP
