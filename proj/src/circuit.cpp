#include "transduce/circuit.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace transduce {

namespace {

// Ladder subdeterminants: P[j] = X_j P[j+1] + P[j+2] with P[n] = 1,
// P[n+1] = 0; the effective immittance is X_{j,eff} = P[j]/P[j+1] and the
// transmission denominator is P[0].
std::vector<Complex> ladder_determinants(const CircuitNetwork& net, double omega) {
    const std::size_t n = net.size();
    std::vector<Complex> p(n + 2);
    p[n + 1] = 0.0;
    p[n] = 1.0;
    for (std::size_t j = n; j-- > 0;)
        p[j] = net.elements[j].immittance(omega) * p[j + 1] + p[j + 2];
    return p;
}

const char* kind_name(ElementKind kind) {
    return kind == ElementKind::SeriesInductor ? "series" : "shunt";
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

CircuitNetwork synthesize(const TransducerChain& chain, Topology topology,
                          double gauge) {
    if (!(gauge > 0.0)) throw InvalidRates("synthesize: gauge must be positive");
    const std::size_t n = chain.size();

    CircuitNetwork net;
    net.topology = topology;
    net.elements.resize(n);

    double x = gauge;
    for (std::size_t j = 0; j < n; ++j) {
        const bool series_slot = (j % 2 == 0) == (topology == Topology::SeriesFirst);
        CircuitElement& el = net.elements[j];
        el.kind = series_slot ? ElementKind::SeriesInductor : ElementKind::ShuntCapacitor;
        el.reactive = x;
        const ModeParams& m = chain.modes[j];
        el.r_ex = m.kappa_external * x / 2.0;
        el.r_i = m.kappa_intrinsic * x / 2.0;
        el.gen_imag = m.detuning * x;
        if (j + 1 < n) {
            const double g = chain.couplings[j];
            if (g == 0.0)
                throw InvalidRates("synthesize: zero coupling has no ladder image");
            x = 1.0 / (g * g * x);
        }
    }
    return net;
}

TransducerChain chain_from_circuit(const CircuitNetwork& net) {
    const std::size_t n = net.size();
    if (n < 2) throw InvalidRates("chain_from_circuit: need at least two elements");

    TransducerChain chain;
    chain.modes.resize(n);
    chain.couplings.resize(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        const CircuitElement& el = net.elements[j];
        chain.modes[j].kappa_external = 2.0 * el.r_ex / el.reactive;
        chain.modes[j].kappa_intrinsic = 2.0 * el.r_i / el.reactive;
        chain.modes[j].detuning = el.gen_imag / el.reactive;
        if (j + 1 < n)
            chain.couplings[j] =
                1.0 / std::sqrt(el.reactive * net.elements[j + 1].reactive);
    }
    return chain;
}

Complex ladder_effective_immittance(const CircuitNetwork& net, std::size_t j,
                                    double omega) {
    if (j >= net.size())
        throw InvalidRates("ladder_effective_immittance: element index out of range");
    const auto p = ladder_determinants(net, omega);
    if (p[j + 1] == Complex(0.0, 0.0))
        throw DegenerateNetwork("ladder effective immittance has a pole at element " +
                                std::to_string(j));
    return p[j] / p[j + 1];
}

PowerTransmission power_transmission(const CircuitNetwork& net, double omega) {
    const auto p = ladder_determinants(net, omega);
    if (p[0] == Complex(0.0, 0.0))
        throw DegenerateNetwork("ladder transmission denominator vanishes");
    const CircuitElement& src = net.elements.front();
    const CircuitElement& load = net.elements.back();

    PowerTransmission t;
    t.full = 2.0 * std::sqrt(src.r_ex * load.r_ex) / p[0];
    t.internal = 2.0 * std::sqrt(src.r_total() * load.r_total()) / p[0];
    return t;
}

Complex source_power_reflection(const CircuitNetwork& net, double omega) {
    if (net.size() < 2)
        throw InvalidRates("source_power_reflection: need at least two elements");
    const auto p = ladder_determinants(net, omega);
    if (p[1] == Complex(0.0, 0.0))
        throw DegenerateNetwork("load immittance has a pole at this frequency");
    const Complex xs = net.elements.front().immittance(omega);
    const Complex xl = p[2] / p[1];  // 1 / X_{1,eff}: the load in xs's convention
    return (xl - std::conj(xs)) / (xl + xs);
}

TheveninReport thevenin_1stage(const TransducerChain& chain, double omega) {
    if (chain.size() != 3)
        throw InvalidRates("thevenin_1stage: defined for 1-stage chains only");
    const Complex chi_a = inverse_susceptibility(chain.mode_a(), omega);
    const Complex chi_2 = inverse_susceptibility(chain.modes[1], omega);
    const Complex chi_b = inverse_susceptibility(chain.mode_b(), omega);
    TheveninReport rep;
    rep.z1 = chain.coupling_a() * chain.coupling_a() / chi_a;
    rep.z2 = chi_2;
    rep.z3 = chain.coupling_b() * chain.coupling_b() / chi_b;
    return rep;
}

std::string to_netlist(const CircuitNetwork& net) {
    std::ostringstream out;
    out << "# transduce ladder netlist, type " << static_cast<int>(net.topology) << "\n";
    out << "# kind reactive r_ex r_i gen_imag  (series: L/R/Im R_gen, shunt: C/G/Im G_gen)\n";
    for (const CircuitElement& el : net.elements) {
        out << kind_name(el.kind) << ' ' << g17(el.reactive) << ' ' << g17(el.r_ex)
            << ' ' << g17(el.r_i) << ' ' << g17(el.gen_imag) << '\n';
    }
    return out.str();
}

nlohmann::json circuit_to_json(const CircuitNetwork& net) {
    nlohmann::json doc{{"topology", static_cast<int>(net.topology)},
                       {"elements", nlohmann::json::array()}};
    for (const CircuitElement& el : net.elements)
        doc["elements"].push_back({{"kind", kind_name(el.kind)},
                                   {"reactive", el.reactive},
                                   {"r_ex", el.r_ex},
                                   {"r_i", el.r_i},
                                   {"gen_imag", el.gen_imag}});
    return doc;
}

}  // namespace transduce
