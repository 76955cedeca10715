// transduce: batch front end for the transduction-chain toolkit.
// Exit codes: 0 success, 2 validation, 3 numerical failure, 4 no convergence.

#include <CLI11.hpp>

#include <complex>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "transduce/circuit.hpp"
#include "transduce/config.hpp"
#include "transduce/ensemble.hpp"
#include "transduce/matching.hpp"
#include "transduce/optimizer.hpp"
#include "transduce/scattering.hpp"
#include "transduce/spectrum.hpp"

namespace {

using namespace transduce;
using nlohmann::json;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNoConvergence = 4;

struct CliValidation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw CliValidation("cannot open output file: " + path);
    out << text;
}

ChainConfig load_chain_or_die(const std::string& path) {
    ChainConfig config = load_chain_config(path);
    for (const std::string& warning : config.warnings)
        std::cerr << "warning: " << warning << '\n';
    return config;
}

PortOccupations parse_occupations(const std::string& csv) {
    PortOccupations occ;
    if (csv.empty()) return occ;
    std::istringstream in(csv);
    std::string item;
    std::vector<double> values;
    while (std::getline(in, item, ',')) values.push_back(std::stod(item));
    if (values.size() != 4)
        throw CliValidation("--occupations expects four values: a_ex,a_env,b_env,b_ex");
    occ.a_ex = values[0];
    occ.a_env = values[1];
    occ.b_env = values[2];
    occ.b_ex = values[3];
    return occ;
}

json solution_to_json(const MatchingSolution& sol) {
    return json{{"nu", sol.nu},
                {"eta_internal", sol.eta_internal},
                {"branch", sol.branch},
                {"matched", sol.residual.matched},
                {"residual_re", sol.residual.resistance_part},
                {"residual_im", sol.residual.resonant_part},
                {"boundary_tie", sol.boundary_tie},
                {"converged", sol.converged}};
}

// --- spectrum --------------------------------------------------------------

struct SpectrumArgs {
    std::string config, out, format = "csv", occupations;
    double omega_min = -1.0, omega_max = 1.0;
    int points = 201;
};

int run_spectrum(const SpectrumArgs& args) {
    const ChainConfig config = load_chain_or_die(args.config);
    std::optional<PortOccupations> occ;
    if (!args.occupations.empty()) occ = parse_occupations(args.occupations);
    const Spectrum sp =
        compute_spectrum(config.chain, args.omega_min, args.omega_max, args.points, occ);
    if (args.format == "json") {
        write_text(args.out, spectrum_to_json(sp).dump(2) + "\n");
    } else {
        std::ostringstream out;
        write_csv(sp, out);
        write_text(args.out, out.str());
    }
    return 0;
}

// --- match -----------------------------------------------------------------

struct MatchArgs {
    std::string config, format = "text";
    double omega = 0.0;
    double tol = kMatchedTolerance;  // exploratory override of the matched flag
};

int run_match(const MatchArgs& args) {
    const ChainConfig config = load_chain_or_die(args.config);
    const TransducerChain& chain = config.chain;

    MatchingResidual residual = matching_determinant(chain, args.omega);
    if (args.tol != kMatchedTolerance)
        residual.matched = std::abs(residual.M) <= args.tol * residual.scale;
    const auto [res_a, res_b] = impedance_residuals(chain, args.omega);
    const auto coop = effective_cooperativities(chain, args.omega);

    bool degenerate = false;
    for (double g : chain.couplings) degenerate |= (g == 0.0);

    if (args.format == "json") {
        json doc{{"omega", args.omega},
                 {"re_M", residual.resistance_part},
                 {"im_M", residual.resonant_part},
                 {"matched", residual.matched},
                 {"scale", residual.scale},
                 {"impedance_residual_a", {res_a.real(), res_a.imag()}},
                 {"impedance_residual_b", {res_b.real(), res_b.imag()}},
                 {"degenerate", degenerate}};
        for (const Complex& c : coop)
            doc["effective_cooperativities"].push_back({c.real(), c.imag()});
        std::cout << doc.dump(2) << '\n';
        return 0;
    }

    std::cout << "omega: " << format_g17(args.omega) << '\n'
              << "Re M_N: " << format_g17(residual.resistance_part) << '\n'
              << "Im M_N: " << format_g17(residual.resonant_part) << '\n'
              << "matched: " << (residual.matched ? "true" : "false") << '\n'
              << "impedance residual a: " << format_g17(res_a.real()) << " "
              << format_g17(res_a.imag()) << "i\n"
              << "impedance residual b: " << format_g17(res_b.real()) << " "
              << format_g17(res_b.imag()) << "i\n";
    std::cout << "effective cooperativities:";
    for (const Complex& c : coop)
        std::cout << ' ' << format_g17(c.real()) << (c.imag() < 0 ? "-" : "+")
                  << format_g17(std::abs(c.imag())) << 'i';
    std::cout << '\n';
    if (degenerate)
        std::cout << "warning: degenerate chain (zero coupling present)\n";
    return 0;
}

// --- optimize ----------------------------------------------------------------

struct OptimizeArgs {
    std::string config, out;
    std::vector<int> pins;
    std::uint64_t seed = 0;
    int starts = 16;
    int iterations = 400;
};

int run_optimize(const OptimizeArgs& args) {
    const ChainConfig config = load_chain_or_die(args.config);

    OptimizationProblem problem;
    problem.chain = config.chain;
    problem.pinned.assign(config.chain.size(), false);
    for (int pin : args.pins) {
        if (pin < 0 || pin >= static_cast<int>(config.chain.size()))
            throw CliValidation("--pin index out of range");
        problem.pinned[pin] = true;
    }
    problem.config.seed = args.seed;
    problem.config.starts = args.starts;
    problem.config.max_iterations = args.iterations;

    const MatchingSolution sol = optimize_general(problem);
    write_text(args.out, solution_to_json(sol).dump(2) + "\n");
    return sol.converged ? 0 : kExitNoConvergence;
}

// --- phase-diagram -----------------------------------------------------------

struct PhaseArgs {
    std::string out;
    PhaseDiagramSpec spec;
};

int run_phase_diagram(const PhaseArgs& args) {
    const auto cells = phase_diagram(args.spec);

    std::ostringstream out;
    if (args.spec.stages == 0)
        out << "c_ab,region,eta_max,nu_a,nu_b\n";
    else if (args.spec.stages == 1)
        out << "c_a2,c_2b,region,eta_max,nu_a,nu_2,nu_b\n";
    else
        out << "c_a2,c_3b,region,eta_max,nu_a,nu_2,nu_3,nu_b\n";
    for (const PhaseDiagramCell& cell : cells) {
        out << format_g17(cell.c1);
        if (args.spec.stages > 0) out << ',' << format_g17(cell.c2);
        out << ',' << cell.region << ',' << format_g17(cell.eta_max);
        for (double nu : cell.nu) out << ',' << format_g17(nu);
        out << '\n';
    }
    write_text(args.out, out.str());
    return 0;
}

// --- circuit -----------------------------------------------------------------

struct CircuitArgs {
    std::string config, out;
    int topology = 1;
    double gauge = 1.0;
};

int run_circuit(const CircuitArgs& args) {
    const ChainConfig config = load_chain_or_die(args.config);
    const TransducerChain& chain = config.chain;
    const Topology topology =
        args.topology == 2 ? Topology::ShuntFirst : Topology::SeriesFirst;
    const CircuitNetwork net = synthesize(chain, topology, args.gauge);

    // Built-in equivalence self-check across a sweep spanning the chain's
    // own rate scale.
    double span = 0.0;
    for (const ModeParams& m : chain.modes)
        span = std::max({span, m.kappa_total(), std::abs(m.detuning)});
    for (double g : chain.couplings) span = std::max(span, g);
    span = 5.0 * std::max(span, 1e-3);
    double worst = 0.0;
    for (int i = 0; i < 101; ++i) {
        const double omega = -span + 2.0 * span * i / 100.0;
        const double eta = efficiency_closed_form(chain, omega);
        const double tp = std::norm(power_transmission(net, omega).full);
        worst = std::max(worst, std::abs(tp - eta));
    }

    json doc = circuit_to_json(net);
    doc["gauge"] = args.gauge;
    doc["self_check_max_deviation"] = worst;
    if (chain.stages() == 1) {
        const TheveninReport rep = thevenin_1stage(chain, 0.0);
        doc["thevenin"] = {{"z1", {rep.z1.real(), rep.z1.imag()}},
                           {"z2", {rep.z2.real(), rep.z2.imag()}},
                           {"z3", {rep.z3.real(), rep.z3.imag()}}};
    }

    if (args.out.empty()) {
        std::cout << to_netlist(net) << doc.dump(2) << '\n';
    } else {
        write_text(args.out + ".net", to_netlist(net));
        write_text(args.out + ".json", doc.dump(2) + "\n");
    }
    std::cout << "self-check max ||t|^2 - eta| over 101 points: " << format_g17(worst)
              << '\n';
    if (worst > 1e-8) {
        std::cerr << "error: circuit equivalence self-check failed\n";
        return kExitNumerical;
    }
    return 0;
}

// --- noise -------------------------------------------------------------------

struct NoiseArgs {
    std::string config, occupations;
    double omega = 0.0;
};

int run_noise(const NoiseArgs& args) {
    const ChainConfig config = load_chain_or_die(args.config);
    const PortOccupations occ = parse_occupations(args.occupations);

    const AddedNoise general = added_noise(config.chain, args.omega, occ);
    const AddedNoise closed = added_noise_closed_form(config.chain, args.omega, occ);
    json doc{{"omega", args.omega},
             {"premise_ok", general.premise_ok},
             {"general", {{"a_to_b", general.a_to_b}, {"b_to_a", general.b_to_a}}},
             {"closed_form", {{"a_to_b", closed.a_to_b}, {"b_to_a", closed.b_to_a}}}};
    if (!general.premise_ok)
        doc["note"] = "closed forms assume a matched chain with lossless intermediates";
    std::cout << doc.dump(2) << '\n';
    return 0;
}

// --- ensemble ----------------------------------------------------------------

struct EnsembleArgs {
    std::string config, out, format = "csv";
    double omega_min = -1.0, omega_max = 1.0;
    int points = 101;
    int oracle_k = 0;
};

int run_ensemble(const EnsembleArgs& args) {
    const EnsembleSpec spec = load_ensemble_config(args.config);
    const TransducerChain chain = collective_chain(spec);
    if (args.points < 2) throw CliValidation("--points must be >= 2");
    if (!(args.omega_min < args.omega_max))
        throw CliValidation("--omega-min must be below --omega-max");

    std::vector<double> omegas(args.points), collective(args.points),
        discretized(args.points);
    for (int i = 0; i < args.points; ++i)
        omegas[i] = args.omega_min +
                    (args.omega_max - args.omega_min) * i / double(args.points - 1);

    parallel_for(omegas.size(), [&](std::size_t i) {
        collective[i] = efficiency_closed_form(chain, omegas[i]);
        if (args.oracle_k > 0)
            discretized[i] =
                discretized_ensemble_efficiency(spec, args.oracle_k, omegas[i]);
    });

    if (args.format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            json row{{"omega", omegas[i]}, {"eta_collective", collective[i]}};
            if (args.oracle_k > 0) row["eta_discretized"] = discretized[i];
            rows.push_back(std::move(row));
        }
        write_text(args.out, rows.dump(2) + "\n");
        return 0;
    }
    std::ostringstream out;
    out << "omega,eta_collective";
    if (args.oracle_k > 0) out << ",eta_discretized";
    out << '\n';
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        out << format_g17(omegas[i]) << ',' << format_g17(collective[i]);
        if (args.oracle_k > 0) out << ',' << format_g17(discretized[i]);
        out << '\n';
    }
    write_text(args.out, out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design and analysis toolkit for N-stage linear quantum "
                 "transduction chains"};
    app.require_subcommand(1);

    SpectrumArgs spectrum_args;
    CLI::App* spectrum = app.add_subcommand("spectrum", "Sweep conversion efficiency");
    spectrum->add_option("--config", spectrum_args.config, "chain config JSON")->required();
    spectrum->add_option("--omega-min", spectrum_args.omega_min)->required();
    spectrum->add_option("--omega-max", spectrum_args.omega_max)->required();
    spectrum->add_option("--points", spectrum_args.points)->required();
    spectrum->add_option("--out", spectrum_args.out, "output path (default stdout)");
    spectrum->add_option("--format", spectrum_args.format)
        ->check(CLI::IsMember({"csv", "json"}));
    spectrum->add_option("--occupations", spectrum_args.occupations,
                         "a_ex,a_env,b_env,b_ex mean photon numbers; adds n_add columns");

    MatchArgs match_args;
    CLI::App* match = app.add_subcommand("match", "Evaluate the matching condition");
    match->add_option("--config", match_args.config)->required();
    match->add_option("--omega", match_args.omega)->required();
    match->add_option("--format", match_args.format)->check(CLI::IsMember({"text", "json"}));
    match->add_option("--tol", match_args.tol,
                      "matched-flag tolerance for exploratory sweeps");

    OptimizeArgs optimize_args;
    CLI::App* optimize =
        app.add_subcommand("optimize", "Search optimal operating frequencies");
    optimize->add_option("--config", optimize_args.config)->required();
    optimize->add_option("--pin", optimize_args.pins, "pin nu at this mode index");
    optimize->add_option("--seed", optimize_args.seed);
    optimize->add_option("--starts", optimize_args.starts);
    optimize->add_option("--iters", optimize_args.iterations);
    optimize->add_option("--out", optimize_args.out);

    PhaseArgs phase_args;
    CLI::App* phase = app.add_subcommand("phase-diagram",
                                         "Cooperativity-space map of the optimum");
    phase->add_option("--stages", phase_args.spec.stages)->required()
        ->check(CLI::Range(0, 2));
    phase->add_option("--c1-min", phase_args.spec.c1_min);
    phase->add_option("--c1-max", phase_args.spec.c1_max);
    phase->add_option("--c1-steps", phase_args.spec.c1_steps);
    phase->add_option("--c2-min", phase_args.spec.c2_min);
    phase->add_option("--c2-max", phase_args.spec.c2_max);
    phase->add_option("--c2-steps", phase_args.spec.c2_steps);
    phase->add_option("--c23", phase_args.spec.c_23, "fixed C_23 for 2-stage maps");
    phase->add_option("--out", phase_args.out);

    CircuitArgs circuit_args;
    CLI::App* circuit = app.add_subcommand("circuit", "Synthesize the ladder network");
    circuit->add_option("--config", circuit_args.config)->required();
    circuit->add_option("--topology", circuit_args.topology)->check(CLI::IsMember({1, 2}));
    circuit->add_option("--gauge", circuit_args.gauge);
    circuit->add_option("--out", circuit_args.out, "base path for .net and .json");

    NoiseArgs noise_args;
    CLI::App* noise = app.add_subcommand("noise", "Added-noise report");
    noise->add_option("--config", noise_args.config)->required();
    noise->add_option("--omega", noise_args.omega)->required();
    noise->add_option("--occupations", noise_args.occupations);

    EnsembleArgs ensemble_args;
    CLI::App* ensemble =
        app.add_subcommand("ensemble", "Collective-mode ensemble spectra");
    ensemble->add_option("--config", ensemble_args.config)->required();
    ensemble->add_option("--omega-min", ensemble_args.omega_min)->required();
    ensemble->add_option("--omega-max", ensemble_args.omega_max)->required();
    ensemble->add_option("--points", ensemble_args.points)->required();
    ensemble->add_option("--oracle-k", ensemble_args.oracle_k,
                         "also run the K-sub-mode discretized oracle");
    ensemble->add_option("--out", ensemble_args.out);
    ensemble->add_option("--format", ensemble_args.format)
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? 0 : kExitValidation;
    }

    try {
        if (spectrum->parsed()) return run_spectrum(spectrum_args);
        if (match->parsed()) return run_match(match_args);
        if (optimize->parsed()) return run_optimize(optimize_args);
        if (phase->parsed()) return run_phase_diagram(phase_args);
        if (circuit->parsed()) return run_circuit(circuit_args);
        if (noise->parsed()) return run_noise(noise_args);
        if (ensemble->parsed()) return run_ensemble(ensemble_args);
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitValidation;
    } catch (const CliValidation& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitValidation;
    } catch (const InvalidRates& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitValidation;
    } catch (const ZeroLinewidth& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitValidation;
    } catch (const SingularSystem& err) {
        std::cerr << "numerical error at mode " << err.mode_index << ": " << err.what()
                  << '\n';
        return kExitNumerical;
    } catch (const std::exception& err) {
        std::cerr << "numerical error: " << err.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
