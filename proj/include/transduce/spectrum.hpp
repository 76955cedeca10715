#ifndef TRANSDUCE_SPECTRUM_HPP
#define TRANSDUCE_SPECTRUM_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "transduce/chain.hpp"
#include "transduce/scattering.hpp"

namespace transduce {

// Runs fn(i) for i in [0, count), spreading work over worker threads.
// Thread count: min(hardware, TRANSDUCE_THREADS when set). Results must be
// written to per-index slots; the schedule is otherwise unobservable.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

struct Spectrum {
    std::vector<double> omega;
    std::vector<double> eta_total;
    std::vector<double> eta_internal;
    std::vector<double> refl_a;  // |r_a|^2
    std::vector<double> refl_b;
    bool has_noise = false;
    std::vector<double> n_add_ab;
    std::vector<double> n_add_ba;
};

// Uniform inclusive grid, points >= 2. Throws SingularSystem and friends
// annotated with the failing omega.
Spectrum compute_spectrum(const TransducerChain& chain, double omega_min,
                          double omega_max, int points,
                          const std::optional<PortOccupations>& noise = std::nullopt);

// CSV with the fixed header omega,eta_total,eta_internal,refl_a,refl_b
// (plus n_add columns when present); 17 significant digits throughout so
// reruns are bit-stable.
void write_csv(const Spectrum& spectrum, std::ostream& out);

nlohmann::json spectrum_to_json(const Spectrum& spectrum);

// printf("%.17g") — shared by every text emitter.
std::string format_g17(double value);

}  // namespace transduce

#endif  // TRANSDUCE_SPECTRUM_HPP
