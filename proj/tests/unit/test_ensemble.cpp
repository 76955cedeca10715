#include <doctest.h>

#include <cmath>

#include "transduce/chain.hpp"
#include "transduce/ensemble.hpp"
#include "transduce/scattering.hpp"

using namespace transduce;

namespace {

EnsembleSpec base_spec() {
    EnsembleSpec spec;
    spec.mode_a = {0.0, 0.0, 1.0};
    spec.mode_b = {0.0, 0.0, 1.2};
    spec.atom_count = 1;
    spec.g_a = 0.4;
    spec.g_23 = 0.6;
    spec.g_b = 0.5;
    spec.level2 = {0.0, 0.8, 0.0};
    spec.level3 = {0.0, 0.9, 0.0};
    return spec;
}

}  // namespace

TEST_CASE("collective chain construction") {
    SUBCASE("single atom, no broadening, is the bare 2-stage chain") {
        const TransducerChain chain = collective_chain(base_spec());
        REQUIRE(chain.stages() == 2);
        CHECK(chain.couplings == std::vector<double>{0.4, 0.6, 0.5});
        CHECK(chain.modes[1].kappa_total() == 0.8);
        CHECK(chain.modes[2].kappa_total() == 0.9);
    }
    SUBCASE("collective enhancement scales the end couplings by sqrt(N_A)") {
        EnsembleSpec spec = base_spec();
        spec.atom_count = 100;
        const TransducerChain chain = collective_chain(spec);
        CHECK(chain.couplings[0] == doctest::Approx(4.0).epsilon(1e-15));
        CHECK(chain.couplings[1] == 0.6);  // within-atom link is not enhanced
        CHECK(chain.couplings[2] == doctest::Approx(5.0).epsilon(1e-15));
    }
    SUBCASE("broadening adds to the intermediate linewidths") {
        EnsembleSpec spec = base_spec();
        spec.level2.gamma = spec.level2.kappa;
        const TransducerChain chain = collective_chain(spec);
        CHECK(chain.modes[1].kappa_total() == doctest::Approx(1.6));
        CHECK(chain.modes[2].kappa_total() == doctest::Approx(0.9));
    }
}

TEST_CASE("lorentzian quantile offsets") {
    SUBCASE("zero width collapses to zeros") {
        for (double v : lorentzian_offsets(7, 0.0, 20.0)) CHECK(v == 0.0);
    }
    SUBCASE("symmetric, sorted, centered, and truncated") {
        const double gamma = 0.5;
        const auto offsets = lorentzian_offsets(201, gamma, 20.0);
        CHECK(offsets[100] == doctest::Approx(0.0).epsilon(1e-12));
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            CHECK(offsets[i] == doctest::Approx(-offsets[200 - i]).epsilon(1e-10));
            CHECK(std::abs(offsets[i]) <= 20.0 * gamma + 1e-9);
            if (i > 0) CHECK(offsets[i] > offsets[i - 1]);
        }
    }
    SUBCASE("half of the full mass sits within the half width at half maximum") {
        const double truncation = 20.0;
        const auto offsets = lorentzian_offsets(4001, 1.0, truncation);
        int inside = 0;
        for (double v : offsets) inside += std::abs(v) <= 0.5;
        // Sampling renormalizes over the truncated window.
        const double window_mass = 2.0 / M_PI * std::atan(2.0 * truncation);
        CHECK(std::abs(inside / 4001.0 - 0.5 / window_mass) < 2e-3);
    }
}

TEST_CASE("star-to-collective identity at zero broadening") {
    EnsembleSpec spec = base_spec();
    spec.atom_count = 50;
    const TransducerChain chain = collective_chain(spec);
    for (double omega : {0.0, 0.35, -0.8}) {
        const double reference = efficiency_closed_form(chain, omega);
        for (int k : {1, 7, 32}) {
            const double discretized = discretized_ensemble_efficiency(spec, k, omega);
            CHECK(discretized == doctest::Approx(reference).epsilon(1e-9));
        }
    }
}

TEST_CASE("broadened closed form tracks the discretized oracle") {
    EnsembleSpec spec = base_spec();
    spec.atom_count = 30;
    spec.level2.gamma = 0.5 * spec.level2.kappa;
    spec.level3.gamma = 0.5 * spec.level3.kappa;
    const TransducerChain broadened = collective_chain(spec);

    const double omega = 0.0;
    const double closed = efficiency_closed_form(broadened, omega);
    const double coarse = std::abs(discretized_ensemble_efficiency(spec, 25, omega) - closed);
    const double fine = std::abs(discretized_ensemble_efficiency(spec, 101, omega) - closed);
    CHECK(fine < coarse);
    CHECK(fine / closed < 0.02);
}

TEST_CASE("broadening only hurts the peak efficiency") {
    EnsembleSpec sharp = base_spec();
    sharp.atom_count = 40;
    EnsembleSpec broad = sharp;
    broad.level2.gamma = 0.6;
    broad.level3.gamma = 0.4;

    const TransducerChain chain_sharp = collective_chain(sharp);
    const TransducerChain chain_broad = collective_chain(broad);
    double peak_sharp = 0.0, peak_broad = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double omega = -8.0 + 0.04 * i;
        peak_sharp = std::max(peak_sharp, efficiency_closed_form(chain_sharp, omega));
        peak_broad = std::max(peak_broad, efficiency_closed_form(chain_broad, omega));
    }
    CHECK(peak_broad <= peak_sharp + 1e-12);
}

TEST_CASE("ensemble validation") {
    EnsembleSpec spec = base_spec();
    spec.atom_count = 0;
    CHECK_THROWS_AS((void)collective_chain(spec), InvalidRates);
    spec = base_spec();
    spec.level2.gamma = -0.1;
    CHECK_THROWS_AS((void)collective_chain(spec), InvalidRates);
    spec = base_spec();
    CHECK_THROWS_AS((void)discretized_ensemble(spec, 0), InvalidRates);
}
