#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "test_chains.hpp"
#include "transduce/matching.hpp"
#include "transduce/optimizer.hpp"
#include "transduce/scattering.hpp"

using namespace transduce;
using transduce::testing::log_uniform;
using transduce::testing::random_chain;
using transduce::testing::RandomChainOptions;

namespace {

TransducerChain table_chain(double kappa, double g) {
    return make_chain({{0.0, 0.0, kappa}, {0.0, 0.0, kappa}}, {g});
}

// Dense LU determinant of the same tridiagonal matrix; the oracle for the
// recurrence.
Complex dense_determinant(const TransducerChain& chain, double omega) {
    const auto n = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        T(j, j) = inverse_susceptibility(chain.modes[j], omega);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        T(j, j + 1) = Complex(0.0, chain.couplings[j]);
        T(j + 1, j) = T(j, j + 1);
    }
    return Eigen::FullPivLU<Eigen::MatrixXcd>(T).determinant();
}

}  // namespace

TEST_CASE("tridiagonal determinant") {
    SUBCASE("0-stage by hand") {
        const Complex d = tridiagonal_determinant(table_chain(1.0, 0.5), 0.0);
        CHECK(d.real() == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(d.imag() == doctest::Approx(0.0));
    }
    SUBCASE("uncoupled chain is the product of pivots") {
        const TransducerChain chain = make_chain(
            {{0.2, 0.0, 1.0}, {-0.4, 0.6, 0.0}, {0.1, 0.0, 2.0}}, {0.0, 0.0}, true);
        Complex prod = 1.0;
        for (const ModeParams& m : chain.modes) prod *= inverse_susceptibility(m, 0.3);
        const Complex d = tridiagonal_determinant(chain, 0.3);
        CHECK(std::abs(d - prod) <= 1e-14 * std::abs(prod));
    }
    SUBCASE("matches a dense LU factorization") {
        std::mt19937_64 rng(31);
        RandomChainOptions opt;
        opt.max_stages = 6;
        for (int trial = 0; trial < 200; ++trial) {
            const TransducerChain chain = random_chain(rng, opt);
            const double omega = log_uniform(rng, 0.05, 5.0) - 2.0;
            const Complex fast = tridiagonal_determinant(chain, omega);
            const Complex slow = dense_determinant(chain, omega);
            CHECK(std::abs(fast - slow) <= 1e-10 * std::abs(slow));
        }
    }
}

TEST_CASE("0-stage efficiencies against the optimal-frequency table") {
    SUBCASE("unit cooperativity converts perfectly on resonance") {
        const ScatteringResult sc = scattering_matrix(table_chain(1.0, 0.5), 0.0);
        CHECK(sc.eta_total == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("cooperativity 4 on resonance") {
        const ScatteringResult sc = scattering_matrix(table_chain(1.0, 1.0), 0.0);
        CHECK(sc.eta_total == doctest::Approx(0.64).epsilon(1e-12));
    }
    SUBCASE("cooperativity 4 recovers unity off resonance") {
        const double nu = std::sqrt(3.0) / 2.0;
        for (double sign : {+1.0, -1.0}) {
            const ScatteringResult sc = scattering_matrix(table_chain(1.0, 1.0), sign * nu);
            CHECK(sc.eta_total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("external efficiency prefactor") {
        TransducerChain chain =
            make_chain({{0.0, 0.5, 0.5}, {0.0, 0.0, 2.0}}, {0.7});
        CHECK(external_efficiency(chain) == doctest::Approx(0.5).epsilon(1e-14));
        const ScatteringResult sc = scattering_matrix(chain, 0.4);
        CHECK(sc.eta_total == doctest::Approx(sc.eta_external * sc.eta_internal));
    }
}

TEST_CASE("closed-form efficiency equals the dense scattering solve") {
    std::mt19937_64 rng(37);
    RandomChainOptions opt;
    opt.max_stages = 6;
    opt.lossy_ends = true;
    for (int trial = 0; trial < 300; ++trial) {
        const TransducerChain chain = random_chain(rng, opt);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        const double omega = u(rng);
        const double closed = efficiency_closed_form(chain, omega);
        const double solved = scattering_matrix(chain, omega).eta_total;
        CHECK(closed == doctest::Approx(solved).epsilon(1e-10));
    }
}

TEST_CASE("lossless middle 1-stage with balanced arms converts perfectly") {
    // g_a^2/kappa_a = g_b^2/kappa_b with kappa_2 = 0, all resonant.
    const TransducerChain chain = make_chain(
        {{0.0, 0.0, 2.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.5}}, {1.0, 0.5});
    CHECK(efficiency_closed_form(chain, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const TransducerChain degenerate =
        make_chain({{0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}}, {0.0}, true);
    CHECK(efficiency_closed_form(degenerate, 0.3) == 0.0);
}

TEST_CASE("scattering matrix is unitary and reciprocal") {
    std::mt19937_64 rng(41);
    RandomChainOptions opt;
    opt.lossy_ends = true;
    for (int trial = 0; trial < 60; ++trial) {
        const TransducerChain chain = random_chain(rng, opt);
        std::uniform_real_distribution<double> u(-4.0, 4.0);
        const ScatteringResult sc = scattering_matrix(chain, u(rng));
        const auto p = sc.S.rows();
        const Eigen::MatrixXcd gram = sc.S.adjoint() * sc.S;
        CHECK((gram - Eigen::MatrixXcd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(std::abs(sc.S(sc.ports.b_ex, sc.ports.a_ex)) ==
              doctest::Approx(std::abs(sc.S(sc.ports.a_ex, sc.ports.b_ex)))
                  .epsilon(1e-12));
        CHECK(sc.eta_total <= 1.0 + 1e-12);
        CHECK(sc.eta_total <= sc.eta_external + 1e-12);
    }
}

TEST_CASE("port layout") {
    const TransducerChain chain = make_chain(
        {{0.0, 0.1, 1.0}, {0.0, 0.2, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.3, 2.0}},
        {0.5, 0.6, 0.7});
    const PortLayout ports = PortLayout::for_chain(chain);
    REQUIRE(ports.count() == 6);  // N + 4 with N = 2
    CHECK(ports.labels.front() == "a_ex");
    CHECK(ports.labels[1] == "A");
    CHECK(ports.labels[2] == "M2");
    CHECK(ports.labels[3] == "M3");
    CHECK(ports.labels[4] == "B");
    CHECK(ports.labels.back() == "b_ex");
    CHECK(ports.rate_of_port[3] == 0.0);  // zero-rate channel keeps its slot
}

TEST_CASE("reflection coefficients") {
    SUBCASE("matched lossless 0-stage reflects nothing") {
        const auto [r_a, r_b] = reflection_coefficients(table_chain(1.0, 0.5), 0.0);
        CHECK(std::abs(r_a) < 1e-12);
        CHECK(std::abs(r_b) < 1e-12);
    }
    SUBCASE("uncoupled mode reflects everything") {
        const TransducerChain chain = make_chain(
            {{0.7, 0.0, 1.0}, {0.0, 0.0, 1.0}}, {0.0}, true);
        const auto [r_a, r_b] = reflection_coefficients(chain, 0.4);
        CHECK(std::abs(r_a) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(r_b) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("matches the scattering diagonal on random chains") {
        std::mt19937_64 rng(43);
        RandomChainOptions opt;
        opt.lossy_ends = true;
        for (int trial = 0; trial < 60; ++trial) {
            const TransducerChain chain = random_chain(rng, opt);
            std::uniform_real_distribution<double> u(-4.0, 4.0);
            const double omega = u(rng);
            const auto [r_a, r_b] = reflection_coefficients(chain, omega);
            const ScatteringResult sc = scattering_matrix(chain, omega);
            CHECK(std::abs(r_a - sc.r_a) < 1e-10);
            CHECK(std::abs(r_b - sc.r_b) < 1e-10);
        }
    }
    SUBCASE("lossy 1-stage optimum reflects only at the under-coupled port") {
        // a over-coupled: C_a2 = 8, C_2b = 3.
        const MatchingSolution sol = optimal_1stage(8.0, 3.0, 1.0, 1.0, 1.0);
        const TransducerChain chain =
            make_chain({{sol.nu[0], 0.0, 1.0}, {sol.nu[1], 1.0, 0.0}, {sol.nu[2], 0.0, 1.0}},
                       {0.5 * std::sqrt(8.0), 0.5 * std::sqrt(3.0)});
        const auto [r_a, r_b] = reflection_coefficients(chain, 0.0);
        CHECK(std::abs(r_a) < 1e-9);
        CHECK(std::abs(r_b) > 1e-3);
    }
}

TEST_CASE("singular dynamical matrix names the dead mode") {
    // A zero-linewidth resonant mode with no coupling path to any port.
    TransducerChain chain;
    chain.modes = {{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
    chain.couplings = {0.0, 0.0};
    chain.allow_degenerate = true;
    try {
        (void)scattering_matrix(chain, 0.0);
        FAIL("expected SingularSystem");
    } catch (const SingularSystem& err) {
        CHECK(err.mode_index == 1);
    }
}

TEST_CASE("added noise") {
    SUBCASE("no intrinsic loss adds nothing") {
        const TransducerChain chain = table_chain(1.0, 0.5);
        PortOccupations occ;
        occ.a_env = 3.0;
        occ.b_env = 2.0;
        const AddedNoise general = added_noise(chain, 0.0, occ);
        const AddedNoise closed = added_noise_closed_form(chain, 0.0, occ);
        CHECK(general.a_to_b == 0.0);
        CHECK(general.b_to_a == 0.0);
        CHECK(closed.a_to_b == 0.0);
        CHECK(closed.b_to_a == 0.0);
        CHECK(closed.premise_ok);
    }
    SUBCASE("input-side environment enters with the kappa_i/kappa_ex ratio") {
        // Matched 0-stage with kappa_a,i = kappa_a,ex: C = 1 via totals.
        TransducerChain chain =
            make_chain({{0.0, 1.0, 1.0}, {0.0, 0.0, 2.0}}, {1.0});
        REQUIRE(matching_determinant(chain, 0.0).matched);
        PortOccupations occ;
        occ.a_env = 1.7;
        const AddedNoise closed = added_noise_closed_form(chain, 0.0, occ);
        CHECK(closed.a_to_b == doctest::Approx(1.7).epsilon(1e-14));
        const AddedNoise general = added_noise(chain, 0.0, occ);
        CHECK(general.a_to_b == doctest::Approx(1.7).epsilon(1e-12));
    }
    SUBCASE("closed form equals the full scattering path when matched") {
        std::mt19937_64 rng(47);
        for (int trial = 0; trial < 40; ++trial) {
            // Random matched chain: lossless intermediates, lossy ends,
            // frequencies from the optimizer's matching polish.
            RandomChainOptions opt;
            opt.max_stages = 3;
            opt.lossless_intermediates = true;
            opt.lossy_ends = true;
            opt.random_detunings = false;
            TransducerChain chain = random_chain(rng, opt);
            OptimizationProblem problem;
            problem.chain = chain;
            problem.config.seed = trial;
            const MatchingSolution sol = optimize_general(problem);
            if (!sol.residual.matched) continue;  // unmatchable draw
            const TransducerChain matched = chain.with_frequencies(sol.nu);

            PortOccupations occ;
            std::uniform_real_distribution<double> u(0.0, 4.0);
            occ.a_ex = u(rng);
            occ.a_env = u(rng);
            occ.b_env = u(rng);
            occ.b_ex = u(rng);
            const AddedNoise closed = added_noise_closed_form(matched, 0.0, occ);
            const AddedNoise general = added_noise(matched, 0.0, occ);
            CHECK(closed.premise_ok);
            CHECK(general.a_to_b == doctest::Approx(closed.a_to_b).epsilon(1e-9));
            CHECK(general.b_to_a == doctest::Approx(closed.b_to_a).epsilon(1e-9));
        }
    }
    SUBCASE("off premise is flagged, not fatal") {
        const TransducerChain chain = table_chain(1.0, 1.0);  // C = 4, unmatched at 0
        const AddedNoise closed = added_noise_closed_form(chain, 0.0, {});
        CHECK_FALSE(closed.premise_ok);
    }
}

TEST_CASE("coupled-mode network oracle") {
    SUBCASE("chain-shaped network reproduces the chain scattering matrix") {
        std::mt19937_64 rng(53);
        RandomChainOptions opt;
        opt.lossy_ends = true;
        for (int trial = 0; trial < 40; ++trial) {
            const TransducerChain chain = random_chain(rng, opt);
            std::uniform_real_distribution<double> u(-3.0, 3.0);
            const double omega = u(rng);
            const ScatteringResult direct = scattering_matrix(chain, omega);
            const NetworkScattering via_net =
                network_scattering(CoupledModeNetwork::from_chain(chain), omega);
            REQUIRE(via_net.S.rows() == direct.S.rows());
            CHECK((via_net.S - direct.S).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SUBCASE("disconnected modes scatter block-diagonally") {
        CoupledModeNetwork net;
        net.detunings = {0.4, -0.2};
        net.coupling = Eigen::MatrixXd::Zero(2, 2);
        net.decay = {{{1.0, "p0"}}, {{2.0, "p1"}}};
        const NetworkScattering sc = network_scattering(net, 0.3);
        CHECK(std::abs(sc.S(0, 1)) == 0.0);
        CHECK(std::abs(sc.S(1, 0)) == 0.0);
        CHECK(std::abs(sc.S(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("star of K modes at g/sqrt(K) equals one collective mode at g") {
        const double g = 0.8, kappa_hub = 1.3, omega = 0.2;
        // Reference: hub + single collective mode.
        CoupledModeNetwork collective;
        collective.detunings = {0.0, 0.1};
        collective.coupling = Eigen::MatrixXd::Zero(2, 2);
        collective.coupling(0, 1) = collective.coupling(1, 0) = g;
        collective.decay = {{{kappa_hub, "hub"}}, {{0.4, "leaf"}}};
        const Complex ref = network_scattering(collective, omega).S(0, 0);

        for (int k : {2, 5, 16}) {
            CoupledModeNetwork star;
            star.detunings.assign(k + 1, 0.1);
            star.detunings[0] = 0.0;
            star.coupling = Eigen::MatrixXd::Zero(k + 1, k + 1);
            star.decay.assign(k + 1, {});
            star.decay[0] = {{kappa_hub, "hub"}};
            for (int i = 1; i <= k; ++i) {
                star.coupling(0, i) = star.coupling(i, 0) = g / std::sqrt(double(k));
                star.decay[i] = {{0.4, "leaf" + std::to_string(i)}};
            }
            const NetworkScattering sc = network_scattering(star, omega);
            CHECK(std::abs(sc.S(0, 0) - ref) < 1e-12);
        }
    }
}
