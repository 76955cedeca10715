#include "transduce/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "transduce/scattering.hpp"

namespace transduce {

namespace {

TransducerChain all_external_chain(const std::vector<double>& kappas,
                                   const std::vector<double>& couplings) {
    TransducerChain chain;
    chain.modes.resize(kappas.size());
    for (std::size_t j = 0; j < kappas.size(); ++j) {
        const bool end = (j == 0 || j + 1 == kappas.size());
        chain.modes[j].kappa_external = end ? kappas[j] : 0.0;
        chain.modes[j].kappa_intrinsic = end ? 0.0 : kappas[j];
    }
    chain.couplings = couplings;
    return chain;
}

double eval_eta(const TransducerChain& tmpl, const std::vector<double>& nu) {
    return internal_efficiency_closed_form(tmpl.with_frequencies(nu), 0.0);
}

// Per-mode search scale: the linewidth when there is one, otherwise the
// strongest adjacent coupling (lossless intermediates).
std::vector<double> frequency_scales(const TransducerChain& chain) {
    std::vector<double> s(chain.size());
    for (std::size_t j = 0; j < chain.size(); ++j) {
        double v = chain.modes[j].kappa_total();
        if (v <= 0.0) {
            if (j > 0) v = std::max(v, chain.couplings[j - 1]);
            if (j < chain.couplings.size()) v = std::max(v, chain.couplings[j]);
        }
        s[j] = v > 0.0 ? v : 1.0;
    }
    return s;
}

struct NelderMead {
    std::function<double(const std::vector<double>&)> f;
    int max_iterations;

    // Minimizes f from `start` with the given initial step; returns best point.
    std::pair<std::vector<double>, double> run(const std::vector<double>& start,
                                               double step) const {
        const std::size_t d = start.size();
        std::vector<std::vector<double>> x(d + 1, start);
        std::vector<double> fx(d + 1);
        for (std::size_t i = 0; i < d; ++i) x[i + 1][i] += step;
        for (std::size_t i = 0; i <= d; ++i) fx[i] = f(x[i]);

        for (int iter = 0; iter < max_iterations; ++iter) {
            std::vector<std::size_t> order(d + 1);
            std::iota(order.begin(), order.end(), 0u);
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
            if (fx[order[d]] - fx[order[0]] <= 1e-16 * (1.0 + std::abs(fx[order[0]]))) break;

            const std::size_t worst = order[d], second = order[d - 1], best = order[0];
            std::vector<double> centroid(d, 0.0);
            for (std::size_t k = 0; k <= d; ++k) {
                if (k == worst) continue;
                for (std::size_t i = 0; i < d; ++i) centroid[i] += x[k][i];
            }
            for (double& c : centroid) c /= static_cast<double>(d);

            auto along = [&](double t) {
                std::vector<double> p(d);
                for (std::size_t i = 0; i < d; ++i)
                    p[i] = centroid[i] + t * (x[worst][i] - centroid[i]);
                return p;
            };

            std::vector<double> xr = along(-1.0);
            const double fr = f(xr);
            if (fr < fx[best]) {
                std::vector<double> xe = along(-2.0);
                const double fe = f(xe);
                if (fe < fr) { x[worst] = std::move(xe); fx[worst] = fe; }
                else { x[worst] = std::move(xr); fx[worst] = fr; }
            } else if (fr < fx[second]) {
                x[worst] = std::move(xr); fx[worst] = fr;
            } else {
                const bool outside = fr < fx[worst];
                std::vector<double> xc = along(outside ? -0.5 : 0.5);
                const double fc = f(xc);
                if (fc < std::min(fr, fx[worst])) {
                    x[worst] = std::move(xc); fx[worst] = fc;
                } else {
                    for (std::size_t k = 0; k <= d; ++k) {
                        if (k == best) continue;
                        for (std::size_t i = 0; i < d; ++i)
                            x[k][i] = x[best][i] + 0.5 * (x[k][i] - x[best][i]);
                        fx[k] = f(x[k]);
                    }
                }
            }
        }

        std::size_t best = 0;
        for (std::size_t k = 1; k <= d; ++k)
            if (fx[k] < fx[best]) best = k;
        return {x[best], fx[best]};
    }
};

// M_N and its exact gradient dM/dnu_j = i * L_j * T_{j+1}, with L and T the
// leading/trailing subdeterminants of the matching matrix (conjugated first
// pivot, intermediate kappas zeroed).
Complex matching_residual_grad(const TransducerChain& chain,
                               const std::vector<double>& nu,
                               std::vector<Complex>& grad) {
    const std::size_t n = chain.size();
    std::vector<Complex> pivot(n);
    pivot[0] = Complex(-chain.mode_a().kappa_total() / 2.0, nu[0]);
    for (std::size_t j = 1; j + 1 < n; ++j) pivot[j] = Complex(0.0, nu[j]);
    pivot[n - 1] = Complex(chain.mode_b().kappa_total() / 2.0, nu[n - 1]);

    std::vector<Complex> lead(n + 1), trail(n + 2);
    lead[0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        lead[k] = pivot[k - 1] * lead[k - 1];
        if (k >= 2) {
            const double g = chain.couplings[k - 2];
            lead[k] += g * g * lead[k - 2];
        }
    }
    trail[n + 1] = 0.0;
    trail[n] = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        trail[k] = pivot[k] * trail[k + 1];
        if (k + 1 < n) {
            const double g = chain.couplings[k];
            trail[k] += g * g * trail[k + 2];
        }
    }

    grad.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        grad[j] = Complex(0.0, 1.0) * lead[j] * trail[j + 1];
    return lead[n];
}

// Min-norm Gauss-Newton on (Re M_N, Im M_N) = 0 over the free frequencies.
// Only meaningful for lossless intermediates, where M_N = 0 is exactly
// unity internal efficiency; the analytic Jacobian lets it ride out the
// badly conditioned near-pole matching geometries.
bool newton_match_polish(const TransducerChain& tmpl,
                         const std::vector<std::size_t>& free_idx,
                         std::vector<double>& nu) {
    if (free_idx.size() < 2) return false;

    std::vector<double> cur_nu = nu;
    std::vector<Complex> grad;
    Complex cur = matching_residual_grad(tmpl, cur_nu, grad);
    for (int iter = 0; iter < 60; ++iter) {
        if (cur == Complex(0.0, 0.0)) break;

        // Least-norm solve of J s = -M via s = J^T (J J^T)^{-1} (-M),
        // with the 2 x d Jacobian read as rows (Re grad, Im grad).
        double a11 = 0.0, a12 = 0.0, a22 = 0.0;
        for (std::size_t i : free_idx) {
            a11 += grad[i].real() * grad[i].real();
            a12 += grad[i].real() * grad[i].imag();
            a22 += grad[i].imag() * grad[i].imag();
        }
        const double det = a11 * a22 - a12 * a12;
        if (det <= 0.0 || !std::isfinite(det)) break;
        const double y1 = (-cur.real() * a22 + cur.imag() * a12) / det;
        const double y2 = (+cur.real() * a12 - cur.imag() * a11) / det;

        double t = 1.0;
        bool stepped = false;
        std::vector<Complex> next_grad;
        for (int backtrack = 0; backtrack < 40 && !stepped; ++backtrack) {
            std::vector<double> next_nu = cur_nu;
            for (std::size_t i : free_idx)
                next_nu[i] += t * (grad[i].real() * y1 + grad[i].imag() * y2);
            const Complex next = matching_residual_grad(tmpl, next_nu, next_grad);
            if (std::abs(next) < std::abs(cur)) {
                cur_nu = std::move(next_nu);
                cur = next;
                grad = next_grad;
                stepped = true;
            }
            t *= 0.5;
        }
        if (!stepped) break;
    }

    const MatchingResidual final_res =
        matching_determinant(tmpl.with_frequencies(cur_nu), 0.0);
    if (std::abs(final_res.M) <= 1e-10 * final_res.scale) {
        nu = std::move(cur_nu);
        return true;
    }
    return false;
}

std::vector<std::vector<double>> closed_form_seeds(const TransducerChain& chain) {
    std::vector<std::vector<double>> seeds;
    const int stages = chain.stages();
    auto push_with_mirror = [&](const std::vector<double>& nu) {
        seeds.push_back(nu);
        std::vector<double> neg(nu.size());
        for (std::size_t i = 0; i < nu.size(); ++i) neg[i] = -nu[i];
        seeds.push_back(std::move(neg));
    };
    try {
        if (stages == 0) {
            for (const auto& sol : solve_0stage(chain.mode_a().kappa_total(),
                                                chain.mode_b().kappa_total(),
                                                chain.coupling_a()))
                seeds.push_back(sol.nu);
        } else if (stages == 1) {
            push_with_mirror(optimal_closed_form(chain).nu);
        } else if (stages == 2 && !chain.lossless_intermediates()) {
            // (the fully lossless 2-stage case routes back through the
            // numerical search; no closed form to seed from)
            push_with_mirror(optimal_closed_form(chain).nu);
        }
    } catch (const std::exception&) {
        // A missing closed form only costs a seed.
    }
    return seeds;
}

}  // namespace

std::string region_label(const TransducerChain& chain, const std::vector<double>& nu,
                         double threshold) {
    const auto scales = frequency_scales(chain);
    std::string label;
    for (std::size_t j = 0; j < nu.size(); ++j) {
        if (std::abs(nu[j]) <= threshold * scales[j]) continue;
        if (!label.empty()) label += '+';
        if (j == 0) label += "nu_a";
        else if (j + 1 == nu.size()) label += "nu_b";
        else label += "nu_" + std::to_string(j + 1);
    }
    return label.empty() ? "resonant" : label;
}

MatchingSolution optimize_general(const OptimizationProblem& problem) {
    const TransducerChain& chain = problem.chain;
    const std::size_t n = chain.size();
    const OptimizerConfig& cfg = problem.config;

    std::vector<bool> pinned = problem.pinned;
    pinned.resize(n, false);
    std::vector<std::size_t> free_idx;
    for (std::size_t j = 0; j < n; ++j)
        if (!pinned[j]) free_idx.push_back(j);

    const std::vector<double> base_nu = chain.frequencies_at(0.0);
    const auto scales = frequency_scales(chain);

    auto unpack = [&](const std::vector<double>& u) {
        std::vector<double> nu = base_nu;
        for (std::size_t i = 0; i < free_idx.size(); ++i)
            nu[free_idx[i]] = u[i] * scales[free_idx[i]];
        return nu;
    };
    auto pack = [&](const std::vector<double>& nu) {
        std::vector<double> u(free_idx.size());
        for (std::size_t i = 0; i < free_idx.size(); ++i)
            u[i] = nu[free_idx[i]] / scales[free_idx[i]];
        return u;
    };

    auto finish = [&](std::vector<double> nu, bool converged) {
        MatchingSolution sol;
        sol.eta_internal = eval_eta(chain, nu);
        sol.residual = matching_determinant(chain.with_frequencies(nu), 0.0);
        sol.nu = std::move(nu);
        sol.branch = "numeric";
        sol.converged = converged;
        return sol;
    };

    if (free_idx.empty()) return finish(base_nu, true);

    NelderMead nm;
    nm.max_iterations = cfg.max_iterations;
    nm.f = [&](const std::vector<double>& u) { return -eval_eta(chain, unpack(u)); };

    std::vector<std::vector<double>> starts;
    starts.push_back(pack(base_nu));
    for (const auto& nu_seed : closed_form_seeds(chain)) {
        std::vector<double> nu = base_nu;
        for (std::size_t i : free_idx) nu[i] = nu_seed[i];
        starts.push_back(pack(nu));
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> spread(-4.0, 4.0);
    while (starts.size() < static_cast<std::size_t>(cfg.starts)) {
        std::vector<double> u(free_idx.size());
        for (double& v : u) v = spread(rng);
        starts.push_back(std::move(u));
    }

    std::vector<double> best_u = starts.front();
    double best_f = nm.f(best_u);
    for (const auto& start : starts) {
        auto [u, fu] = nm.run(start, 0.5);
        if (fu < best_f) {
            best_f = fu;
            best_u = std::move(u);
        }
    }

    bool converged = false;
    double step = 0.05;
    for (int round = 0; round < cfg.polish_restarts; ++round) {
        auto [u, fu] = nm.run(best_u, step);
        const double improvement = best_f - fu;
        if (fu < best_f) {
            best_f = fu;
            best_u = std::move(u);
        }
        step *= 0.1;
        if (improvement < cfg.eta_improvement_tol) {
            converged = true;
            break;
        }
    }

    std::vector<double> best_nu = unpack(best_u);

    // Quadratic polish per coordinate to sharpen the optimal frequencies.
    for (double h_rel : {1e-4, 1e-6}) {
        for (std::size_t i = 0; i < free_idx.size(); ++i) {
            const double h = h_rel * scales[free_idx[i]];
            std::vector<double> nu = best_nu;
            const double f0 = -eval_eta(chain, nu);
            nu[free_idx[i]] = best_nu[free_idx[i]] + h;
            const double fp = -eval_eta(chain, nu);
            nu[free_idx[i]] = best_nu[free_idx[i]] - h;
            const double fm = -eval_eta(chain, nu);
            const double curv = fp - 2.0 * f0 + fm;
            if (curv <= 0.0) continue;
            const double shift = 0.5 * h * (fm - fp) / curv;
            nu[free_idx[i]] = best_nu[free_idx[i]] + shift;
            if (-eval_eta(chain, nu) < f0) best_nu[free_idx[i]] += shift;
        }
    }

    // Lossless intermediates: a matched point is the exact optimum, so chase
    // M_N = 0 to machine precision along the free directions.
    if (chain.lossless_intermediates() && free_idx.size() >= 2 && -best_f > 0.5) {
        std::vector<double> nu = best_nu;
        if (newton_match_polish(chain, free_idx, nu) &&
            eval_eta(chain, nu) >= eval_eta(chain, best_nu) - 1e-12)
            best_nu = std::move(nu);
    }

    return finish(std::move(best_nu), converged);
}

MatchingSolution optimal_1stage(double c_a2, double c_2b, double kappa_a,
                                double kappa_2, double kappa_b) {
    if (!(kappa_a > 0.0) || !(kappa_b > 0.0) || kappa_2 < 0.0)
        throw InvalidRates("optimal_1stage: end linewidths must be positive");
    if (!(c_a2 > 0.0) || !(c_2b > 0.0))
        throw InvalidRates("optimal_1stage: cooperativities must be positive");

    if (kappa_2 == 0.0)
        throw InvalidRates("optimal_1stage: kappa_2 = 0 has no finite cooperativity; "
                           "use solve_1stage_lossless");
    const double g_a = 0.5 * std::sqrt(c_a2 * kappa_a * kappa_2);
    const double g_b = 0.5 * std::sqrt(c_2b * kappa_2 * kappa_b);

    double nu_a = 0.0, nu_2 = 0.0, nu_b = 0.0, eta = 0.0;
    std::string branch;
    if (c_a2 + 1.0 < c_2b) {
        const double root = std::sqrt(c_2b / (c_a2 + 1.0) - 1.0);
        nu_2 = 0.5 * kappa_2 * (c_a2 + 1.0) * root;
        nu_b = 0.5 * kappa_b * root;
        eta = c_a2 / (c_a2 + 1.0);
        branch = "b_overcoupled";
    } else if (c_a2 > c_2b + 1.0) {
        const double root = std::sqrt(c_a2 / (c_2b + 1.0) - 1.0);
        nu_a = 0.5 * kappa_a * root;
        nu_2 = 0.5 * kappa_2 * (c_2b + 1.0) * root;
        eta = c_2b / (c_2b + 1.0);
        branch = "a_overcoupled";
    } else {
        eta = 4.0 * c_a2 * c_2b / ((c_a2 + c_2b + 1.0) * (c_a2 + c_2b + 1.0));
        branch = "resonant";
    }

    const TransducerChain chain =
        all_external_chain({kappa_a, kappa_2, kappa_b}, {g_a, g_b});
    MatchingSolution sol;
    sol.nu = {nu_a, nu_2, nu_b};
    sol.branch = branch;
    sol.boundary_tie = (c_a2 + 1.0 == c_2b) || (c_a2 == c_2b + 1.0);
    sol.eta_internal = eval_eta(chain, sol.nu);
    sol.residual = matching_determinant(chain.with_frequencies(sol.nu), 0.0);
    // The table value and the recomputed efficiency must agree; keep the
    // recomputed one but fail loudly if the formula went wrong.
    if (std::abs(sol.eta_internal - eta) > 1e-9)
        throw std::logic_error("optimal_1stage: closed form and evaluation disagree");
    return sol;
}

MatchingSolution optimal_2stage(double c_a2, double c_23, double c_3b,
                                const std::array<double, 4>& kappas) {
    const double ka = kappas[0], k2 = kappas[1], k3 = kappas[2], kb = kappas[3];
    if (!(ka > 0.0) || !(k2 > 0.0) || !(k3 > 0.0) || !(kb > 0.0))
        throw InvalidRates("optimal_2stage: all linewidths must be positive");
    if (!(c_a2 > 0.0) || !(c_23 > 0.0) || !(c_3b > 0.0))
        throw InvalidRates("optimal_2stage: cooperativities must be positive");

    const double g_a = 0.5 * std::sqrt(c_a2 * ka * k2);
    const double g_2 = 0.5 * std::sqrt(c_23 * k2 * k3);
    const double g_b = 0.5 * std::sqrt(c_3b * k3 * kb);

    const double mid_vs_ends = (c_a2 + 1.0) * (c_3b + 1.0);
    const double load_a = c_23 / (c_3b + 1.0) + 1.0;  // threshold for the a side
    const double load_b = c_23 / (c_a2 + 1.0) + 1.0;

    const bool tie = (c_23 == mid_vs_ends) ||
                     (std::abs(c_a2 - (load_a - 1.0)) == 1.0) ||
                     (std::abs(c_3b - (load_b - 1.0)) == 1.0) ||
                     (c_3b * c_3b == c_23 + 1.0) || (c_a2 * c_a2 == c_23 + 1.0);

    double nu_a = 0.0, nu_2 = 0.0, nu_3 = 0.0, nu_b = 0.0, eta = 0.0;
    std::string branch;

    if (!tie && c_23 > mid_vs_ends) {
        const double root = std::sqrt(c_23 / mid_vs_ends - 1.0);
        nu_2 = 0.5 * k2 * (c_a2 + 1.0) * root;
        nu_3 = 0.5 * k3 * (c_3b + 1.0) * root;
        eta = (c_a2 / (c_a2 + 1.0)) * (c_3b / (c_3b + 1.0));
        branch = "mid_overcoupled";
    } else if (tie || (std::abs(c_a2 - c_23 / (c_3b + 1.0)) <= 1.0 &&
                       std::abs(c_3b - c_23 / (c_a2 + 1.0)) <= 1.0)) {
        const double denom = c_a2 + c_23 + c_3b + c_a2 * c_3b + 1.0;
        eta = 4.0 * c_a2 * c_23 * c_3b / (denom * denom);
        branch = "resonant";
    } else if (c_a2 >= c_3b && c_a2 > load_a) {
        const double root = std::sqrt(c_23 + 1.0);
        if (c_3b * c_3b > c_23 + 1.0) {
            nu_a = 0.5 * ka * std::sqrt(c_a2 / root - 1.0);
            nu_b = -0.5 * kb * std::sqrt(c_3b / root - 1.0);  // anti-paired signs
            nu_2 = (k2 / ka) * root * nu_a;
            nu_3 = (k3 / kb) * root * nu_b;
            eta = c_23 / ((root + 1.0) * (root + 1.0));
            branch = "both_ends_offresonant";
        } else {
            nu_a = 0.5 * ka * std::sqrt(c_a2 / load_a - 1.0);
            nu_2 = (k2 / ka) * load_a * nu_a;
            eta = (c_3b / (c_3b + 1.0)) * (c_23 / (c_23 + c_3b + 1.0));
            branch = "a_overcoupled";
        }
    } else if (c_3b >= c_a2 && c_3b > load_b) {
        const double root = std::sqrt(c_23 + 1.0);
        if (c_a2 * c_a2 > c_23 + 1.0) {
            nu_a = 0.5 * ka * std::sqrt(c_a2 / root - 1.0);
            nu_b = -0.5 * kb * std::sqrt(c_3b / root - 1.0);
            nu_2 = (k2 / ka) * root * nu_a;
            nu_3 = (k3 / kb) * root * nu_b;
            eta = c_23 / ((root + 1.0) * (root + 1.0));
            branch = "both_ends_offresonant";
        } else {
            nu_b = 0.5 * kb * std::sqrt(c_3b / load_b - 1.0);
            nu_3 = (k3 / kb) * load_b * nu_b;
            eta = (c_a2 / (c_a2 + 1.0)) * (c_23 / (c_a2 + c_23 + 1.0));
            branch = "b_overcoupled";
        }
    } else {
        // Unreachable for positive cooperativities; the partition of the
        // table inequalities is exhaustive. Fall back to resonant.
        const double denom = c_a2 + c_23 + c_3b + c_a2 * c_3b + 1.0;
        eta = 4.0 * c_a2 * c_23 * c_3b / (denom * denom);
        branch = "resonant";
    }

    const TransducerChain chain =
        all_external_chain({ka, k2, k3, kb}, {g_a, g_2, g_b});
    MatchingSolution sol;
    sol.nu = {nu_a, nu_2, nu_3, nu_b};
    sol.branch = branch;
    sol.boundary_tie = tie;
    sol.eta_internal = eval_eta(chain, sol.nu);
    sol.residual = matching_determinant(chain.with_frequencies(sol.nu), 0.0);
    if (std::abs(sol.eta_internal - eta) > 1e-9)
        throw std::logic_error("optimal_2stage: closed form and evaluation disagree");
    return sol;
}

namespace {

// kappa_2 = 0, kappa_3 > 0 row of the 2-stage table: nu_b = 0 and the
// remaining frequencies solve r_{2,a} = 0 (one member of the family,
// preferring nu_a = 0 when it admits a real solution).
MatchingSolution partial_lossless_2stage(const TransducerChain& chain) {
    const double ka = chain.mode_a().kappa_total();
    const double k3 = chain.modes[2].kappa_total();
    const double kb = chain.mode_b().kappa_total();
    const double g_a = chain.couplings[0], g_2 = chain.couplings[1],
                 g_b = chain.couplings[2];

    const double c_3b = 4.0 * g_b * g_b / (k3 * kb);
    const double u = 0.5 * k3 * (1.0 + c_3b);  // Re of the dressed mode-3 pivot

    double nu_a = 0.0, nu_3 = 0.0;
    const double disc3 = g_2 * g_2 * u * ka / (2.0 * g_a * g_a) - u * u;
    if (disc3 >= 0.0) {
        nu_3 = std::sqrt(disc3);
    } else {
        nu_a = std::sqrt(g_a * g_a * ka * u / (2.0 * g_2 * g_2) - ka * ka / 4.0);
    }
    const double nu_2 = g_a * g_a * nu_a / (nu_a * nu_a + ka * ka / 4.0) +
                        g_2 * g_2 * nu_3 / (nu_3 * nu_3 + u * u);

    MatchingSolution sol;
    sol.nu = {nu_a, nu_2, nu_3, 0.0};
    sol.branch = "lossless_mid2";
    sol.eta_internal = eval_eta(chain, sol.nu);
    sol.residual = matching_determinant(chain.with_frequencies(sol.nu), 0.0);
    return sol;
}

std::vector<double> reversed_nu(std::vector<double> nu) {
    std::reverse(nu.begin(), nu.end());
    return nu;
}

}  // namespace

MatchingSolution optimal_closed_form(const TransducerChain& chain) {
    const int stages = chain.stages();
    const double ka = chain.mode_a().kappa_total();
    const double kb = chain.mode_b().kappa_total();

    if (stages == 0) {
        auto sols = solve_0stage(ka, kb, chain.coupling_a());
        MatchingSolution best = sols.front();
        // Report the recomputed efficiency through this chain's own split.
        best.eta_internal = eval_eta(chain, best.nu);
        best.residual = matching_determinant(chain.with_frequencies(best.nu), 0.0);
        return best;
    }
    if (stages == 1) {
        const double k2 = chain.modes[1].kappa_total();
        if (k2 == 0.0)
            return solve_1stage_lossless(ka, kb, chain.coupling_a(), chain.coupling_b());
        return optimal_1stage(cooperativity(chain, 0), cooperativity(chain, 1),
                              ka, k2, kb);
    }
    if (stages == 2) {
        const double k2 = chain.modes[1].kappa_total();
        const double k3 = chain.modes[2].kappa_total();
        if (k2 == 0.0 && k3 == 0.0) {
            OptimizationProblem problem;
            problem.chain = chain;
            MatchingSolution sol = optimize_general(problem);
            sol.branch = "lossless_matched";
            return sol;
        }
        if (k2 == 0.0) return partial_lossless_2stage(chain);
        if (k3 == 0.0) {
            MatchingSolution sol = partial_lossless_2stage(chain.reversed());
            sol.nu = reversed_nu(sol.nu);
            sol.branch = "lossless_mid3";
            sol.eta_internal = eval_eta(chain, sol.nu);
            sol.residual = matching_determinant(chain.with_frequencies(sol.nu), 0.0);
            return sol;
        }
        return optimal_2stage(cooperativity(chain, 0), cooperativity(chain, 1),
                              cooperativity(chain, 2), {ka, k2, k3, kb});
    }

    OptimizationProblem problem;
    problem.chain = chain;
    return optimize_general(problem);
}

std::vector<PhaseDiagramCell> phase_diagram(const PhaseDiagramSpec& spec) {
    if (spec.stages < 0 || spec.stages > 2)
        throw InvalidRates("phase_diagram: stages must be 0, 1, or 2");
    if (!(spec.c1_min > 0.0) || !(spec.c1_max >= spec.c1_min) || spec.c1_steps < 1)
        throw InvalidRates("phase_diagram: bad first cooperativity axis");
    const bool two_axes = spec.stages > 0;
    if (two_axes && (!(spec.c2_min > 0.0) || !(spec.c2_max >= spec.c2_min) ||
                     spec.c2_steps < 1))
        throw InvalidRates("phase_diagram: bad second cooperativity axis");
    if (spec.stages == 2 && !(spec.c_23 > 0.0))
        throw InvalidRates("phase_diagram: c_23 must be positive");

    auto axis_value = [](double lo, double hi, int steps, int i) {
        return steps == 1 ? lo : lo + (hi - lo) * i / double(steps - 1);
    };

    std::vector<PhaseDiagramCell> cells;
    const int rows = spec.c1_steps;
    const int cols = two_axes ? spec.c2_steps : 1;
    cells.reserve(static_cast<std::size_t>(rows) * cols);

    for (int r = 0; r < rows; ++r) {
        const double c1 = axis_value(spec.c1_min, spec.c1_max, spec.c1_steps, r);
        for (int c = 0; c < cols; ++c) {
            const double c2 =
                two_axes ? axis_value(spec.c2_min, spec.c2_max, spec.c2_steps, c) : 0.0;
            PhaseDiagramCell cell;
            cell.c1 = c1;
            cell.c2 = c2;

            MatchingSolution sol;
            TransducerChain chain;
            if (spec.stages == 0) {
                chain = all_external_chain({1.0, 1.0}, {0.5 * std::sqrt(c1)});
                sol = optimal_closed_form(chain);
            } else if (spec.stages == 1) {
                sol = optimal_1stage(c1, c2, 1.0, 1.0, 1.0);
                chain = all_external_chain(
                    {1.0, 1.0, 1.0}, {0.5 * std::sqrt(c1), 0.5 * std::sqrt(c2)});
            } else {
                sol = optimal_2stage(c1, spec.c_23, c2, {1.0, 1.0, 1.0, 1.0});
                chain = all_external_chain({1.0, 1.0, 1.0, 1.0},
                                           {0.5 * std::sqrt(c1),
                                            0.5 * std::sqrt(spec.c_23),
                                            0.5 * std::sqrt(c2)});
            }
            cell.eta_max = sol.eta_internal;
            cell.nu = sol.nu;
            cell.region = region_label(chain, sol.nu, spec.resonance_threshold);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

}  // namespace transduce
