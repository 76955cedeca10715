#include "transduce/spectrum.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <thread>

namespace transduce {

namespace {

unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("TRANSDUCE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
    }
    return n;
}

}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = std::min<std::size_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

Spectrum compute_spectrum(const TransducerChain& chain, double omega_min,
                          double omega_max, int points,
                          const std::optional<PortOccupations>& noise) {
    if (points < 2) throw InvalidRates("spectrum: points must be >= 2");
    if (!(omega_min < omega_max))
        throw InvalidRates("spectrum: omega_min must be below omega_max");

    Spectrum sp;
    sp.omega.resize(points);
    sp.eta_total.resize(points);
    sp.eta_internal.resize(points);
    sp.refl_a.resize(points);
    sp.refl_b.resize(points);
    sp.has_noise = noise.has_value();
    if (sp.has_noise) {
        sp.n_add_ab.resize(points);
        sp.n_add_ba.resize(points);
    }

    parallel_for(static_cast<std::size_t>(points), [&](std::size_t i) {
        const double omega =
            omega_min + (omega_max - omega_min) * static_cast<double>(i) / (points - 1);
        sp.omega[i] = omega;
        try {
            const ScatteringResult sc = scattering_matrix(chain, omega);
            sp.eta_total[i] = sc.eta_total;
            sp.eta_internal[i] = sc.eta_internal;
            sp.refl_a[i] = std::norm(sc.r_a);
            sp.refl_b[i] = std::norm(sc.r_b);
            if (sp.has_noise) {
                const AddedNoise n = added_noise(chain, omega, *noise);
                sp.n_add_ab[i] = n.a_to_b;
                sp.n_add_ba[i] = n.b_to_a;
            }
        } catch (const SingularSystem& err) {
            throw SingularSystem("omega = " + format_g17(omega) + ": " + err.what(),
                                 err.mode_index);
        }
    });
    return sp;
}

std::string format_g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_csv(const Spectrum& sp, std::ostream& out) {
    out << "omega,eta_total,eta_internal,refl_a,refl_b";
    if (sp.has_noise) out << ",n_add_ab,n_add_ba";
    out << '\n';
    for (std::size_t i = 0; i < sp.omega.size(); ++i) {
        out << format_g17(sp.omega[i]) << ',' << format_g17(sp.eta_total[i]) << ','
            << format_g17(sp.eta_internal[i]) << ',' << format_g17(sp.refl_a[i]) << ','
            << format_g17(sp.refl_b[i]);
        if (sp.has_noise)
            out << ',' << format_g17(sp.n_add_ab[i]) << ',' << format_g17(sp.n_add_ba[i]);
        out << '\n';
    }
}

nlohmann::json spectrum_to_json(const Spectrum& sp) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < sp.omega.size(); ++i) {
        nlohmann::json row{{"omega", sp.omega[i]},
                           {"eta_total", sp.eta_total[i]},
                           {"eta_internal", sp.eta_internal[i]},
                           {"refl_a", sp.refl_a[i]},
                           {"refl_b", sp.refl_b[i]}};
        if (sp.has_noise) {
            row["n_add_ab"] = sp.n_add_ab[i];
            row["n_add_ba"] = sp.n_add_ba[i];
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace transduce
