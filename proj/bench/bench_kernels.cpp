// Compares the serial reference kernels against their OpenMP versions and
// checks that the outputs agree bit-for-bit.

#include <chrono>
#include <cstdio>
#include <functional>

#include <omp.h>

#include "genport/kernels.hpp"
#include "genport/rng.hpp"
#include "genport/rvine.hpp"
#include "genport/scenarios.hpp"

using namespace genport;

namespace {

double time_of(const std::function<void()>& fn, int reps = 3) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        best = std::min(best, dt);
    }
    return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-28s serial %8.4fs   omp %8.4fs   speedup %5.2fx   identical %s\n", name,
                serial, parallel, serial / parallel, identical ? "yes" : "NO");
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());

    {
        const int n = 2'000'000, d = 12;
        Mat r(n, d);
        for (int i = 0; i < n; ++i) {
            RngStream rs(substream(1, RngPurpose::Test, static_cast<std::uint64_t>(i)));
            for (int j = 0; j < d; ++j) r(i, j) = 0.02 * rs.normal();
        }
        Vec w = Vec::Constant(d, 1.0 / d);
        Vec a, b;
        const double ts = time_of([&] { a = portfolio_returns_serial(r, w, 0.001); });
        const double tp = time_of([&] { b = portfolio_returns(r, w, 0.001); });
        report("portfolio_returns", ts, tp, (a.array() == b.array()).all());
    }

    {
        const int n = 20'000, d = 12;
        Mat u(n, d);
        for (int i = 0; i < n; ++i) {
            RngStream rs(substream(2, RngPurpose::Test, static_cast<std::uint64_t>(i)));
            const double z = rs.normal();
            for (int j = 0; j < d; ++j) u(i, j) = normal_cdf(0.6 * z + 0.8 * rs.normal());
        }
        Mat a, b;
        const double ts = time_of([&] { a = kendall_tau_matrix_serial(u); });
        const double tp = time_of([&] { b = kendall_tau_matrix(u); });
        report("kendall_tau_matrix", ts, tp, (a.array() == b.array()).all());
    }

    {
        // scenario simulation parallelizes over rows via per-row substreams
        const int window = 250, d = 6;
        Mat wdata(window, d);
        for (int i = 0; i < window; ++i) {
            RngStream rs(substream(3, RngPurpose::Test, static_cast<std::uint64_t>(i)));
            const double z = rs.normal();
            for (int j = 0; j < d; ++j) wdata(i, j) = 0.02 * (0.5 * z + rs.normal());
        }
        const GenModel model = fit_generative(parse_genmodel("mv norm"), wdata, 100);
        ScenarioMatrix a, b;
        const int n = 2'000'000;
        double tp = time_of([&] { b = simulate_returns(model, n, 99); });
        double ts;
        {
            const int saved = omp_get_max_threads();
            omp_set_num_threads(1);
            ts = time_of([&] { a = simulate_returns(model, n, 99); });
            omp_set_num_threads(saved);
        }
        report("simulate_returns (mv norm)", ts, tp,
               (a.values.array() == b.values.array()).all());
    }

    {
        // vine sampling, same per-row substream argument
        const int n_fit = 2000, d = 5;
        Mat u(n_fit, d);
        for (int i = 0; i < n_fit; ++i) {
            RngStream rs(substream(4, RngPurpose::Test, static_cast<std::uint64_t>(i)));
            const double z = rs.normal();
            for (int j = 0; j < d; ++j) u(i, j) = normal_cdf(0.7 * z + rs.normal());
        }
        const RvineModel vine = fit_rvine(u, BicopFamilySet::elliptical());
        Mat a, b;
        const int n = 200'000;
        double tp = time_of([&] { b = sample_rvine(vine, n, 5); });
        double ts;
        {
            const int saved = omp_get_max_threads();
            omp_set_num_threads(1);
            ts = time_of([&] { a = sample_rvine(vine, n, 5); });
            omp_set_num_threads(saved);
        }
        report("sample_rvine (D=5)", ts, tp, (a.array() == b.array()).all());
    }

    return 0;
}
