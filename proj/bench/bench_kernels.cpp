// Serial-vs-OpenMP comparison for the hot kernels and the census
// enumeration. Prints one row per (kernel, size): median time of each
// variant and the speedup.
//
//   ./bench_kernels [--max-log2 N]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#include "aqs/csp.hpp"
#include "aqs/hilbert.hpp"
#include "aqs/kernels.hpp"

using namespace aqs;
using clock_type = std::chrono::steady_clock;

namespace {

std::vector<cplx> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx{g(rng), g(rng)};
    return v;
}

template <class Fn>
double median_seconds(const Fn& fn, int reps = 7) {
    std::vector<double> times;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = clock_type::now();
        fn();
        times.push_back(std::chrono::duration<double>(clock_type::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

void row(const char* name, std::size_t n, double t_serial, double t_parallel) {
    std::printf("%-18s %10zu %12.3f us %12.3f us %8.2fx\n", name, n, t_serial * 1e6,
                t_parallel * 1e6, t_serial / t_parallel);
}

} // namespace

int main(int argc, char** argv) {
    int max_log2 = 22;
    for (int i = 1; i < argc - 1; ++i)
        if (std::strcmp(argv[i], "--max-log2") == 0) max_log2 = std::atoi(argv[i + 1]);

    std::printf("threads available: %d\n", max_threads());
    std::printf("%-18s %10s %15s %15s %9s\n", "kernel", "n", "serial", "openmp", "speedup");

    for (int p = 16; p <= max_log2; p += 3) {
        const std::size_t n = std::size_t(1) << p;
        auto a = random_vec(n, 1);
        auto b = random_vec(n, 2);
        std::vector<std::uint8_t> marked(n, 0);
        for (std::size_t i = 0; i < n; i += 5) marked[i] = 1;

        volatile double sink = 0.0;
        auto time_mode = [&](ExecMode m, auto&& fn) {
            set_exec_mode(m);
            return median_seconds(fn);
        };

        row("dot", n,
            time_mode(ExecMode::serial,
                      [&] { sink = std::abs(kern::dot(a.data(), b.data(), n)); }),
            time_mode(ExecMode::parallel,
                      [&] { sink = std::abs(kern::dot(a.data(), b.data(), n)); }));
        row("norm2", n,
            time_mode(ExecMode::serial, [&] { sink = kern::norm2(a.data(), n); }),
            time_mode(ExecMode::parallel, [&] { sink = kern::norm2(a.data(), n); }));
        row("axpy", n,
            time_mode(ExecMode::serial,
                      [&] { kern::axpy(a.data(), cplx{0.1, 0.0}, b.data(), n); }),
            time_mode(ExecMode::parallel,
                      [&] { kern::axpy(a.data(), cplx{0.1, 0.0}, b.data(), n); }));
        row("phase_unmarked", n,
            time_mode(ExecMode::serial,
                      [&] { kern::phase_unmarked(a.data(), marked.data(), cplx{0.0, 1.0}, n); }),
            time_mode(ExecMode::parallel,
                      [&] { kern::phase_unmarked(a.data(), marked.data(), cplx{0.0, 1.0}, n); }));
        row("masked_mass", n,
            time_mode(ExecMode::serial,
                      [&] { sink = kern::masked_mass(a.data(), marked.data(), n); }),
            time_mode(ExecMode::parallel,
                      [&] { sink = kern::masked_mass(a.data(), marked.data(), n); }));
    }

    // one full product-formula step at state size 2^20
    {
        const std::size_t n = std::size_t(1) << 20;
        std::vector<std::uint8_t> marked(n, 0);
        for (std::size_t i = 0; i < n; i += 1000) marked[i] = 1;
        auto h_f = make_diagonal_marked(marked);
        auto h_i = make_rank_one_uniform(n);
        StateVector v;
        v.amp = random_vec(n, 3);
        v.normalize();
        auto step = [&] {
            apply_exponential(*h_f, 0.4, v);
            apply_exponential(*h_i, 0.6, v);
        };
        set_exec_mode(ExecMode::serial);
        const double ts = median_seconds(step);
        set_exec_mode(ExecMode::parallel);
        const double tp = median_seconds(step);
        row("product step", n, ts, tp);
    }

    // census enumeration on a 22-variable instance
    {
        auto ins = generate_random_ksat(22, 70, 3, 99);
        auto run = [&] {
            auto cen = census(ins, {11, 11});
            if (cen.m_a == 0) std::printf("unexpected\n");
        };
        set_exec_mode(ExecMode::serial);
        const double ts = median_seconds(run, 3);
        set_exec_mode(ExecMode::parallel);
        const double tp = median_seconds(run, 3);
        row("census 2^22", std::size_t(1) << 22, ts, tp);
    }

    set_exec_mode(ExecMode::parallel);
    return 0;
}
