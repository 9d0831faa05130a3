#include "aqs/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#ifdef AQS_HAVE_OPENMP
#include <omp.h>
#endif

namespace aqs {

namespace {
std::atomic<ExecMode> g_mode{ExecMode::parallel};

// Fixed chunk count for reductions: the combine order never depends on the
// thread count, so results are reproducible bit for bit.
constexpr std::size_t kChunks = 256;

// Below this size the fork/join overhead of a parallel region swamps the
// loop body; the chunk decomposition is the same either way, so results
// do not change.
constexpr std::size_t kParallelMin = std::size_t(1) << 15;

inline bool parallel_on(std::size_t n) {
#ifdef AQS_HAVE_OPENMP
    return n >= kParallelMin && g_mode.load(std::memory_order_relaxed) == ExecMode::parallel;
#else
    (void)n;
    return false;
#endif
}
} // namespace

ExecMode exec_mode() { return g_mode.load(std::memory_order_relaxed); }
void set_exec_mode(ExecMode m) { g_mode.store(m, std::memory_order_relaxed); }

int max_threads() {
#ifdef AQS_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace kern {

cplx dot_ref(const cplx* a, const cplx* b, std::size_t n) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2_ref(const cplx* v, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(v[i]);
    return acc;
}

void scale_ref(cplx* v, cplx c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] *= c;
}

void axpy_ref(cplx* v, cplx c, const cplx* u, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) v[i] += c * u[i];
}

void phase_unmarked_ref(cplx* v, const std::uint8_t* marked, cplx phase, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (!marked[i]) v[i] *= phase;
}

double masked_mass_ref(const cplx* v, const std::uint8_t* marked, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (marked[i]) acc += std::norm(v[i]);
    return acc;
}

namespace {

struct ChunkRange {
    std::size_t lo, hi;
};

inline ChunkRange chunk_range(std::size_t c, std::size_t n) {
    const std::size_t step = (n + kChunks - 1) / kChunks;
    const std::size_t lo = std::min(n, c * step);
    const std::size_t hi = std::min(n, lo + step);
    return {lo, hi};
}

template <class PerChunk>
void run_chunks(std::size_t n, const PerChunk& f) {
    if (n == 0) return;
#ifdef AQS_HAVE_OPENMP
    if (parallel_on(n)) {
#pragma omp parallel for schedule(static)
        for (long c = 0; c < static_cast<long>(kChunks); ++c)
            f(static_cast<std::size_t>(c));
        return;
    }
#endif
    for (std::size_t c = 0; c < kChunks; ++c) f(c);
}

} // namespace

cplx dot(const cplx* a, const cplx* b, std::size_t n) {
    cplx partial[kChunks] = {};
    run_chunks(n, [&](std::size_t c) {
        auto [lo, hi] = chunk_range(c, n);
        cplx acc{0.0, 0.0};
        for (std::size_t i = lo; i < hi; ++i) acc += std::conj(a[i]) * b[i];
        partial[c] = acc;
    });
    cplx total{0.0, 0.0};
    for (std::size_t c = 0; c < kChunks; ++c) total += partial[c];
    return total;
}

cplx sum(const cplx* v, std::size_t n) {
    cplx partial[kChunks] = {};
    run_chunks(n, [&](std::size_t c) {
        auto [lo, hi] = chunk_range(c, n);
        cplx acc{0.0, 0.0};
        for (std::size_t i = lo; i < hi; ++i) acc += v[i];
        partial[c] = acc;
    });
    cplx total{0.0, 0.0};
    for (std::size_t c = 0; c < kChunks; ++c) total += partial[c];
    return total;
}

double norm2(const cplx* v, std::size_t n) {
    double partial[kChunks] = {};
    run_chunks(n, [&](std::size_t c) {
        auto [lo, hi] = chunk_range(c, n);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += std::norm(v[i]);
        partial[c] = acc;
    });
    double total = 0.0;
    for (std::size_t c = 0; c < kChunks; ++c) total += partial[c];
    return total;
}

void scale(cplx* v, cplx c, std::size_t n) {
    run_chunks(n, [&](std::size_t ci) {
        auto [lo, hi] = chunk_range(ci, n);
        for (std::size_t i = lo; i < hi; ++i) v[i] *= c;
    });
}

void axpy(cplx* v, cplx c, const cplx* u, std::size_t n) {
    run_chunks(n, [&](std::size_t ci) {
        auto [lo, hi] = chunk_range(ci, n);
        for (std::size_t i = lo; i < hi; ++i) v[i] += c * u[i];
    });
}

void add_scaled_two(cplx* out, double ca, const cplx* a, double cb, const cplx* b,
                    std::size_t n) {
    run_chunks(n, [&](std::size_t ci) {
        auto [lo, hi] = chunk_range(ci, n);
        for (std::size_t i = lo; i < hi; ++i) out[i] = ca * a[i] + cb * b[i];
    });
}

void phase_unmarked(cplx* v, const std::uint8_t* marked, cplx phase, std::size_t n) {
    run_chunks(n, [&](std::size_t ci) {
        auto [lo, hi] = chunk_range(ci, n);
        for (std::size_t i = lo; i < hi; ++i)
            if (!marked[i]) v[i] *= phase;
    });
}

void zero_marked(cplx* out, const cplx* v, const std::uint8_t* marked, std::size_t n) {
    run_chunks(n, [&](std::size_t ci) {
        auto [lo, hi] = chunk_range(ci, n);
        for (std::size_t i = lo; i < hi; ++i) out[i] = marked[i] ? cplx{0.0, 0.0} : v[i];
    });
}

double masked_mass(const cplx* v, const std::uint8_t* marked, std::size_t n) {
    double partial[kChunks] = {};
    run_chunks(n, [&](std::size_t c) {
        auto [lo, hi] = chunk_range(c, n);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            if (marked[i]) acc += std::norm(v[i]);
        partial[c] = acc;
    });
    double total = 0.0;
    for (std::size_t c = 0; c < kChunks; ++c) total += partial[c];
    return total;
}

double max_abs_diff(const cplx* a, const cplx* b, std::size_t n) {
    double partial[kChunks] = {};
    run_chunks(n, [&](std::size_t c) {
        auto [lo, hi] = chunk_range(c, n);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc = std::max(acc, std::abs(a[i] - b[i]));
        partial[c] = acc;
    });
    double total = 0.0;
    for (std::size_t c = 0; c < kChunks; ++c) total = std::max(total, partial[c]);
    return total;
}

} // namespace kern
} // namespace aqs
