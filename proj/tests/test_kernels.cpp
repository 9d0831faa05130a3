#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>

#include "aqs/kernels.hpp"

using namespace aqs;

namespace {

std::vector<cplx> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> v(n);
    for (auto& x : v) x = cplx{g(rng), g(rng)};
    return v;
}

struct ModeGuard {
    ExecMode saved = exec_mode();
    ~ModeGuard() { set_exec_mode(saved); }
};

} // namespace

TEST_CASE("chunked kernels match the serial references") {
    for (std::size_t n : {std::size_t(1), std::size_t(7), std::size_t(255), std::size_t(4096),
                          std::size_t(100000)}) {
        auto a = random_vec(n, 11 + n);
        auto b = random_vec(n, 23 + n);
        const cplx d_ref = kern::dot_ref(a.data(), b.data(), n);
        const cplx d = kern::dot(a.data(), b.data(), n);
        CHECK(std::abs(d - d_ref) <= 1e-10 * (1.0 + std::abs(d_ref)));
        CHECK(kern::norm2(a.data(), n) ==
              doctest::Approx(kern::norm2_ref(a.data(), n)).epsilon(1e-12));

        auto v1 = a, v2 = a;
        kern::axpy(v1.data(), cplx{0.3, -0.7}, b.data(), n);
        kern::axpy_ref(v2.data(), cplx{0.3, -0.7}, b.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(v1[i] == v2[i]);

        std::vector<std::uint8_t> marked(n, 0);
        for (std::size_t i = 0; i < n; i += 3) marked[i] = 1;
        auto p1 = a, p2 = a;
        kern::phase_unmarked(p1.data(), marked.data(), cplx{0.0, 1.0}, n);
        kern::phase_unmarked_ref(p2.data(), marked.data(), cplx{0.0, 1.0}, n);
        for (std::size_t i = 0; i < n; ++i) CHECK(p1[i] == p2[i]);
        CHECK(kern::masked_mass(a.data(), marked.data(), n) ==
              doctest::Approx(kern::masked_mass_ref(a.data(), marked.data(), n)).epsilon(1e-12));
    }
}

TEST_CASE("serial and parallel modes give bit-identical reductions") {
    ModeGuard guard;
    const std::size_t n = 1 << 17; // above the parallel threshold
    auto a = random_vec(n, 5);
    auto b = random_vec(n, 6);

    set_exec_mode(ExecMode::serial);
    const cplx d_serial = kern::dot(a.data(), b.data(), n);
    const double n_serial = kern::norm2(a.data(), n);

    set_exec_mode(ExecMode::parallel);
    const cplx d_par = kern::dot(a.data(), b.data(), n);
    const double n_par = kern::norm2(a.data(), n);

    CHECK(std::memcmp(&d_serial, &d_par, sizeof d_serial) == 0);
    CHECK(std::memcmp(&n_serial, &n_par, sizeof n_serial) == 0);
}

TEST_CASE("zero_marked and add_scaled_two") {
    const std::size_t n = 1000;
    auto v = random_vec(n, 7);
    std::vector<std::uint8_t> marked(n, 0);
    marked[3] = marked[500] = 1;
    std::vector<cplx> out(n);
    kern::zero_marked(out.data(), v.data(), marked.data(), n);
    CHECK(out[3] == cplx{0.0, 0.0});
    CHECK(out[500] == cplx{0.0, 0.0});
    CHECK(out[4] == v[4]);

    auto b = random_vec(n, 8);
    std::vector<cplx> res(n);
    kern::add_scaled_two(res.data(), 0.25, v.data(), -0.5, b.data(), n);
    for (std::size_t i = 0; i < n; i += 97)
        CHECK(std::abs(res[i] - (0.25 * v[i] - 0.5 * b[i])) <= 1e-15);
}

TEST_CASE("max_abs_diff") {
    auto a = random_vec(512, 9);
    auto b = a;
    CHECK(kern::max_abs_diff(a.data(), b.data(), a.size()) == 0.0);
    b[77] += cplx{0.0, 0.5};
    CHECK(kern::max_abs_diff(a.data(), b.data(), a.size()) == doctest::Approx(0.5));
}
