#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "aqs/csp.hpp"
#include "aqs/hilbert.hpp"
#include "aqs/nested.hpp"

using namespace aqs;

namespace {

StateVector random_state(std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    StateVector v;
    v.amp.resize(dim);
    for (auto& x : v.amp) x = cplx{g(rng), g(rng)};
    v.normalize();
    return v;
}

std::vector<std::uint8_t> random_marked(std::size_t dim, std::uint64_t seed, double p = 0.3) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    std::vector<std::uint8_t> m(dim, 0);
    for (auto& b : m) b = coin(rng) ? 1 : 0;
    return m;
}

Eigen::VectorXcd to_eigen(const StateVector& v) {
    Eigen::VectorXcd e(static_cast<long>(v.dim()));
    for (std::size_t i = 0; i < v.dim(); ++i) e(static_cast<long>(i)) = v.amp[i];
    return e;
}

// A small assortment of exponential-supported operators on dimension 8.
std::vector<HamPtr> sample_hams(std::uint64_t seed) {
    std::vector<HamPtr> out;
    out.push_back(make_diagonal_marked(random_marked(8, seed)));
    out.push_back(make_rank_one_uniform(8));
    out.push_back(make_rank_one_state(random_state(8, seed + 1).amp));
    out.push_back(make_tensor_extended(make_rank_one_uniform(4), 1, 2));
    out.push_back(make_tensor_extended(make_diagonal_marked(random_marked(2, seed + 2, 0.5)), 2, 2));
    out.push_back(make_tensor_extended(make_rank_one_uniform(2), 4, 1));
    return out;
}

} // namespace

TEST_CASE("uniform_state") {
    auto v1 = uniform_state(2, 1);
    CHECK(v1.amp[0].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(v1.amp[1].real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(v1.amp[0].imag() == 0.0);

    auto v3 = uniform_state(2, 3);
    for (const auto& a : v3.amp) CHECK(a.real() == doctest::Approx(std::pow(2.0, -1.5)));
    CHECK(v3.norm() == doctest::Approx(1.0));

    auto v9 = uniform_state(3, 2);
    CHECK(v9.dim() == 9);
    for (const auto& a : v9.amp) CHECK(a.real() == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(uniform_state(2, 20, 1 << 10), resource_error);
}

TEST_CASE("apply: marked basis state is annihilated, |s> is the rank-one ground state") {
    std::vector<std::uint8_t> marked(8, 0);
    marked[5] = 1;
    auto h = make_diagonal_marked(marked);
    auto v = basis_state(8, 5);
    auto out = apply(*h, v);
    for (const auto& a : out) CHECK(std::abs(a) == 0.0);

    auto hs = make_rank_one_uniform(8);
    auto s = uniform_state(2, 3);
    auto out2 = apply(*hs, s);
    for (const auto& a : out2) CHECK(std::abs(a) < 1e-14);
}

TEST_CASE("apply of random affine pairs matches the dense expansion") {
    for (std::uint64_t seed : {10ULL, 11ULL, 12ULL}) {
        auto hi = make_rank_one_uniform(16);
        auto hf = make_diagonal_marked(random_marked(16, seed));
        auto h = make_affine(0.3, hi, 0.7, hf);
        const auto dense = to_dense(*h);
        for (int t = 0; t < 5; ++t) {
            auto v = random_state(16, 100 * seed + t);
            auto out = apply(*h, v);
            Eigen::VectorXcd expect = dense * to_eigen(v);
            for (std::size_t i = 0; i < 16; ++i)
                CHECK(std::abs(out[i] - expect(static_cast<long>(i))) < 1e-12);
        }
    }
}

TEST_CASE("exact_exponential: theta = 0 is the identity; pi on a marked set flips phases") {
    auto v = random_state(8, 3);
    auto w = v;
    apply_exponential(*make_rank_one_uniform(8), 0.0, w);
    for (std::size_t i = 0; i < 8; ++i) CHECK(w.amp[i] == v.amp[i]);

    std::vector<std::uint8_t> marked(4, 0);
    marked[2] = 1;
    auto h = make_diagonal_marked(marked);
    auto x = basis_state(4, 1);
    apply_exponential(*h, M_PI, x);
    CHECK(x.amp[1].real() == doctest::Approx(-1.0));
    auto m = basis_state(4, 2);
    apply_exponential(*h, M_PI, m);
    CHECK(m.amp[2].real() == doctest::Approx(1.0));
}

TEST_CASE("exact_exponential matches dense eigendecomposition exponentials") {
    for (std::uint64_t seed : {20ULL, 21ULL}) {
        for (const auto& h : sample_hams(seed)) {
            const auto u = dense_exponential(to_dense(*h), 0.37);
            for (int t = 0; t < 3; ++t) {
                auto v = random_state(h->dim(), seed + 31 * t);
                auto w = v;
                apply_exponential(*h, 0.37, w);
                Eigen::VectorXcd expect = u * to_eigen(v);
                for (std::size_t i = 0; i < h->dim(); ++i)
                    CHECK(std::abs(w.amp[i] - expect(static_cast<long>(i))) < 1e-10);
            }
        }
    }
}

TEST_CASE("exact_exponential preserves norm") {
    for (const auto& h : sample_hams(77)) {
        for (double theta : {0.1, 1.0, 2.5, -0.7}) {
            auto v = random_state(h->dim(), 5);
            auto w = v;
            apply_exponential(*h, theta, w);
            CHECK(std::abs(w.norm() - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("exponential of an affine node is a contract error") {
    auto h = make_affine(0.5, make_rank_one_uniform(4), 0.5,
                         make_diagonal_marked(random_marked(4, 1)));
    auto v = random_state(4, 2);
    CHECK_THROWS_AS(apply_exponential(*h, 0.3, v), contract_error);
}

TEST_CASE("expm_apply agrees with dense exponentials on affine pairs") {
    auto hi = make_rank_one_uniform(16);
    auto hf = make_diagonal_marked(random_marked(16, 5));
    auto h = make_affine(0.6, hi, 0.4, hf);
    const auto u = dense_exponential(to_dense(*h), 1.3);
    auto v = random_state(16, 9);
    auto w = v;
    expm_apply(*h, 1.3, w);
    Eigen::VectorXcd expect = u * to_eigen(v);
    for (std::size_t i = 0; i < 16; ++i)
        CHECK(std::abs(w.amp[i] - expect(static_cast<long>(i))) < 1e-10);
}

TEST_CASE("to_dense closed forms") {
    auto r = to_dense(*make_rank_one_uniform(2));
    CHECK(r(0, 0).real() == doctest::Approx(0.5));
    CHECK(r(0, 1).real() == doctest::Approx(-0.5));
    CHECK(r(1, 0).real() == doctest::Approx(-0.5));
    CHECK(r(1, 1).real() == doctest::Approx(0.5));

    std::vector<std::uint8_t> marked = {1, 0};
    auto d = to_dense(*make_diagonal_marked(marked));
    CHECK(d(0, 0).real() == doctest::Approx(0.0));
    CHECK(d(1, 1).real() == doctest::Approx(1.0));

    auto hi = make_rank_one_uniform(4);
    auto hf = make_diagonal_marked(random_marked(4, 3));
    const Eigen::MatrixXcd aff = to_dense(*make_affine(0.5, hi, 0.5, hf));
    const Eigen::MatrixXcd expect = 0.5 * to_dense(*hi) + 0.5 * to_dense(*hf);
    CHECK((aff - expect).norm() < 1e-14);

    CHECK_THROWS_AS(to_dense(*make_rank_one_uniform(1 << 13)), resource_error);
}

TEST_CASE("dense expansions are Hermitian") {
    for (const auto& h : sample_hams(123)) {
        const auto d = to_dense(*h);
        CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("operator_norm basics") {
    CHECK(operator_norm(Eigen::MatrixXcd::Identity(8, 8)) == doctest::Approx(1.0));
    CHECK(operator_norm(Eigen::MatrixXcd::Zero(6, 6)) == doctest::Approx(0.0));
}

TEST_CASE("matrix-free spectral norms agree with dense SVD") {
    auto hi = make_rank_one_uniform(32);
    auto hf = make_diagonal_marked(random_marked(32, 8));
    auto diff = make_affine(1.0, hi, -1.0, hf);
    CHECK(spectral_norm_matfree(*diff) ==
          doctest::Approx(operator_norm(to_dense(*hi) - to_dense(*hf))).epsilon(1e-7));

    const auto hi_d = to_dense(*hi);
    const auto hf_d = to_dense(*hf);
    const Eigen::MatrixXcd comm = hi_d * hf_d - hf_d * hi_d;
    CHECK(commutator_norm_matfree(*hi, *hf) ==
          doctest::Approx(operator_norm(comm)).epsilon(1e-7));
}

TEST_CASE("gap profile of the unstructured pair: closed form, including M > 1") {
    const auto grid = uniform_grid(33);
    for (std::uint64_t m_count : {1ULL, 3ULL}) {
        const std::uint64_t n_states = 16;
        std::vector<std::uint8_t> marked(n_states, 0);
        for (std::uint64_t i = 0; i < m_count; ++i) marked[2 * i + 1] = 1;
        auto hi = make_rank_one_uniform(n_states);
        auto hf = make_diagonal_marked(marked);
        auto numeric = gap_profile(*hi, *hf, grid);
        auto analytic =
            two_level_profile(static_cast<double>(m_count) / static_cast<double>(n_states), grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(numeric.gap[i] == doctest::Approx(analytic.gap[i]).epsilon(1e-9));
            CHECK(numeric.dmat[i] == doctest::Approx(analytic.dmat[i]).epsilon(1e-7));
            const double s = grid[i];
            CHECK(numeric.gap[i] * numeric.gap[i] ==
                  doctest::Approx(1.0 - 4.0 * (1.0 - double(m_count) / double(n_states)) * s *
                                            (1.0 - s))
                      .epsilon(1e-9));
        }
        CHECK(numeric.gap[0] == doctest::Approx(1.0)); // projector spectrum at s=0
    }
}

TEST_CASE("gap profile minimum: N=4, M=1 gives 0.5 at the center") {
    const auto grid = uniform_grid(65);
    std::vector<std::uint8_t> marked(4, 0);
    marked[2] = 1;
    auto p = gap_profile(*make_rank_one_uniform(4), *make_diagonal_marked(marked), grid);
    CHECK(p.g_min() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("ground-space dimension of the problem Hamiltonian equals the census") {
    auto ins = generate_random_ksat(8, 18, 3, 31);
    auto cen = census(ins, {4, 4});
    auto sol = satisfying_bitmap(ins, 8);
    auto h = make_diagonal_marked(sol);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_dense(*h));
    long zeros = 0;
    for (long i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) < 1e-12) ++zeros;
    CHECK(static_cast<std::uint64_t>(zeros) == cen.m_ab);
}

TEST_CASE("unitary program replay: forward then inverse is the identity") {
    UnitaryProgram prog;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> angle(-1.5, 1.5);
    for (const auto& h : sample_hams(55)) prog.factors.push_back({h, angle(rng)});
    auto prog_ptr = std::make_shared<UnitaryProgram>(prog);

    for (int t = 0; t < 5; ++t) {
        auto v = random_state(8, 400 + t);
        auto w = v;
        prog_ptr->apply_forward(w);
        prog_ptr->apply_inverse(w);
        for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(w.amp[i] - v.amp[i]) < 1e-12);
    }

    // conjugated Hamiltonian: exponential equals U e^{-i theta H0} U^dag
    auto h0 = make_rank_one_uniform(8);
    auto hc = make_conjugated(prog_ptr, h0);
    const Eigen::MatrixXcd u_dense = dense_of_program(*prog_ptr, 8);
    const Eigen::MatrixXcd expect =
        u_dense * dense_exponential(to_dense(*h0), 0.9) * u_dense.adjoint();
    auto v = random_state(8, 21);
    auto w = v;
    apply_exponential(*hc, 0.9, w);
    Eigen::VectorXcd ev = expect * to_eigen(v);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(std::abs(w.amp[i] - ev(static_cast<long>(i))) < 1e-10);
}

TEST_CASE("oracle equivalence battery at mixed dimensions") {
    // matrix-free apply and exponentials vs dense linear algebra on random
    // vectors; 100 vectors spread over dims up to 2^10
    std::size_t vectors_checked = 0;
    for (std::size_t dim : {16ULL, 64ULL, 256ULL, 1024ULL}) {
        auto hi = make_rank_one_uniform(dim);
        auto hf = make_diagonal_marked(random_marked(dim, dim));
        auto aff = make_affine(0.45, hi, 0.55, hf);
        const auto dense_h = to_dense(*aff);
        const auto dense_u = dense_exponential(to_dense(*hf), 0.8);
        const int reps = dim <= 256 ? 30 : 10;
        for (int t = 0; t < reps; ++t) {
            auto v = random_state(dim, 1000 * dim + t);
            auto out = apply(*aff, v);
            Eigen::VectorXcd expect = dense_h * to_eigen(v);
            double max_err = 0.0;
            for (std::size_t i = 0; i < dim; ++i)
                max_err = std::max(max_err, std::abs(out[i] - expect(static_cast<long>(i))));
            CHECK(max_err < 1e-10);

            auto w = v;
            apply_exponential(*hf, 0.8, w);
            Eigen::VectorXcd expect2 = dense_u * to_eigen(v);
            max_err = 0.0;
            for (std::size_t i = 0; i < dim; ++i)
                max_err = std::max(max_err, std::abs(w.amp[i] - expect2(static_cast<long>(i))));
            CHECK(max_err < 1e-10);
            ++vectors_checked;
        }
    }
    CHECK(vectors_checked == 100);
}
