#include "aqs/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#ifdef AQS_HAVE_OPENMP
#include <omp.h>
#endif

namespace aqs {

namespace {

constexpr double kDegeneracyTol = 1e-9;
constexpr double kCouplingTol = 1e-8;

inline bool parallel_on() { return exec_mode() == ExecMode::parallel; }

// Elementwise loops only pay for a parallel region when the array is big.
inline bool parallel_for_size(std::size_t n) {
    return n >= (std::size_t(1) << 15) && parallel_on();
}

} // namespace

double StateVector::norm() const { return std::sqrt(kern::norm2(amp.data(), amp.size())); }

void StateVector::normalize() {
    const double n = norm();
    if (n == 0.0) throw input_error("cannot normalize the zero vector");
    kern::scale(amp.data(), cplx{1.0 / n, 0.0}, amp.size());
}

StateVector uniform_state(int d, int n, std::uint64_t cap) {
    if (d < 2 || n < 0) throw input_error("uniform_state: bad register shape");
    std::uint64_t dim = 1;
    for (int i = 0; i < n; ++i) {
        dim *= static_cast<std::uint64_t>(d);
        if (dim > cap) throw resource_error("uniform_state: d^n exceeds cap");
    }
    StateVector v;
    v.amp.assign(dim, cplx{1.0 / std::sqrt(static_cast<double>(dim)), 0.0});
    return v;
}

StateVector basis_state(std::size_t dim, std::size_t index) {
    if (index >= dim) throw input_error("basis_state: index out of range");
    StateVector v;
    v.amp.assign(dim, cplx{0.0, 0.0});
    v.amp[index] = cplx{1.0, 0.0};
    return v;
}

double fidelity(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw input_error("fidelity: dimension mismatch");
    return std::norm(kern::dot(a.amp.data(), b.amp.data(), a.dim()));
}

// ---------------------------------------------------------------------------
// StructuredHamiltonian basics

std::size_t StructuredHamiltonian::dim() const {
    return std::visit(
        [](const auto& n) -> std::size_t {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, DiagonalMarked>) return n.marked.size();
            else if constexpr (std::is_same_v<T, RankOneUniform>) return n.dim;
            else if constexpr (std::is_same_v<T, RankOneState>) return n.psi.size();
            else if constexpr (std::is_same_v<T, TensorExtended>)
                return n.below * n.inner->dim() * n.above;
            else if constexpr (std::is_same_v<T, Affine>) return n.hi->dim();
            else return n.inner->dim();
        },
        node);
}

bool StructuredHamiltonian::is_real() const {
    return std::visit(
        [](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, DiagonalMarked>) return true;
            else if constexpr (std::is_same_v<T, RankOneUniform>) return true;
            else if constexpr (std::is_same_v<T, RankOneState>) {
                for (const auto& c : n.psi)
                    if (c.imag() != 0.0) return false;
                return true;
            } else if constexpr (std::is_same_v<T, TensorExtended>)
                return n.inner->is_real();
            else if constexpr (std::is_same_v<T, Affine>)
                return n.hi->is_real() && n.hf->is_real();
            else
                return false; // conjugation by a generic program
        },
        node);
}

double StructuredHamiltonian::norm_bound() const {
    return std::visit(
        [](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, DiagonalMarked>) return 1.0;
            else if constexpr (std::is_same_v<T, RankOneUniform>) return 1.0;
            else if constexpr (std::is_same_v<T, RankOneState>) return 1.0;
            else if constexpr (std::is_same_v<T, TensorExtended>) return n.inner->norm_bound();
            else if constexpr (std::is_same_v<T, Affine>)
                return std::abs(n.ci) * n.hi->norm_bound() + std::abs(n.cf) * n.hf->norm_bound();
            else
                return n.inner->norm_bound();
        },
        node);
}

HamPtr make_diagonal_marked(std::vector<std::uint8_t> marked) {
    if (marked.empty()) throw input_error("diagonal-marked Hamiltonian needs a nonzero dimension");
    return std::make_shared<StructuredHamiltonian>(
        StructuredHamiltonian{StructuredHamiltonian::DiagonalMarked{std::move(marked)}});
}

HamPtr make_rank_one_uniform(std::size_t dim) {
    if (dim == 0) throw input_error("rank-one Hamiltonian needs a nonzero dimension");
    return std::make_shared<StructuredHamiltonian>(
        StructuredHamiltonian{StructuredHamiltonian::RankOneUniform{dim}});
}

HamPtr make_rank_one_state(std::vector<cplx> psi) {
    if (psi.empty()) throw input_error("rank-one Hamiltonian needs a nonzero dimension");
    const double n2 = kern::norm2(psi.data(), psi.size());
    if (std::abs(n2 - 1.0) > 1e-8)
        throw input_error("rank-one state must be normalized");
    return std::make_shared<StructuredHamiltonian>(
        StructuredHamiltonian{StructuredHamiltonian::RankOneState{std::move(psi)}});
}

HamPtr make_tensor_extended(HamPtr inner, std::size_t below, std::size_t above) {
    if (!inner || below == 0 || above == 0) throw input_error("bad tensor extension");
    return std::make_shared<StructuredHamiltonian>(
        StructuredHamiltonian{StructuredHamiltonian::TensorExtended{std::move(inner), below, above}});
}

HamPtr make_affine(double ci, HamPtr hi, double cf, HamPtr hf) {
    if (!hi || !hf || hi->dim() != hf->dim()) throw input_error("affine parts must share a dimension");
    return std::make_shared<StructuredHamiltonian>(
        StructuredHamiltonian{StructuredHamiltonian::Affine{ci, std::move(hi), cf, std::move(hf)}});
}

HamPtr make_conjugated(ProgramPtr u, HamPtr inner) {
    if (!u || !inner) throw input_error("bad conjugated Hamiltonian");
    return std::make_shared<StructuredHamiltonian>(
        StructuredHamiltonian{StructuredHamiltonian::Conjugated{std::move(u), std::move(inner)}});
}

// ---------------------------------------------------------------------------
// Matrix-free apply

namespace {

// Visits every identity-extended slice of a tensor node. below==1 gives
// contiguous slices; the general case gathers with stride.
template <class SliceFn>
void for_each_slice(const StructuredHamiltonian::TensorExtended& t, std::size_t inner_dim,
                    const SliceFn& fn) {
    const std::size_t below = t.below;
    const std::size_t above = t.above;
    const std::size_t outer = below * above;
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel_for_size(outer * inner_dim) && outer > 1)
#endif
    for (long o = 0; o < static_cast<long>(outer); ++o) {
        const std::size_t a = static_cast<std::size_t>(o) / below;
        const std::size_t b = static_cast<std::size_t>(o) % below;
        const std::size_t base = b + below * inner_dim * a;
        fn(base, below); // element j of the slice lives at base + j*below
    }
}

} // namespace

void apply(const StructuredHamiltonian& h, std::span<const cplx> in, std::span<cplx> out) {
    const std::size_t dim = h.dim();
    if (in.size() != dim || out.size() != dim) throw input_error("apply: dimension mismatch");

    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, StructuredHamiltonian::DiagonalMarked>) {
                kern::zero_marked(out.data(), in.data(), n.marked.data(), dim);
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::RankOneUniform>) {
                const cplx mean = kern::sum(in.data(), dim) / static_cast<double>(dim);
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel_for_size(dim))
#endif
                for (long i = 0; i < static_cast<long>(dim); ++i)
                    out[static_cast<std::size_t>(i)] = in[static_cast<std::size_t>(i)] - mean;
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::RankOneState>) {
                const cplx c = kern::dot(n.psi.data(), in.data(), dim);
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel_for_size(dim))
#endif
                for (long i = 0; i < static_cast<long>(dim); ++i)
                    out[static_cast<std::size_t>(i)] =
                        in[static_cast<std::size_t>(i)] - c * n.psi[static_cast<std::size_t>(i)];
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::TensorExtended>) {
                // Nested OpenMP regions collapse to one thread, so the inner
                // apply never oversubscribes the slice loop.
                const std::size_t inner_dim = n.inner->dim();
                for_each_slice(n, inner_dim, [&](std::size_t base, std::size_t stride) {
                    if (stride == 1) {
                        apply(*n.inner, in.subspan(base, inner_dim), out.subspan(base, inner_dim));
                    } else {
                        std::vector<cplx> buf_in(inner_dim), buf_out(inner_dim);
                        for (std::size_t j = 0; j < inner_dim; ++j) buf_in[j] = in[base + j * stride];
                        apply(*n.inner, buf_in, buf_out);
                        for (std::size_t j = 0; j < inner_dim; ++j) out[base + j * stride] = buf_out[j];
                    }
                });
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::Affine>) {
                std::vector<cplx> tmp(dim);
                apply(*n.hi, in, tmp);
                apply(*n.hf, in, out);
                kern::add_scaled_two(out.data(), n.cf, out.data(), n.ci, tmp.data(), dim);
            } else { // Conjugated
                StateVector w;
                w.amp.assign(in.begin(), in.end());
                n.u->apply_inverse(w);
                std::vector<cplx> tmp(dim);
                apply(*n.inner, w.amp, tmp);
                w.amp = std::move(tmp);
                n.u->apply_forward(w);
                std::copy(w.amp.begin(), w.amp.end(), out.begin());
            }
        },
        h.node);
}

std::vector<cplx> apply(const StructuredHamiltonian& h, const StateVector& v) {
    std::vector<cplx> out(v.dim());
    apply(h, v.amp, out);
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form exponentials

namespace {

void exp_span(const StructuredHamiltonian& h, double theta, std::span<cplx> v);

void exp_rank_one_update(std::span<cplx> v, double theta, const cplx overlap_coeff,
                         const cplx* psi, std::size_t dim) {
    // v <- e^{-i theta} v + (1 - e^{-i theta}) <psi|v> psi, overlap precomputed
    const cplx ph = std::polar(1.0, -theta);
    const cplx w = (cplx{1.0, 0.0} - ph) * overlap_coeff;
    kern::scale(v.data(), ph, v.size());
    if (psi) {
        kern::axpy(v.data(), w, psi, v.size());
    } else {
        // uniform |s>: add w / sqrt(dim) to every amplitude
        const cplx add = w / std::sqrt(static_cast<double>(dim));
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel_for_size(dim))
#endif
        for (long i = 0; i < static_cast<long>(dim); ++i) v[static_cast<std::size_t>(i)] += add;
    }
}

void exp_span(const StructuredHamiltonian& h, double theta, std::span<cplx> v) {
    const std::size_t dim = h.dim();
    if (v.size() != dim) throw input_error("exponential: dimension mismatch");

    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, StructuredHamiltonian::DiagonalMarked>) {
                kern::phase_unmarked(v.data(), n.marked.data(), std::polar(1.0, -theta), dim);
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::RankOneUniform>) {
                const cplx overlap =
                    kern::sum(v.data(), dim) / std::sqrt(static_cast<double>(dim));
                exp_rank_one_update(v, theta, overlap, nullptr, dim);
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::RankOneState>) {
                const cplx overlap = kern::dot(n.psi.data(), v.data(), dim);
                exp_rank_one_update(v, theta, overlap, n.psi.data(), dim);
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::TensorExtended>) {
                const std::size_t inner_dim = n.inner->dim();
                for_each_slice(n, inner_dim, [&](std::size_t base, std::size_t stride) {
                    if (stride == 1) {
                        exp_span(*n.inner, theta, v.subspan(base, inner_dim));
                    } else {
                        std::vector<cplx> buf(inner_dim);
                        for (std::size_t j = 0; j < inner_dim; ++j) buf[j] = v[base + j * stride];
                        exp_span(*n.inner, theta, buf);
                        for (std::size_t j = 0; j < inner_dim; ++j) v[base + j * stride] = buf[j];
                    }
                });
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::Affine>) {
                throw contract_error("exact exponential of an affine combination is unsupported");
            } else { // Conjugated: U e^{-i theta H0} U^dag
                StateVector w;
                w.amp.assign(v.begin(), v.end());
                n.u->apply_inverse(w);
                exp_span(*n.inner, theta, w.amp);
                n.u->apply_forward(w);
                std::copy(w.amp.begin(), w.amp.end(), v.begin());
            }
        },
        h.node);
}

} // namespace

void apply_exponential(const StructuredHamiltonian& h, double theta, StateVector& v) {
    exp_span(h, theta, v.amp);
}

void UnitaryProgram::apply_forward(StateVector& v) const {
    for (const auto& f : factors) apply_exponential(*f.h, f.theta, v);
}

void UnitaryProgram::apply_inverse(StateVector& v) const {
    for (auto it = factors.rbegin(); it != factors.rend(); ++it)
        apply_exponential(*it->h, -it->theta, v);
}

// ---------------------------------------------------------------------------
// Taylor propagator for interpolated Hamiltonians

void expm_apply(const StructuredHamiltonian& h, double t, StateVector& v) {
    if (v.dim() != h.dim()) throw input_error("expm_apply: dimension mismatch");
    if (t == 0.0) return;
    const double bound = h.norm_bound();
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) * bound)));
    const double dt = t / steps;
    const std::size_t dim = v.dim();

    std::vector<cplx> term(dim), next(dim);
    for (int s = 0; s < steps; ++s) {
        std::copy(v.amp.begin(), v.amp.end(), term.begin());
        for (int k = 1; k <= 64; ++k) {
            apply(h, term, next);
            const cplx coeff = cplx{0.0, -dt} / static_cast<double>(k);
            kern::scale(next.data(), coeff, dim);
            std::swap(term, next);
            kern::axpy(v.amp.data(), cplx{1.0, 0.0}, term.data(), dim);
            if (kern::norm2(term.data(), dim) < 1e-32) break;
        }
    }
}

// ---------------------------------------------------------------------------
// Dense expansion (verification oracle)

Eigen::MatrixXcd to_dense(const StructuredHamiltonian& h, std::size_t dense_cap) {
    const std::size_t dim = h.dim();
    if (dim > dense_cap) throw resource_error("to_dense: dimension exceeds dense cap");
    using Mat = Eigen::MatrixXcd;

    return std::visit(
        [&](const auto& n) -> Mat {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, StructuredHamiltonian::DiagonalMarked>) {
                Mat m = Mat::Zero(static_cast<long>(dim), static_cast<long>(dim));
                for (std::size_t i = 0; i < dim; ++i)
                    m(static_cast<long>(i), static_cast<long>(i)) = n.marked[i] ? 0.0 : 1.0;
                return m;
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::RankOneUniform>) {
                Mat m = Mat::Constant(static_cast<long>(dim), static_cast<long>(dim),
                                      cplx{-1.0 / static_cast<double>(dim), 0.0});
                m.diagonal().array() += 1.0;
                return m;
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::RankOneState>) {
                Eigen::VectorXcd p(static_cast<long>(dim));
                for (std::size_t i = 0; i < dim; ++i) p(static_cast<long>(i)) = n.psi[i];
                Mat m = Mat::Identity(static_cast<long>(dim), static_cast<long>(dim));
                m.noalias() -= p * p.adjoint();
                return m;
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::TensorExtended>) {
                const std::size_t inner_dim = n.inner->dim();
                Mat inner = to_dense(*n.inner, dense_cap);
                Mat m = Mat::Zero(static_cast<long>(dim), static_cast<long>(dim));
                for (std::size_t a = 0; a < n.above; ++a)
                    for (std::size_t j = 0; j < inner_dim; ++j)
                        for (std::size_t jp = 0; jp < inner_dim; ++jp)
                            for (std::size_t b = 0; b < n.below; ++b) {
                                const std::size_t row = b + n.below * (j + inner_dim * a);
                                const std::size_t col = b + n.below * (jp + inner_dim * a);
                                m(static_cast<long>(row), static_cast<long>(col)) =
                                    inner(static_cast<long>(j), static_cast<long>(jp));
                            }
                return m;
            } else if constexpr (std::is_same_v<T, StructuredHamiltonian::Affine>) {
                return n.ci * to_dense(*n.hi, dense_cap) + n.cf * to_dense(*n.hf, dense_cap);
            } else {
                Mat u = dense_of_program(*n.u, dim);
                return u * to_dense(*n.inner, dense_cap) * u.adjoint();
            }
        },
        h.node);
}

double operator_norm(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols()) throw input_error("operator_norm: matrix must be square");
    if (a.rows() == 0) return 0.0;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues()(0);
}

Eigen::MatrixXcd dense_exponential(const Eigen::MatrixXcd& h, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw resource_error("dense eigendecomposition failed");
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    Eigen::VectorXcd phases(vals.size());
    for (long i = 0; i < vals.size(); ++i) phases(i) = std::polar(1.0, -t * vals(i));
    return vecs * phases.asDiagonal() * vecs.adjoint();
}

Eigen::MatrixXcd dense_of_program(const UnitaryProgram& u, std::size_t dim) {
    Eigen::MatrixXcd m(static_cast<long>(dim), static_cast<long>(dim));
    const bool par = parallel_on();
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
    for (long col = 0; col < static_cast<long>(dim); ++col) {
        StateVector v = basis_state(dim, static_cast<std::size_t>(col));
        u.apply_forward(v);
        for (std::size_t i = 0; i < dim; ++i) m(static_cast<long>(i), col) = v.amp[i];
    }
    (void)par;
    return m;
}

// ---------------------------------------------------------------------------
// Spectral norms by power iteration on A^2 (A Hermitian, so no shift needed)

namespace {

template <class ApplyFn>
double power_norm(std::size_t dim, double tol, const ApplyFn& apply_a) {
    std::mt19937_64 rng(0x5eedf00dULL);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> v(dim), w(dim), w2(dim);
    for (auto& x : v) x = cplx{g(rng), g(rng)};
    double n = std::sqrt(kern::norm2(v.data(), dim));
    kern::scale(v.data(), cplx{1.0 / n, 0.0}, dim);

    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        apply_a(v, w);
        apply_a(w, w2); // w2 = A^2 v
        const double new_lambda = std::sqrt(std::abs(kern::dot(v.data(), w2.data(), dim)));
        n = std::sqrt(kern::norm2(w2.data(), dim));
        if (n < 1e-300) return 0.0; // A^2 v vanished: norm is zero on this start
        kern::scale(w2.data(), cplx{1.0 / n, 0.0}, dim);
        std::swap(v, w2);
        if (it > 2 && std::abs(new_lambda - lambda) <= tol * std::max(1.0, new_lambda)) {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    return lambda;
}

} // namespace

double spectral_norm_matfree(const StructuredHamiltonian& h, double tol) {
    const std::size_t dim = h.dim();
    return power_norm(dim, tol, [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        apply(h, in, out);
    });
}

double commutator_norm_matfree(const StructuredHamiltonian& hi, const StructuredHamiltonian& hf,
                               double tol) {
    if (hi.dim() != hf.dim()) throw input_error("commutator: dimension mismatch");
    const std::size_t dim = hi.dim();
    std::vector<cplx> t1(dim), t2(dim), t3(dim);
    // K = i [Hi, Hf] is Hermitian with ||K|| = ||[Hi, Hf]||.
    return power_norm(dim, tol, [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
        apply(hf, in, t1);
        apply(hi, t1, t2); // Hi Hf in
        apply(hi, in, t1);
        apply(hf, t1, t3); // Hf Hi in
        for (std::size_t i = 0; i < dim; ++i) out[i] = cplx{0.0, 1.0} * (t2[i] - t3[i]);
    });
}

// ---------------------------------------------------------------------------
// Gap profiles

std::vector<double> uniform_grid(std::size_t points) {
    if (points < 2) throw input_error("grid needs at least two points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
    g.front() = 0.0;
    g.back() = 1.0;
    return g;
}

double GapProfile::g_min() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gap.size(); ++i)
        if (!flagged[i]) m = std::min(m, gap[i]);
    return m;
}

double GapProfile::d_max() const {
    double m = 0.0;
    for (double d : dmat) m = std::max(m, d);
    return m;
}

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.size() < 2) throw input_error("grid needs at least two points");
    if (std::abs(grid.front()) > 1e-12 || std::abs(grid.back() - 1.0) > 1e-12)
        throw input_error("grid must cover [0,1] inclusive");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw input_error("grid must be strictly increasing");
}

// One grid point of the dense-eigensolve route, shared by the real and
// complex paths. Returns (e0, e1_coupled, gap, dmat, ground_degenerate).
struct PointSpectral {
    double e0, e1, gap, dmat;
    bool degenerate;
};

template <class Matrix>
PointSpectral analyze_point(const Matrix& vals_vecs_h, const Matrix& dmatrix) {
    using Scalar = typename Matrix::Scalar;
    Eigen::SelfAdjointEigenSolver<Matrix> es(vals_vecs_h);
    if (es.info() != Eigen::Success) throw resource_error("eigensolve failed");
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    const long dim = vals.size();

    long g0 = 1;
    while (g0 < dim && vals(g0) - vals(0) <= kDegeneracyTol) ++g0;
    const bool degenerate = g0 > 1;

    // dH/ds applied to the ground block
    Matrix w = dmatrix * vecs.leftCols(g0);

    PointSpectral out{vals(0), vals(0), 0.0, 0.0, degenerate};
    long lo = g0;
    double fallback_e1 = lo < dim ? vals(lo) : vals(0);
    while (lo < dim) {
        long hi = lo + 1;
        while (hi < dim && vals(hi) - vals(lo) <= kDegeneracyTol) ++hi;
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> c =
            vecs.middleCols(lo, hi - lo).adjoint() * w;
        double coupling;
        if (c.rows() == 1 && c.cols() == 1) {
            coupling = std::abs(c(0, 0));
        } else {
            Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(c);
            coupling = svd.singularValues()(0);
        }
        if (coupling > kCouplingTol) {
            out.e1 = vals(lo);
            out.gap = vals(lo) - vals(0);
            out.dmat = coupling;
            return out;
        }
        lo = hi;
    }
    // Nothing couples: the ground space is invariant under dH/ds, so the
    // schedule is unconstrained at this point.
    out.e1 = fallback_e1;
    out.gap = fallback_e1 - vals(0);
    out.dmat = 0.0;
    return out;
}

} // namespace

GapProfile gap_profile(const StructuredHamiltonian& hi, const StructuredHamiltonian& hf,
                       std::span<const double> grid, std::size_t dense_cap) {
    if (hi.dim() != hf.dim()) throw input_error("gap_profile: dimension mismatch");
    check_grid(grid);
    const std::size_t dim = hi.dim();
    if (dim > dense_cap) throw resource_error("gap_profile: dimension exceeds dense cap");

    GapProfile p;
    const std::size_t npts = grid.size();
    p.s.assign(grid.begin(), grid.end());
    p.e0.resize(npts);
    p.e1.resize(npts);
    p.gap.resize(npts);
    p.dmat.resize(npts);
    p.flagged.assign(npts, 0);

    const Eigen::MatrixXcd hi_d = to_dense(hi, dense_cap);
    const Eigen::MatrixXcd hf_d = to_dense(hf, dense_cap);
    const bool real = hi.is_real() && hf.is_real();

    if (real) {
        const Eigen::MatrixXd hi_r = hi_d.real();
        const Eigen::MatrixXd hf_r = hf_d.real();
        const Eigen::MatrixXd d_r = hf_r - hi_r;
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel_on())
#endif
        for (long i = 0; i < static_cast<long>(npts); ++i) {
            const double s = p.s[static_cast<std::size_t>(i)];
            const Eigen::MatrixXd h = (1.0 - s) * hi_r + s * hf_r;
            const auto ps = analyze_point<Eigen::MatrixXd>(h, d_r);
            p.e0[static_cast<std::size_t>(i)] = ps.e0;
            p.e1[static_cast<std::size_t>(i)] = ps.e1;
            p.gap[static_cast<std::size_t>(i)] = ps.gap;
            p.dmat[static_cast<std::size_t>(i)] = ps.dmat;
            p.flagged[static_cast<std::size_t>(i)] = ps.degenerate ? 1 : 0;
        }
    } else {
        const Eigen::MatrixXcd d_c = hf_d - hi_d;
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel_on())
#endif
        for (long i = 0; i < static_cast<long>(npts); ++i) {
            const double s = p.s[static_cast<std::size_t>(i)];
            const Eigen::MatrixXcd h = (1.0 - s) * hi_d + s * hf_d;
            const auto ps = analyze_point<Eigen::MatrixXcd>(h, d_c);
            p.e0[static_cast<std::size_t>(i)] = ps.e0;
            p.e1[static_cast<std::size_t>(i)] = ps.e1;
            p.gap[static_cast<std::size_t>(i)] = ps.gap;
            p.dmat[static_cast<std::size_t>(i)] = ps.dmat;
            p.flagged[static_cast<std::size_t>(i)] = ps.degenerate ? 1 : 0;
        }
    }
    return p;
}

GapProfile two_level_profile(double a2, std::span<const double> grid) {
    if (a2 < 0.0 || a2 > 1.0) throw input_error("two_level_profile: a2 outside [0,1]");
    check_grid(grid);
    GapProfile p;
    const std::size_t npts = grid.size();
    p.s.assign(grid.begin(), grid.end());
    p.e0.resize(npts);
    p.e1.resize(npts);
    p.gap.resize(npts);
    p.dmat.resize(npts);
    p.flagged.assign(npts, 0);

    const double b2 = 1.0 - a2;
    const double ab = std::sqrt(a2 * b2);
    for (std::size_t i = 0; i < npts; ++i) {
        const double u = p.s[i];
        const double g2 = std::max(0.0, 1.0 - 4.0 * u * (1.0 - u) * b2);
        const double g = std::sqrt(g2);
        p.e0[i] = 0.5 * (1.0 - g);
        p.e1[i] = 0.5 * (1.0 + g);
        p.gap[i] = g;
        if (g <= 1e-12) {
            p.flagged[i] = 1;
            p.dmat[i] = ab > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        } else {
            p.dmat[i] = ab / g;
        }
    }
    return p;
}

} // namespace aqs
