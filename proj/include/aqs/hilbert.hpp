#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "aqs/errors.hpp"
#include "aqs/kernels.hpp"

namespace aqs {

// Normalized complex amplitude vector over d^n basis states. Basis index
// = sum digit_i * d^i with variable 0 least significant, so the prefix
// (primary) register occupies the low positions of the index.
struct StateVector {
    std::vector<cplx> amp;

    std::size_t dim() const { return amp.size(); }
    double norm() const;
    void normalize();
};

StateVector uniform_state(int d, int n, std::uint64_t cap = std::uint64_t(1) << 24);
StateVector basis_state(std::size_t dim, std::size_t index);

double fidelity(const StateVector& a, const StateVector& b); // |<a|b>|^2

struct StructuredHamiltonian;
using HamPtr = std::shared_ptr<const StructuredHamiltonian>;

// A replayable sequence of closed-form exponential factors exp(-i theta H).
// Running the sequence backwards with negated angles is the exact inverse.
struct UnitaryProgram {
    struct Factor {
        HamPtr h;
        double theta;
    };
    std::vector<Factor> factors;

    void apply_forward(StateVector& v) const;
    void apply_inverse(StateVector& v) const;
};
using ProgramPtr = std::shared_ptr<const UnitaryProgram>;

// Matrix-free representation of the projector-structured Hamiltonian family:
//   DiagonalMarked  H = I - sum_{m in S} |m><m|      (diagonal, 0 on marked)
//   RankOneUniform  H = I - |s><s|, s uniform
//   RankOneState    H = I - |psi><psi|, psi arbitrary (normalized)
//   TensorExtended  I_below (x) H_inner (x) I_above   (inner on a digit range)
//   Affine          ci*Hi + cf*Hf
//   Conjugated      U H U^dag with U a unitary program
struct StructuredHamiltonian {
    struct DiagonalMarked {
        std::vector<std::uint8_t> marked;
    };
    struct RankOneUniform {
        std::size_t dim;
    };
    struct RankOneState {
        std::vector<cplx> psi;
    };
    struct TensorExtended {
        HamPtr inner;
        std::size_t below; // identity dimension on lower-significance digits
        std::size_t above; // identity dimension on higher-significance digits
    };
    struct Affine {
        double ci;
        HamPtr hi;
        double cf;
        HamPtr hf;
    };
    struct Conjugated {
        ProgramPtr u;
        HamPtr inner;
    };

    using Node =
        std::variant<DiagonalMarked, RankOneUniform, RankOneState, TensorExtended, Affine, Conjugated>;
    Node node;

    std::size_t dim() const;
    bool is_real() const;      // no complex entries anywhere in the tree
    double norm_bound() const; // cheap upper bound on the operator norm
};

HamPtr make_diagonal_marked(std::vector<std::uint8_t> marked);
HamPtr make_rank_one_uniform(std::size_t dim);
HamPtr make_rank_one_state(std::vector<cplx> psi);
HamPtr make_tensor_extended(HamPtr inner, std::size_t below, std::size_t above);
HamPtr make_affine(double ci, HamPtr hi, double cf, HamPtr hf);
HamPtr make_conjugated(ProgramPtr u, HamPtr inner);

// out = H * in, matrix-free.
void apply(const StructuredHamiltonian& h, std::span<const cplx> in, std::span<cplx> out);
std::vector<cplx> apply(const StructuredHamiltonian& h, const StateVector& v);

// v <- exp(-i theta H) v, closed form. Affine nodes are not supported and
// raise contract_error; use expm_apply for interpolated Hamiltonians.
void apply_exponential(const StructuredHamiltonian& h, double theta, StateVector& v);

// v <- exp(-i t H) v for any variant, by a scaled Taylor expansion of the
// matrix-free operator (converges fast since the family is norm-bounded).
void expm_apply(const StructuredHamiltonian& h, double t, StateVector& v);

inline constexpr std::size_t kDefaultDenseCap = std::size_t(1) << 12;

Eigen::MatrixXcd to_dense(const StructuredHamiltonian& h, std::size_t dense_cap = kDefaultDenseCap);

double operator_norm(const Eigen::MatrixXcd& a); // largest singular value

// Spectral norm of the Hermitian matrix-free operator via shifted power
// iteration (deterministic start vector).
double spectral_norm_matfree(const StructuredHamiltonian& h, double tol = 1e-10);
// Same for the commutator i[H_i, H_f] (Hermitian when both are).
double commutator_norm_matfree(const StructuredHamiltonian& hi, const StructuredHamiltonian& hf,
                               double tol = 1e-10);

// Spectral data of H(s) = (1-s) H_i + s H_f along a grid. gap/dmat refer to
// the lowest excited level actually coupled to the ground space by
// dH/ds = H_f - H_i; levels with zero matrix element (invariant-subspace
// decouplings, spectator crossings) do not constrain a schedule and are
// skipped. e1 reports the coupled level. Points whose ground space is
// degenerate beyond the tolerance are flagged.
struct GapProfile {
    std::vector<double> s;
    std::vector<double> e0;
    std::vector<double> e1;
    std::vector<double> gap;
    std::vector<double> dmat;
    std::vector<std::uint8_t> flagged;

    double g_min() const;
    double d_max() const;
};

std::vector<double> uniform_grid(std::size_t points); // inclusive [0,1]

GapProfile gap_profile(const StructuredHamiltonian& hi, const StructuredHamiltonian& hf,
                       std::span<const double> grid, std::size_t dense_cap = kDefaultDenseCap);

// Analytic profile of the two-level reduction shared by all pairs
// (I - |psi><psi|, I - P_marked): a2 = |P_marked psi|^2. The unstructured
// search pair is the special case a2 = M/N.
GapProfile two_level_profile(double a2, std::span<const double> grid);

// Dense helpers used by verification paths.
Eigen::MatrixXcd dense_exponential(const Eigen::MatrixXcd& h, double t); // exp(-i t H), H Hermitian
Eigen::MatrixXcd dense_of_program(const UnitaryProgram& u, std::size_t dim);

} // namespace aqs
