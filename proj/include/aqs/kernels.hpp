#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

// Low-level vector kernels used by the state-vector machinery. Each kernel
// has a plain serial reference (suffix _ref) and a production version that
// runs the same arithmetic over fixed chunks, optionally in parallel with
// OpenMP. The chunk decomposition is independent of the thread count, so
// reductions are bit-identical run to run and serial vs parallel.

namespace aqs {

using cplx = std::complex<double>;

enum class ExecMode { serial, parallel };

ExecMode exec_mode();
void set_exec_mode(ExecMode m);
int max_threads();

namespace kern {

// Reference implementations: plain loops, kept for testing and benchmarks.
cplx dot_ref(const cplx* a, const cplx* b, std::size_t n);
double norm2_ref(const cplx* v, std::size_t n);
void scale_ref(cplx* v, cplx c, std::size_t n);
void axpy_ref(cplx* v, cplx c, const cplx* u, std::size_t n);
void phase_unmarked_ref(cplx* v, const std::uint8_t* marked, cplx phase, std::size_t n);
double masked_mass_ref(const cplx* v, const std::uint8_t* marked, std::size_t n);

// Production kernels. Honors exec_mode(): chunked reductions, OpenMP loops.
cplx dot(const cplx* a, const cplx* b, std::size_t n);       // sum conj(a)*b
cplx sum(const cplx* v, std::size_t n);
double norm2(const cplx* v, std::size_t n);                  // sum |v|^2
void scale(cplx* v, cplx c, std::size_t n);
void axpy(cplx* v, cplx c, const cplx* u, std::size_t n);    // v += c*u
void add_scaled_two(cplx* out, double ca, const cplx* a, double cb, const cplx* b,
                    std::size_t n);                          // out = ca*a + cb*b
// v[i] *= phase for unmarked i; marked entries are left untouched.
void phase_unmarked(cplx* v, const std::uint8_t* marked, cplx phase, std::size_t n);
// out[i] = marked[i] ? 0 : v[i]  (projector-complement apply).
void zero_marked(cplx* out, const cplx* v, const std::uint8_t* marked, std::size_t n);
double masked_mass(const cplx* v, const std::uint8_t* marked, std::size_t n);
double max_abs_diff(const cplx* a, const cplx* b, std::size_t n);

} // namespace kern
} // namespace aqs
