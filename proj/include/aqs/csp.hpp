#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "aqs/errors.hpp"

namespace aqs {

// One constraint: a tuple of distinct variable indices plus the set of
// local assignments (one digit per tuple position) that violate it.
struct Constraint {
    std::vector<int> vars;
    std::vector<std::vector<std::uint8_t>> nogoods;
};

// A finite-domain constraint-satisfaction instance. Variables are indexed
// 0..n_ab-1 with domain {0,..,d-1}; the "primary" subset of a partition is
// always the index prefix, so the constraint set of a prefix grows with it.
struct CspInstance {
    int d = 2;
    int n_ab = 0;
    int k = 0;
    std::vector<Constraint> constraints;
    std::string label;

    std::uint64_t nogood_count() const; // xi: total nogood ground instances
    void validate() const;              // throws input_error on a bad instance
};

using Assignment = std::vector<std::uint8_t>;

struct Partition {
    int n_a = 0;
    int n_b = 0;
};

// Exhaustive ground truth for a partitioned instance. m_b_given holds one
// entry per prefix solution m_A (sorted by basis index) with the number of
// suffix completions; zero means m_A has no extension.
struct SolutionCensus {
    std::uint64_t m_a = 0;
    std::uint64_t m_ab = 0;
    std::uint64_t m_a_s = 0;
    std::uint64_t m_a_ns = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> m_b_given;

    std::uint64_t min_extensions_over_s() const; // min M_{B/m_A} over m_A with >=1
};

inline constexpr std::uint64_t kDefaultEnumCap = std::uint64_t(1) << 24;

// d^n with overflow check against cap semantics handled by callers.
std::uint64_t pow_u64(std::uint64_t base, int exp);

Assignment assignment_of_index(std::uint64_t index, int d, int n);
std::uint64_t index_of_assignment(const Assignment& x, int d);

// f_A with A = the first subset_size variables: true iff x violates no
// constraint whose variables all lie in [0, subset_size).
bool satisfies(const CspInstance& instance, int subset_size, const Assignment& x);

CspInstance generate_random_ksat(int n, int clause_count, int k, std::uint64_t seed);

// DIMACS CNF. Comments, blank lines and a trailing '%' section are
// tolerated; structural problems raise parse_error with the line number.
CspInstance read_dimacs(std::istream& in);

SolutionCensus census(const CspInstance& instance, Partition partition,
                      std::uint64_t enum_cap = kDefaultEnumCap);

double beta_of(const CspInstance& instance); // xi / n_ab

// Bitmap over d^subset_size marking the assignments that satisfy every
// constraint inside the prefix; this is the marked set of the prefix
// Hamiltonian.
std::vector<std::uint8_t> satisfying_bitmap(const CspInstance& instance, int subset_size,
                                            std::uint64_t enum_cap = kDefaultEnumCap);

void check_partition(const CspInstance& instance, Partition p);

} // namespace aqs
