#include "aqs/csp.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <random>
#include <sstream>

#ifdef AQS_HAVE_OPENMP
#include <omp.h>
#endif

#include "aqs/kernels.hpp"

namespace aqs {

std::uint64_t pow_u64(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > std::numeric_limits<std::uint64_t>::max() / base)
            throw resource_error("d^n overflows 64 bits");
        r *= base;
    }
    return r;
}

std::uint64_t CspInstance::nogood_count() const {
    std::uint64_t xi = 0;
    for (const auto& c : constraints) xi += c.nogoods.size();
    return xi;
}

void CspInstance::validate() const {
    if (d < 2) throw input_error("domain size d must be >= 2");
    if (n_ab < 1) throw input_error("variable count must be >= 1");
    for (const auto& c : constraints) {
        if (static_cast<int>(c.vars.size()) > k)
            throw input_error("constraint wider than k");
        for (std::size_t i = 0; i < c.vars.size(); ++i) {
            if (c.vars[i] < 0 || c.vars[i] >= n_ab)
                throw input_error("constraint variable index out of range");
            for (std::size_t j = i + 1; j < c.vars.size(); ++j)
                if (c.vars[i] == c.vars[j])
                    throw input_error("constraint repeats a variable");
        }
        for (const auto& ng : c.nogoods) {
            if (ng.size() != c.vars.size())
                throw input_error("nogood length mismatch");
            for (auto digit : ng)
                if (digit >= d) throw input_error("nogood digit out of domain");
        }
    }
}

Assignment assignment_of_index(std::uint64_t index, int d, int n) {
    Assignment x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(index % d);
        index /= static_cast<std::uint64_t>(d);
    }
    return x;
}

std::uint64_t index_of_assignment(const Assignment& x, int d) {
    std::uint64_t idx = 0;
    for (std::size_t i = x.size(); i-- > 0;)
        idx = idx * static_cast<std::uint64_t>(d) + x[i];
    return idx;
}

namespace {

// Constraints compiled for index-level evaluation. For d=2 each nogood is a
// (mask, value) pair over the assignment's bits; the general case keeps
// variable positions and digits.
struct CompiledNogoods {
    bool binary = false;
    int d = 2;
    // d == 2
    std::vector<std::pair<std::uint64_t, std::uint64_t>> masks;
    // d > 2: flattened (var list, digit list) per nogood
    struct General {
        std::vector<int> vars;
        std::vector<std::uint8_t> digits;
    };
    std::vector<General> general;

    bool violated(std::uint64_t index, const std::vector<std::uint64_t>& dpow) const {
        if (binary) {
            for (const auto& [mask, value] : masks)
                if ((index & mask) == value) return true;
            return false;
        }
        for (const auto& g : general) {
            bool hit = true;
            for (std::size_t i = 0; i < g.vars.size(); ++i) {
                const auto digit = (index / dpow[static_cast<std::size_t>(g.vars[i])]) %
                                   static_cast<std::uint64_t>(d);
                if (digit != g.digits[i]) {
                    hit = false;
                    break;
                }
            }
            if (hit) return true;
        }
        return false;
    }
};

CompiledNogoods compile_prefix(const CspInstance& ins, int subset_size) {
    CompiledNogoods out;
    out.binary = (ins.d == 2);
    out.d = ins.d;
    for (const auto& c : ins.constraints) {
        bool inside = true;
        for (int v : c.vars)
            if (v >= subset_size) {
                inside = false;
                break;
            }
        if (!inside) continue;
        for (const auto& ng : c.nogoods) {
            if (out.binary) {
                std::uint64_t mask = 0, value = 0;
                for (std::size_t i = 0; i < c.vars.size(); ++i) {
                    mask |= std::uint64_t(1) << c.vars[i];
                    if (ng[i]) value |= std::uint64_t(1) << c.vars[i];
                }
                out.masks.emplace_back(mask, value);
            } else {
                CompiledNogoods::General g;
                g.vars = c.vars;
                g.digits = ng;
                out.general.push_back(std::move(g));
            }
        }
    }
    return out;
}

std::vector<std::uint64_t> digit_powers(int d, int n) {
    std::vector<std::uint64_t> p(static_cast<std::size_t>(n) + 1, 1);
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i) + 1] = p[static_cast<std::size_t>(i)] * static_cast<std::uint64_t>(d);
    return p;
}

} // namespace

bool satisfies(const CspInstance& instance, int subset_size, const Assignment& x) {
    if (subset_size < 0 || subset_size > instance.n_ab)
        throw input_error("subset size out of range");
    if (static_cast<int>(x.size()) != subset_size)
        throw input_error("assignment length does not match subset size");
    for (auto digit : x)
        if (digit >= instance.d) throw input_error("assignment digit out of domain");
    for (const auto& c : instance.constraints) {
        bool inside = true;
        for (int v : c.vars)
            if (v >= subset_size) {
                inside = false;
                break;
            }
        if (!inside) continue;
        for (const auto& ng : c.nogoods) {
            bool hit = true;
            for (std::size_t i = 0; i < c.vars.size(); ++i)
                if (x[static_cast<std::size_t>(c.vars[i])] != ng[i]) {
                    hit = false;
                    break;
                }
            if (hit) return false;
        }
    }
    return true;
}

CspInstance generate_random_ksat(int n, int clause_count, int k, std::uint64_t seed) {
    if (k < 1) throw input_error("k must be >= 1");
    if (n < k) throw input_error("n < k");
    if (clause_count < 0) throw input_error("clause count must be >= 0");

    CspInstance ins;
    ins.d = 2;
    ins.n_ab = n;
    ins.k = k;
    ins.label = "random " + std::to_string(k) + "-sat n=" + std::to_string(n) +
                " m=" + std::to_string(clause_count) + " seed=" + std::to_string(seed);

    std::mt19937_64 rng(seed);
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;

    for (int c = 0; c < clause_count; ++c) {
        // Partial Fisher-Yates: k distinct variables, kept in pick order.
        Constraint con;
        for (int i = 0; i < k; ++i) {
            std::uniform_int_distribution<int> pick(i, n - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
            con.vars.push_back(pool[static_cast<std::size_t>(i)]);
        }
        std::vector<std::uint8_t> ng(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i)
            ng[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(rng() & 1u);
        con.nogoods.push_back(std::move(ng));
        ins.constraints.push_back(std::move(con));
    }
    return ins;
}

CspInstance read_dimacs(std::istream& in) {
    CspInstance ins;
    ins.d = 2;
    int declared_vars = -1;
    long declared_clauses = -1;
    int line_no = 0;
    bool done = false;

    std::vector<long> lits; // literals of the clause being read
    int clause_start_line = 0;

    auto flush_clause = [&](int at_line) {
        Constraint con;
        std::vector<std::uint8_t> ng;
        bool tautology = false;
        for (long lit : lits) {
            int var = static_cast<int>(std::labs(lit)) - 1;
            std::uint8_t falsifying = lit > 0 ? 0 : 1;
            auto pos = std::find(con.vars.begin(), con.vars.end(), var);
            if (pos != con.vars.end()) {
                auto idx = static_cast<std::size_t>(pos - con.vars.begin());
                if (ng[idx] != falsifying) tautology = true; // x or !x
                continue;                                    // duplicate literal
            }
            con.vars.push_back(var);
            ng.push_back(falsifying);
        }
        if (!tautology) con.nogoods.push_back(std::move(ng));
        ins.k = std::max<int>(ins.k, static_cast<int>(con.vars.size()));
        ins.constraints.push_back(std::move(con));
        lits.clear();
        (void)at_line;
    };

    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (done) break;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        char c0 = line[first];
        if (c0 == 'c') continue;
        if (c0 == '%') { done = true; continue; } // SATLIB trailer
        if (c0 == 'p') {
            if (declared_vars >= 0) throw parse_error("duplicate problem line", line_no);
            std::istringstream ss(line.substr(first + 1));
            std::string fmt;
            if (!(ss >> fmt) || fmt != "cnf")
                throw parse_error("expected 'p cnf <vars> <clauses>'", line_no);
            if (!(ss >> declared_vars >> declared_clauses) || declared_vars < 0 ||
                declared_clauses < 0)
                throw parse_error("bad counts in problem line", line_no);
            ins.n_ab = declared_vars;
            continue;
        }
        if (declared_vars < 0) throw parse_error("clause before problem line", line_no);
        std::istringstream ss(line);
        long lit;
        while (ss >> lit) {
            if (lit == 0) {
                flush_clause(line_no);
            } else {
                if (std::labs(lit) > declared_vars)
                    throw parse_error("literal out of range", line_no);
                if (lits.empty()) clause_start_line = line_no;
                lits.push_back(lit);
            }
        }
        std::string rest;
        if (ss.clear(), ss >> rest; !rest.empty())
            throw parse_error("unexpected token '" + rest + "'", line_no);
    }
    if (declared_vars < 0) throw parse_error("missing problem line", line_no == 0 ? 1 : line_no);
    if (!lits.empty())
        throw parse_error("clause missing terminating 0", clause_start_line);
    if (declared_clauses >= 0 && static_cast<long>(ins.constraints.size()) != declared_clauses)
        throw parse_error("clause count does not match header", line_no);
    if (ins.n_ab == 0) throw parse_error("zero variables", 1);
    if (ins.k == 0) ins.k = 1;
    ins.label = "dimacs cnf";
    ins.validate();
    return ins;
}

void check_partition(const CspInstance& instance, Partition p) {
    if (p.n_a < 1 || p.n_b < 1 || p.n_a + p.n_b != instance.n_ab)
        throw input_error("partition inconsistent with instance");
}

SolutionCensus census(const CspInstance& instance, Partition partition,
                      std::uint64_t enum_cap) {
    instance.validate();
    check_partition(instance, partition);
    const std::uint64_t n_total = pow_u64(static_cast<std::uint64_t>(instance.d), instance.n_ab);
    if (n_total > enum_cap)
        throw resource_error("census: d^n_ab exceeds enumeration cap");

    const std::uint64_t n_a_dim = pow_u64(static_cast<std::uint64_t>(instance.d), partition.n_a);
    const std::uint64_t n_b_dim = n_total / n_a_dim;
    const auto prefix = compile_prefix(instance, partition.n_a);
    const auto full = compile_prefix(instance, instance.n_ab);
    const auto dpow = digit_powers(instance.d, instance.n_ab);

    std::vector<std::int64_t> ext(n_a_dim, -1); // -1: not a prefix solution

    const bool par = exec_mode() == ExecMode::parallel;
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 64) if (par)
#endif
    for (std::int64_t a = 0; a < static_cast<std::int64_t>(n_a_dim); ++a) {
        const auto au = static_cast<std::uint64_t>(a);
        if (prefix.violated(au, dpow)) continue;
        std::int64_t count = 0;
        for (std::uint64_t b = 0; b < n_b_dim; ++b)
            if (!full.violated(au + n_a_dim * b, dpow)) ++count;
        ext[au] = count;
    }
    (void)par;

    SolutionCensus out;
    for (std::uint64_t a = 0; a < n_a_dim; ++a) {
        if (ext[a] < 0) continue;
        ++out.m_a;
        const auto count = static_cast<std::uint64_t>(ext[a]);
        out.m_ab += count;
        out.m_b_given.emplace_back(a, count);
        if (count > 0)
            ++out.m_a_s;
        else
            ++out.m_a_ns;
    }
    return out;
}

std::uint64_t SolutionCensus::min_extensions_over_s() const {
    std::uint64_t best = 0;
    for (const auto& [a, count] : m_b_given) {
        if (count == 0) continue;
        if (best == 0 || count < best) best = count;
    }
    return best;
}

double beta_of(const CspInstance& instance) {
    if (instance.n_ab == 0) return 0.0;
    return static_cast<double>(instance.nogood_count()) / instance.n_ab;
}

std::vector<std::uint8_t> satisfying_bitmap(const CspInstance& instance, int subset_size,
                                            std::uint64_t enum_cap) {
    if (subset_size < 0 || subset_size > instance.n_ab)
        throw input_error("subset size out of range");
    const std::uint64_t dim = pow_u64(static_cast<std::uint64_t>(instance.d), subset_size);
    if (dim > enum_cap)
        throw resource_error("satisfying_bitmap: d^subset exceeds enumeration cap");
    const auto compiled = compile_prefix(instance, subset_size);
    const auto dpow = digit_powers(instance.d, instance.n_ab);

    std::vector<std::uint8_t> marked(dim, 0);
    const bool par = exec_mode() == ExecMode::parallel;
#ifdef AQS_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (par)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(dim); ++i)
        marked[static_cast<std::uint64_t>(i)] =
            compiled.violated(static_cast<std::uint64_t>(i), dpow) ? 0 : 1;
    (void)par;
    return marked;
}

} // namespace aqs
