#pragma once

#include <stdexcept>
#include <string>

namespace aqs {

// Bad arguments or malformed problem data supplied by the caller.
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed external input (DIMACS, JSON); carries a 1-based line number
// when the source format has lines.
struct parse_error : std::runtime_error {
    int line;
    parse_error(const std::string& msg, int line_no)
        : std::runtime_error("parse error (line " + std::to_string(line_no) + "): " + msg),
          line(line_no) {}
};

// A configured cap (enumeration size, dense dimension) would be exceeded.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An operation was called outside its supported domain (programming error).
struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

// A schedule cannot be built, e.g. the gap closes on the grid.
struct schedule_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Stage A has nothing to search for: the partial problem is unsatisfiable.
struct no_partial_solutions : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The full problem has no solution; stage C's gap closes.
struct unsatisfiable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace aqs
