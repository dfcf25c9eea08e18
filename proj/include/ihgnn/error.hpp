#pragma once

#include <stdexcept>
#include <string>

namespace ihgnn {

// Bad input: shapes, malformed files, inadmissible hypergraphs, invalid configs.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failure at run time: NaN, non-convergence, violated contraction.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ihgnn
