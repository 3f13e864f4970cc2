#pragma once

#include <stdexcept>
#include <string>

namespace qmem {

// A computation ran but did not reach its stated accuracy (solver stalls,
// missing sign change for a root finder, ...). Input validation problems are
// reported as std::invalid_argument instead.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qmem
