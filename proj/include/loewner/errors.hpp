#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace loewner {

// Non-finite value encountered mid-computation.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Step size underflowed without the capture criterion firing; distinct
// from a capture verdict by contract.
struct StepUnderflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Welding failure; arc_index points at the offending vertex of the input
// polyline.
struct ExtractionError : std::runtime_error {
    std::size_t arc_index;
    ExtractionError(const std::string& msg, std::size_t idx)
        : std::runtime_error(msg + " (arc index " + std::to_string(idx) + ")"), arc_index(idx) {}
};

// Adjacent trace vertices separated by more than the refinement policy
// allows; the caller must increase the step count.
struct RefinementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace loewner
