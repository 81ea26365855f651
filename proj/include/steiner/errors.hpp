#pragma once

#include <stdexcept>
#include <string>

namespace steiner {

struct SteinerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DisconnectedGraph : SteinerError { using SteinerError::SteinerError; };
struct InvalidGraph : SteinerError { using SteinerError::SteinerError; };
struct BudgetViolation : SteinerError { using SteinerError::SteinerError; };
struct RoundCapExceeded : SteinerError { using SteinerError::SteinerError; };
struct TooLarge : SteinerError { using SteinerError::SteinerError; };
struct NotMinimalInstance : SteinerError { using SteinerError::SteinerError; };
struct InvalidEpsilon : SteinerError { using SteinerError::SteinerError; };
struct Infeasible : SteinerError { using SteinerError::SteinerError; };
struct InvalidSpec : SteinerError { using SteinerError::SteinerError; };
struct ParseError : SteinerError { using SteinerError::SteinerError; };

// Broken internal invariant; always a bug, never an input problem.
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

#define STEINER_CHECK(cond, msg)                                              \
    do {                                                                      \
        if (!(cond)) throw ::steiner::InvariantViolation(                     \
            std::string(msg) + " [" + __FILE__ + ":" + std::to_string(__LINE__) + "]"); \
    } while (0)

}  // namespace steiner
