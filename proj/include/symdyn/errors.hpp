#pragma once

#include <stdexcept>
#include <string>

namespace symdyn {

// A request reached past the materialized prefix of a sequence.
class HorizonError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Malformed argument: empty word, symbol outside the alphabet, bad schedule.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A construction or scan would exceed its memory/work budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rotation coding could not keep orbit points away from the partition endpoints.
class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace symdyn
