#pragma once

#include <stdexcept>
#include <string>

namespace sigmabilap {

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotSingular : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class FrameError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SingularMMatrix : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class NotSolvable : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class NoConvergence : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

class BracketFailure : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

}  // namespace sigmabilap
