#pragma once

#include <stdexcept>
#include <string>

namespace rankone {

// Invalid argument / precondition violation (CLI exit code 2).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Operation is mathematically undefined for these inputs, e.g. the
// exceptional (space, degree) pairs of the geometric term lemma.
class UnsupportedError : public std::runtime_error {
public:
    explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: solver did not converge, stiffness, divergent
// integral without a decay tag (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class SolverFailure : public NumericError {
public:
    explicit SolverFailure(const std::string& what) : NumericError(what) {}
};

class DivergenceError : public NumericError {
public:
    explicit DivergenceError(const std::string& what) : NumericError(what) {}
};

// Enumeration budget exhausted (CLI exit code 4). Carries the partial
// result that was provable before the budget ran out.
class BudgetExceededError : public std::runtime_error {
public:
    BudgetExceededError(const std::string& what, long long partial)
        : std::runtime_error(what), partial_count(partial) {}
    long long partial_count;
};

}  // namespace rankone
