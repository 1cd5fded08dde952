#pragma once

#include <stdexcept>
#include <string>

namespace bnet {

enum class Errc {
    NotATree,
    MultipleEdge,
    NonPositiveLength,
    NotIncreasingOrder,
    NotConnected,
    ContainsCycle,
    InvalidIndex,
    InvalidArgument,
    MissingValue,
    NegativeInput,
    SourceOrSink,
    ZeroInflow,
    NoConvergence,
    UnsupportedVertexClass,
    InfeasibleCoefficients,
    DomainViolation,
    NotUnrollable,
    CflViolation,
    HypothesisViolated,
    ParseError,
    ValidationError,
    IoError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace bnet
