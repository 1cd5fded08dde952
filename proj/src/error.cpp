#include "burgers_net/error.hpp"

namespace bnet {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::NotATree: return "NotATree";
        case Errc::MultipleEdge: return "MultipleEdge";
        case Errc::NonPositiveLength: return "NonPositiveLength";
        case Errc::NotIncreasingOrder: return "NotIncreasingOrder";
        case Errc::NotConnected: return "NotConnected";
        case Errc::ContainsCycle: return "ContainsCycle";
        case Errc::InvalidIndex: return "InvalidIndex";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::MissingValue: return "MissingValue";
        case Errc::NegativeInput: return "NegativeInput";
        case Errc::SourceOrSink: return "SourceOrSink";
        case Errc::ZeroInflow: return "ZeroInflow";
        case Errc::NoConvergence: return "NoConvergence";
        case Errc::UnsupportedVertexClass: return "UnsupportedVertexClass";
        case Errc::InfeasibleCoefficients: return "InfeasibleCoefficients";
        case Errc::DomainViolation: return "DomainViolation";
        case Errc::NotUnrollable: return "NotUnrollable";
        case Errc::CflViolation: return "CflViolation";
        case Errc::HypothesisViolated: return "HypothesisViolated";
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace bnet
