#include "spaceutil/error.hpp"

namespace spaceutil {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::MalformedLine: return "MalformedLine";
        case Errc::AllTokensGarbage: return "AllTokensGarbage";
        case Errc::ZeroVariance: return "ZeroVariance";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::InsufficientBins: return "InsufficientBins";
        case Errc::DeductionAtCapacity: return "DeductionAtCapacity";
        case Errc::DegenerateData: return "DegenerateData";
        case Errc::TooFewSamples: return "TooFewSamples";
        case Errc::TooFewNodes: return "TooFewNodes";
        case Errc::InvalidSelector: return "InvalidSelector";
        case Errc::EmptySelection: return "EmptySelection";
        case Errc::InvalidScenario: return "InvalidScenario";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::IoFailure: return "IoFailure";
    }
    return "UnknownError";
}

} // namespace spaceutil
