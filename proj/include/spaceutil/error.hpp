#pragma once

#include <stdexcept>
#include <string>

namespace spaceutil {

enum class Errc {
    MalformedLine,
    AllTokensGarbage,
    ZeroVariance,
    EmptyInput,
    InsufficientBins,
    DeductionAtCapacity,
    DegenerateData,
    TooFewSamples,
    TooFewNodes,
    InvalidSelector,
    EmptySelection,
    InvalidScenario,
    InvalidConfig,
    IoFailure,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace spaceutil
