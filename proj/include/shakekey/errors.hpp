#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace shakekey {

// Every named failure in the pipeline maps to one exception type carrying a
// stable name, so callers (and the CLI diagnostics) can report the
// originating condition without string matching on what().
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error("ParseError", w) {}
};
struct EmptyTrace : Error {
    explicit EmptyTrace(const std::string& w) : Error("EmptyTrace", w) {}
};
struct AnchorOutOfRange : Error {
    explicit AnchorOutOfRange(const std::string& w) : Error("AnchorOutOfRange", w) {}
};
struct TooFewSamples : Error {
    explicit TooFewSamples(const std::string& w) : Error("TooFewSamples", w) {}
};
struct DegenerateInput : Error {
    explicit DegenerateInput(const std::string& w) : Error("DegenerateInput", w) {}
};
struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& w) : Error("LengthMismatch", w) {}
};
struct TooShort : Error {
    explicit TooShort(const std::string& w) : Error("TooShort", w) {}
};
struct EmptyFeature : Error {
    explicit EmptyFeature(const std::string& w) : Error("EmptyFeature", w) {}
};
struct InsufficientBits : Error {
    explicit InsufficientBits(const std::string& w) : Error("InsufficientBits", w) {}
};
struct AuthError : Error {
    explicit AuthError(const std::string& w) : Error("AuthError", w) {}
};
struct NotConfirmed : Error {
    explicit NotConfirmed(const std::string& w) : Error("NotConfirmed", w) {}
};
struct EmptyPopulation : Error {
    explicit EmptyPopulation(const std::string& w) : Error("EmptyPopulation", w) {}
};

}  // namespace shakekey
