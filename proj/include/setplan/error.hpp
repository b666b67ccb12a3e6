#pragma once

#include <stdexcept>
#include <string>

namespace setplan {

// Error taxonomy shared across the project. The kind drives CLI exit codes:
// Config/Data/Validation/Model/Reference/ZeroInput -> 2, Budget -> 3, Io -> 4.
enum class ErrorKind {
    Config,
    Data,
    Validation,
    Model,
    Reference,
    Refusal,
    ZeroInput,
    Budget,
    Io,
    Provider,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    // Provider failures are safe to retry; everything else is not.
    bool retriable() const noexcept { return kind_ == ErrorKind::Provider; }

    static const char* kind_name(ErrorKind k) {
        switch (k) {
            case ErrorKind::Config: return "config";
            case ErrorKind::Data: return "data";
            case ErrorKind::Validation: return "validation";
            case ErrorKind::Model: return "model";
            case ErrorKind::Reference: return "reference";
            case ErrorKind::Refusal: return "refusal";
            case ErrorKind::ZeroInput: return "zero-input";
            case ErrorKind::Budget: return "budget";
            case ErrorKind::Io: return "io";
            case ErrorKind::Provider: return "provider";
            case ErrorKind::Internal: return "internal";
        }
        return "unknown";
    }

private:
    ErrorKind kind_;
};

}  // namespace setplan
