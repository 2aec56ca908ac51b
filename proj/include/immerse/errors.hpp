#pragma once

#include <stdexcept>
#include <string>

namespace immerse {

enum class Err {
    DuplicateName,
    CycleDetected,
    NotFound,
    UnknownSignal,
    DuplicateConnection,
    ReentrantSignal,
    NonFiniteState,
    WrongBodyKind,
    BadStep,
    SceneMissingNode,
    PortNotFound,
    AlreadyOpen,
    BadBaud,
    PortClosed,
    SemanticError,
    InvalidEndpoint,
    IoError,
};

const char* err_name(Err e);

class EngineError : public std::runtime_error {
public:
    EngineError(Err code, const std::string& what)
        : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

// Parser diagnostics are values, not exceptions: fuzzed input must never
// unwind out of a parser. line/col are 1-based and point at the first
// offending token.
struct Diagnostic {
    int line = 0;
    int col = 0;
    std::string message;

    bool empty() const { return line == 0 && message.empty(); }
};

}  // namespace immerse
