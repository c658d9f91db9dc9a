#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rep {

// Base for every error raised by the engine. `code()` is a stable machine
// readable identifier used by the CLI exit path and the HTTP error body.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, std::size_t offset)
        : Error("syntax_error", message + " at byte " + std::to_string(offset)), detail_(message), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }
    /// The message without the offset suffix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t offset_;
};

class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& message) : Error("capacity_error", message) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error("format_error", message) {}
};

#define REP_DEFINE_ERROR(Name, code_text)                                           \
    class Name : public Error {                                                     \
    public:                                                                         \
        explicit Name(const std::string& message) : Error(code_text, message) {}    \
        Name(std::string code, const std::string& message)                          \
            : Error(std::move(code), message) {}                                    \
    }

REP_DEFINE_ERROR(LexiconMismatch, "lexicon_mismatch");
REP_DEFINE_ERROR(DegenerateData, "degenerate_data");
REP_DEFINE_ERROR(UndefinedAlpha, "undefined_alpha");
REP_DEFINE_ERROR(SchemaError, "schema_error");
REP_DEFINE_ERROR(DanglingRef, "dangling_ref");
REP_DEFINE_ERROR(CycleError, "cycle_error");
REP_DEFINE_ERROR(NoCandidate, "no_candidate");
REP_DEFINE_ERROR(ValidationError, "validation_error");
REP_DEFINE_ERROR(MissingSlot, "missing_slot");
REP_DEFINE_ERROR(NotFound, "not_found");
REP_DEFINE_ERROR(Conflict, "conflict");
REP_DEFINE_ERROR(BadRequest, "bad_request");

#undef REP_DEFINE_ERROR

} // namespace rep
