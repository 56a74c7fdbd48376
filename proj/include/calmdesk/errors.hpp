#pragma once

#include <stdexcept>
#include <string>

namespace calmdesk {

// Base of every library error. code() is a stable machine-readable string
// that the HTTP layer forwards verbatim.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message);
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define CALMDESK_DEFINE_ERROR(Name, Code)                                   \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& message) : Error(Code, message) {} \
    }

// gateway
CALMDESK_DEFINE_ERROR(TimeoutError, "TIMEOUT");
CALMDESK_DEFINE_ERROR(AuthError, "AUTH");
CALMDESK_DEFINE_ERROR(MalformedResponseError, "MALFORMED_RESPONSE");
CALMDESK_DEFINE_ERROR(UpstreamError, "UPSTREAM");
CALMDESK_DEFINE_ERROR(ConfigError, "CONFIG");

// generic contract violations
CALMDESK_DEFINE_ERROR(PreconditionError, "PRECONDITION");
CALMDESK_DEFINE_ERROR(ParseError, "PARSE");

// prompts
CALMDESK_DEFINE_ERROR(UnknownTemplateError, "UNKNOWN_TEMPLATE");
CALMDESK_DEFINE_ERROR(InsufficientExamplesError, "INSUFFICIENT_EXAMPLES");

class MissingBindingError : public Error {
public:
    explicit MissingBindingError(const std::string& placeholder)
        : Error("MISSING_BINDING", "missing binding: " + placeholder), placeholder_(placeholder) {}
    const std::string& placeholder() const noexcept { return placeholder_; }

private:
    std::string placeholder_;
};

// simulant
CALMDESK_DEFINE_ERROR(StructureError, "STRUCTURE");
CALMDESK_DEFINE_ERROR(NoContextError, "NO_CONTEXT");
CALMDESK_DEFINE_ERROR(ClosedSessionError, "SESSION_CLOSED");
CALMDESK_DEFINE_ERROR(CueParseError, "CUE_PARSE");

// panels
CALMDESK_DEFINE_ERROR(GuideParseError, "GUIDE_PARSE");
CALMDESK_DEFINE_ERROR(UnknownClassifierError, "UNKNOWN_CLASSIFIER");

class EmptyStepError : public Error {
public:
    explicit EmptyStepError(const std::string& step)
        : Error("EMPTY_STEP", "blank completion at step: " + step), step_(step) {}
    const std::string& step() const noexcept { return step_; }

private:
    std::string step_;
};

// lingua
CALMDESK_DEFINE_ERROR(EmptyTextError, "EMPTY_TEXT");
CALMDESK_DEFINE_ERROR(MissingCategoryError, "MISSING_CATEGORY");
CALMDESK_DEFINE_ERROR(DimensionMismatchError, "DIMENSION_MISMATCH");

// stats
CALMDESK_DEFINE_ERROR(DegenerateSampleError, "DEGENERATE_SAMPLE");
CALMDESK_DEFINE_ERROR(LengthMismatchError, "LENGTH_MISMATCH");
CALMDESK_DEFINE_ERROR(AllTiedError, "ALL_TIED");
CALMDESK_DEFINE_ERROR(PairingError, "PAIRING");
CALMDESK_DEFINE_ERROR(NoPairsError, "NO_PAIRS");

// service
CALMDESK_DEFINE_ERROR(ValidationError, "VALIDATION");
CALMDESK_DEFINE_ERROR(RatingPendingError, "RATING_PENDING");
CALMDESK_DEFINE_ERROR(NotFoundError, "NOT_FOUND");
CALMDESK_DEFINE_ERROR(NotPendingError, "NOT_PENDING");
CALMDESK_DEFINE_ERROR(RangeError, "OUT_OF_RANGE");
CALMDESK_DEFINE_ERROR(PhaseError, "PHASE");
CALMDESK_DEFINE_ERROR(DuplicateError, "DUPLICATE");

#undef CALMDESK_DEFINE_ERROR

} // namespace calmdesk
