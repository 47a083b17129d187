#ifndef VULNSCREEN_ERRORS_HPP
#define VULNSCREEN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vulnscreen {

// Malformed input files (schema, CSV, model).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Well-formed input that violates a documented contract or precondition.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Artifacts produced against a different schema (fingerprint mismatch).
struct CompatibilityError : std::runtime_error {
    explicit CompatibilityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariants (numerics that failed to converge, bad brackets).
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Error from a named stage of the end-to-end pipeline.
struct PipelineError : std::runtime_error {
    PipelineError(std::string stage_name, const std::string& msg)
        : std::runtime_error(stage_name + ": " + msg), stage(std::move(stage_name)) {}
    std::string stage;
};

}  // namespace vulnscreen

#endif  // VULNSCREEN_ERRORS_HPP
