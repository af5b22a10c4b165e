#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace awblstm {

/// Tensor shape disagreement between operands.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Softmax/attention invoked with every position masked out.
class MaskError : public std::runtime_error {
public:
    explicit MaskError(const std::string& what) : std::runtime_error(what) {}
};

/// An API precondition was violated (e.g. backward on a non-scalar loss).
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file. Carries the source path and byte position.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string file, std::size_t byte_pos, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(byte_pos) + ": " + what),
          file_(std::move(file)),
          byte_pos_(byte_pos) {}

    const std::string& file() const { return file_; }
    std::size_t byte_pos() const { return byte_pos_; }

private:
    std::string file_;
    std::size_t byte_pos_;
};

/// Well-formed input whose content violates a documented constraint.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Entity character offsets that cannot be aligned to token boundaries.
class AlignmentError : public std::runtime_error {
public:
    explicit AlignmentError(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration value outside its documented domain.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Checkpoint payload failed its checksum or is truncated.
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& what) : std::runtime_error(what) {}
};

/// Checkpoint written by an incompatible format version.
class VersionError : public std::runtime_error {
public:
    explicit VersionError(const std::string& what) : std::runtime_error(what) {}
};

/// Training aborted on a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace awblstm
