#pragma once

#include <stdexcept>
#include <string>

namespace fourierfed {

enum class ErrorCode {
    kInvalidInput,
    kSymmetryViolation,
    kInvalidShape,
    kInvalidThreshold,
    kInvalidRequest,
    kInvalidEpoch,
    kInvalidState,
    kInvalidCheckpoint,
    kInvalidDataset,
    kInvalidScale,
    kUndefinedMetric,
    kCorruptCheckpoint,
    kUnsupportedVersion,
    kConfig,
    kIo,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace fourierfed
