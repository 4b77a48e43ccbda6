#include "fourierfed/error.hpp"

namespace fourierfed {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kInvalidInput: return "invalid-input";
        case ErrorCode::kSymmetryViolation: return "symmetry-violation";
        case ErrorCode::kInvalidShape: return "invalid-shape";
        case ErrorCode::kInvalidThreshold: return "invalid-threshold";
        case ErrorCode::kInvalidRequest: return "invalid-request";
        case ErrorCode::kInvalidEpoch: return "invalid-epoch";
        case ErrorCode::kInvalidState: return "invalid-state";
        case ErrorCode::kInvalidCheckpoint: return "invalid-checkpoint";
        case ErrorCode::kInvalidDataset: return "invalid-dataset";
        case ErrorCode::kInvalidScale: return "invalid-scale";
        case ErrorCode::kUndefinedMetric: return "undefined-metric";
        case ErrorCode::kCorruptCheckpoint: return "corrupt-checkpoint";
        case ErrorCode::kUnsupportedVersion: return "unsupported-version";
        case ErrorCode::kConfig: return "config";
        case ErrorCode::kIo: return "io";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace fourierfed
