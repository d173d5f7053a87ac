#pragma once

#include <stdexcept>
#include <string>

namespace motionsynth {

/// Invalid engine or CLI configuration (rates, scales, thresholds, note table).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class VideoError : public std::runtime_error {
public:
    enum class Kind { unreadable, unsupported_format, no_frames, dimension, decode };

    VideoError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace motionsynth
