#pragma once

#include <stdexcept>
#include <string>

namespace tfs {

/// Broad failure category. The CLI maps each kind to an exit status.
enum class ErrorKind {
    input,     ///< bad arguments, missing files, schema violations (exit 2)
    training,  ///< model training failed (exit 3)
    numeric,   ///< rank deficiency, undefined statistics (exit 4)
    pipeline,  ///< anything else raised while running a stage (exit 4)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error input_error(const std::string& what) { return {ErrorKind::input, what}; }
inline Error training_error(const std::string& what) { return {ErrorKind::training, what}; }
inline Error numeric_error(const std::string& what) { return {ErrorKind::numeric, what}; }

/// Re-raise `e` with its message prefixed by the pipeline stage it came from.
inline Error with_stage(const std::string& stage, const Error& e) {
    return {e.kind(), stage + ": " + e.what()};
}

}  // namespace tfs
