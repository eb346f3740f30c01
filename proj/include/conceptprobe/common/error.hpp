#pragma once

#include <stdexcept>
#include <string>

namespace conceptprobe {

/// Base of every error thrown by the library. `kind()` is the stable
/// machine-readable name used by the CLI and the HTTP service.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define CONCEPTPROBE_ERROR(Name)                                            \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what) : Error(#Name, what) {}      \
    }

CONCEPTPROBE_ERROR(OutOfRange);
CONCEPTPROBE_ERROR(UndefinedAttribute);
CONCEPTPROBE_ERROR(LayoutMismatch);
CONCEPTPROBE_ERROR(GenerationExhausted);
CONCEPTPROBE_ERROR(InvalidSpec);
CONCEPTPROBE_ERROR(UnsupportedSize);
CONCEPTPROBE_ERROR(ValueOutOfRange);
CONCEPTPROBE_ERROR(TooManyGuesses);
CONCEPTPROBE_ERROR(SceneContractViolation);
CONCEPTPROBE_ERROR(EmptyDataset);
CONCEPTPROBE_ERROR(ConfigInvalid);
CONCEPTPROBE_ERROR(AdapterCrashed);
CONCEPTPROBE_ERROR(ProtocolViolation);

#undef CONCEPTPROBE_ERROR

/// Malformed serialized input. `path()` is a JSON pointer to the offending
/// field ("" for whole-document problems such as truncation).
class SchemaViolation : public Error {
public:
    SchemaViolation(std::string path, const std::string& what)
        : Error("SchemaViolation", (path.empty() ? std::string("/") : path) + ": " + what),
          path_(std::move(path)),
          detail_(what) {}
    const std::string& path() const noexcept { return path_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string path_;
    std::string detail_;
};

}  // namespace conceptprobe
