#pragma once

#include <stdexcept>
#include <string>

namespace multishot {

// Base for all domain errors. `name()` is the stable identifier printed by the
// CLI and asserted by tests; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(name + ": " + message), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define MULTISHOT_DEFINE_ERROR(ClassName)                        \
    class ClassName : public Error {                             \
    public:                                                      \
        explicit ClassName(const std::string& message)           \
            : Error(#ClassName, message) {}                      \
    }

MULTISHOT_DEFINE_ERROR(SchemaError);
MULTISHOT_DEFINE_ERROR(IntegrityError);
MULTISHOT_DEFINE_ERROR(InvalidSpec);
MULTISHOT_DEFINE_ERROR(IoError);
MULTISHOT_DEFINE_ERROR(DimensionMismatch);
MULTISHOT_DEFINE_ERROR(ClientError);
MULTISHOT_DEFINE_ERROR(RoleMismatch);
MULTISHOT_DEFINE_ERROR(ResolutionMismatch);
MULTISHOT_DEFINE_ERROR(LengthMismatch);
MULTISHOT_DEFINE_ERROR(IndexError);
MULTISHOT_DEFINE_ERROR(ShapeMismatch);
MULTISHOT_DEFINE_ERROR(UnknownStage);
MULTISHOT_DEFINE_ERROR(IncompatibleCheckpoint);
MULTISHOT_DEFINE_ERROR(DatasetTooSmall);
MULTISHOT_DEFINE_ERROR(EmptyShot);
MULTISHOT_DEFINE_ERROR(NonPositiveScore);
MULTISHOT_DEFINE_ERROR(EmbedderError);
MULTISHOT_DEFINE_ERROR(ContextOverflow);

#undef MULTISHOT_DEFINE_ERROR

}  // namespace multishot
