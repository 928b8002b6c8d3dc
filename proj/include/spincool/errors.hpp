#pragma once

#include <stdexcept>
#include <string>

namespace spincool {

// Domain errors carry a stable name so the CLI can report it on stderr
// and scripts can match on it.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define SPINCOOL_DEFINE_ERROR(Type)                       \
    class Type : public Error {                           \
    public:                                               \
        explicit Type(const std::string& what)            \
            : Error(#Type, what) {}                       \
    }

SPINCOOL_DEFINE_ERROR(UnknownSpecies);
SPINCOOL_DEFINE_ERROR(InvalidOverride);
SPINCOOL_DEFINE_ERROR(QuadrupoleUndefined);
SPINCOOL_DEFINE_ERROR(InvalidSpins);
SPINCOOL_DEFINE_ERROR(NotHermitian);
SPINCOOL_DEFINE_ERROR(NotApplicable);
SPINCOOL_DEFINE_ERROR(LabelAmbiguity);
SPINCOOL_DEFINE_ERROR(NoSuchState);
SPINCOOL_DEFINE_ERROR(DimensionMismatch);
SPINCOOL_DEFINE_ERROR(StepFailure);
SPINCOOL_DEFINE_ERROR(TruncationOverflow);
SPINCOOL_DEFINE_ERROR(Unreachable);
SPINCOOL_DEFINE_ERROR(NotSelective);
SPINCOOL_DEFINE_ERROR(ConfigParse);

#undef SPINCOOL_DEFINE_ERROR

}  // namespace spincool
