#pragma once

#include <stdexcept>
#include <string>

namespace csp {

// Coarse error classes; the CLI maps each class to a distinct exit code.
enum class ErrorClass {
    Config,   // exit 2: invalid configuration or parameters
    Io,       // exit 3: missing/invalid files, archives, artifacts
    Backend,  // exit 4: external forecaster failures
    Numeric,  // exit 5: numerical/algorithmic failures
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string what) : std::runtime_error(std::move(what)), cls_(cls) {}
    ErrorClass error_class() const { return cls_; }

private:
    ErrorClass cls_;
};

#define CSP_DEFINE_ERROR(Name, Class)                                                  \
    class Name : public Error {                                                        \
    public:                                                                            \
        explicit Name(const std::string& detail)                                       \
            : Error(ErrorClass::Class, std::string(#Name) + ": " + detail) {}          \
    }

// core-data
CSP_DEFINE_ERROR(NonFiniteError, Io);
CSP_DEFINE_ERROR(ManifestMissingError, Io);
CSP_DEFINE_ERROR(ShapeMismatchError, Io);

// metrics
CSP_DEFINE_ERROR(EmptySeriesError, Numeric);
CSP_DEFINE_ERROR(EmptyListError, Numeric);

// clustering
CSP_DEFINE_ERROR(TooFewSeriesError, Numeric);
CSP_DEFINE_ERROR(DegenerateClusterError, Numeric);
CSP_DEFINE_ERROR(KTooSmallError, Numeric);
CSP_DEFINE_ERROR(LengthMismatchError, Numeric);

// perturbation
CSP_DEFINE_ERROR(OffsetOutOfRangeError, Config);
CSP_DEFINE_ERROR(MissingSampleError, Io);

// forecaster
CSP_DEFINE_ERROR(BackendFailureError, Backend);

// analysis
CSP_DEFINE_ERROR(TooFewPointsError, Numeric);
CSP_DEFINE_ERROR(AllFitsFailedError, Numeric);
CSP_DEFINE_ERROR(EmptySegmentError, Numeric);

// pipeline / cli
CSP_DEFINE_ERROR(ConfigInvalidError, Config);
CSP_DEFINE_ERROR(MissingPrerequisiteError, Io);
CSP_DEFINE_ERROR(MissingArtifactError, Io);
CSP_DEFINE_ERROR(SpecInvalidError, Config);

#undef CSP_DEFINE_ERROR

inline int exit_code_for(ErrorClass cls) {
    switch (cls) {
    case ErrorClass::Config: return 2;
    case ErrorClass::Io: return 3;
    case ErrorClass::Backend: return 4;
    case ErrorClass::Numeric: return 5;
    }
    return 1;
}

}  // namespace csp
