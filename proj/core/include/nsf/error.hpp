#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nsf {

enum class ErrorKind {
    InvalidArgument,
    Orientation,
    Format,
    Unsupported,
    Corrupt,
    Io,
    DegenerateInput,
    Domain,
    Contract,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base of every exception thrown by the library. The kind identifies the
/// error class so callers (and the CLI) can react without RTTI gymnastics.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define NSF_DECLARE_ERROR(Name, Kind)                                                  \
    class Name : public Error {                                                        \
    public:                                                                            \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}       \
    };

NSF_DECLARE_ERROR(InvalidArgument, InvalidArgument)
NSF_DECLARE_ERROR(OrientationError, Orientation)
NSF_DECLARE_ERROR(FormatError, Format)
NSF_DECLARE_ERROR(UnsupportedError, Unsupported)
NSF_DECLARE_ERROR(CorruptError, Corrupt)
NSF_DECLARE_ERROR(IoError, Io)
NSF_DECLARE_ERROR(DegenerateInput, DegenerateInput)
NSF_DECLARE_ERROR(DomainError, Domain)
NSF_DECLARE_ERROR(ContractError, Contract)

#undef NSF_DECLARE_ERROR

} // namespace nsf
