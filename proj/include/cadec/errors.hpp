#pragma once
#include <stdexcept>
#include <string>

namespace cadec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCorpus : Error { using Error::Error; };
struct ClassIndexOutOfRange : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct SchemaVersionMismatch : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InfeasibleConstraints : Error { using Error::Error; };
struct InstanceTooLarge : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct MissingCounterpart : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };

}
