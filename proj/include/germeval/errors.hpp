#pragma once

#include <stdexcept>
#include <string>

namespace germeval {

/// Input file or column layout does not match the declared schema.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A cell or record could not be parsed; messages carry the row number.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation precondition.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Invalid or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (missing file, unwritable output).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace germeval
