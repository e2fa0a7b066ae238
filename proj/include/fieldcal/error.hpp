#pragma once

#include <stdexcept>
#include <string>

namespace fieldcal {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A type invariant or operation precondition was violated.
struct ValidationError : Error {
  using Error::Error;
};

/// A document is syntactically valid but violates the file schema
/// (unknown class label, non-finite coordinate, unknown model tag, ...).
struct SchemaError : Error {
  using Error::Error;
};

/// A document could not be parsed at all.
struct ParseError : Error {
  using Error::Error;
};

/// Geometric operation failed (no ground intersection, degenerate
/// back-projected quadrilateral, undistortion divergence, ...).
struct GeometryError : Error {
  using Error::Error;
};

/// Estimation failed (degenerate configuration, under-determined
/// problem, invalid seed, initialization failure).
struct FitError : Error {
  using Error::Error;
};

/// Filesystem-level failure.
struct IoError : Error {
  using Error::Error;
};

/// Synthetic data generation failed (e.g. no acceptable camera draw).
struct GenerationError : Error {
  using Error::Error;
};

}  // namespace fieldcal
