#pragma once

#include <stdexcept>
#include <string>

namespace pushbroom {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or invariant violation by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Filesystem level failure (missing file, unreadable, short write).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Structurally invalid binary payload (bad magic, truncated body).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Schema violation in a JSON document; message carries the field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Stitching pipeline failure (empty overlap, transition does not fit).
class StitchError : public Error {
 public:
  using Error::Error;
};

/// Renderer failure (camera inside a primitive).
class RenderError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) {
    throw ContractError(message);
  }
}

}  // namespace pushbroom
