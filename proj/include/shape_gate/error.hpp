#pragma once

#include <stdexcept>
#include <string>

namespace shape_gate {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed image or manifest input.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Training scene whose label list does not match the segmented blob count.
class LabelMismatchError : public Error {
 public:
  LabelMismatchError(std::size_t labels, std::size_t blobs)
      : Error("label count " + std::to_string(labels) +
              " does not match segmented blob count " + std::to_string(blobs)),
        labels_(labels),
        blobs_(blobs) {}

  std::size_t labels() const noexcept { return labels_; }
  std::size_t blobs() const noexcept { return blobs_; }

 private:
  std::size_t labels_;
  std::size_t blobs_;
};

class SchemaVersionError : public Error {
 public:
  using Error::Error;
};

// Truncated, unparsable or checksum-mismatched database file.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

// Database built under a different shape/scale configuration.
class FingerprintMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace shape_gate
