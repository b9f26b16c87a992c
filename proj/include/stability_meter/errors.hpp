#pragma once

#include <stdexcept>
#include <string>

namespace stability_meter {

// Every failure surfaced by the library derives from Error so the CLI can map
// error classes onto exit codes with a single catch site.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input layout: missing column, bad header, unparsable timestamp.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed field with an illegal value (e.g. a label that is not 0/1).
class ValueError : public Error {
 public:
  using Error::Error;
};

class EmptyLogError : public FormatError {
 public:
  EmptyLogError() : FormatError("event log is empty") {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A model was asked to predict before it had anything to predict from.
class NotReadyError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace stability_meter
