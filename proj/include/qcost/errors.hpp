#pragma once

#include <stdexcept>
#include <string>

namespace qcost {

// Error taxonomy mapped to CLI exit codes: usage/config/io/data -> 2,
// estimation/compute -> 1.
enum class ErrorKind { usage, config, io, data, estimation, compute };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  const char* kind_name() const {
    switch (kind_) {
      case ErrorKind::usage: return "usage";
      case ErrorKind::config: return "config";
      case ErrorKind::io: return "io";
      case ErrorKind::data: return "data";
      case ErrorKind::estimation: return "estimation";
      case ErrorKind::compute: return "compute";
    }
    return "error";
  }

  int exit_code() const {
    switch (kind_) {
      case ErrorKind::usage:
      case ErrorKind::config:
      case ErrorKind::io:
      case ErrorKind::data:
        return 2;
      case ErrorKind::estimation:
      case ErrorKind::compute:
        return 1;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
};

}  // namespace qcost
