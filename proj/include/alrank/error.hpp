#ifndef ALRANK_ERROR_HPP_
#define ALRANK_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace alrank {

// Error categories map one-to-one onto the C API status codes and the CLI
// exit codes (1 usage, 2 data, 3 runtime).
enum class ErrorKind { kUsage = 1, kData = 2, kRuntime = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kUsage, what) {}
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

}  // namespace alrank

#endif  // ALRANK_ERROR_HPP_
