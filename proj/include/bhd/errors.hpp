#pragma once

#include <stdexcept>
#include <string>

namespace bhd {

// Exit codes used by the command-line driver.
enum class ExitCode : int { ok = 0, config = 2, numerical = 3, io = 4 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ill-conditioned inversion, quadrature non-convergence, out-of-range data.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace bhd
