#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bhd {

using WarningHandler = std::function<void(const std::string&)>;

// Emits a warning through the current handler (stderr by default).
void warn(const std::string& message);

// Installs a handler for the lifetime of this object, restoring the previous
// one on destruction. Handlers are process-wide.
class ScopedWarningHandler {
 public:
  explicit ScopedWarningHandler(WarningHandler handler);
  ~ScopedWarningHandler();
  ScopedWarningHandler(const ScopedWarningHandler&) = delete;
  ScopedWarningHandler& operator=(const ScopedWarningHandler&) = delete;

 private:
  WarningHandler previous_;
};

// Collects warnings into a vector; handy in tests.
class WarningCapture {
 public:
  WarningCapture();
  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const;

 private:
  std::vector<std::string> messages_;
  ScopedWarningHandler guard_;
};

}  // namespace bhd
