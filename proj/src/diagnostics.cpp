#include "bhd/diagnostics.hpp"

#include <iostream>
#include <mutex>

namespace bhd {
namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& current_handler() {
  static WarningHandler h = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return h;
}

}  // namespace

void warn(const std::string& message) {
  std::lock_guard lock(handler_mutex());
  if (current_handler()) current_handler()(message);
}

ScopedWarningHandler::ScopedWarningHandler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  previous_ = std::move(current_handler());
  current_handler() = std::move(handler);
}

ScopedWarningHandler::~ScopedWarningHandler() {
  std::lock_guard lock(handler_mutex());
  current_handler() = std::move(previous_);
}

WarningCapture::WarningCapture()
    : guard_([this](const std::string& msg) { messages_.push_back(msg); }) {}

bool WarningCapture::contains(const std::string& needle) const {
  for (const auto& m : messages_)
    if (m.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace bhd
