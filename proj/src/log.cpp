#include "crm/log.hpp"

#include <iostream>
#include <mutex>

namespace crm {
namespace {
std::mutex g_mutex;
WarningHandler g_handler;
}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_mutex);
  std::swap(g_handler, handler);
  return handler;
}

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (g_handler)
    g_handler(message);
  else
    std::cerr << "warning: " << message << '\n';
}

}  // namespace crm
