#pragma once

#include <stdexcept>
#include <string>

namespace rrw {

/// Raised when an operation's precondition or postcondition does not hold.
/// The module name is kept separately so the CLI can report which contract
/// failed.
class ContractError : public std::runtime_error {
 public:
  ContractError(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

namespace detail {

inline void require(bool condition, const char* module, const std::string& message) {
  if (!condition) throw ContractError(module, message);
}

}  // namespace detail
}  // namespace rrw
