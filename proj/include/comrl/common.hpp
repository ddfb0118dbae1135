#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace comrl {

// Shortest round-trip decimal form of a double; locale-free, so emitted
// files are byte-identical across machines and reruns.
inline std::string double_repr(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Invalid or inconsistent user-supplied configuration. CLI maps this to exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value or other numerical failure detected mid-run. CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal invariant violation: a bug in this library, not in user input.
struct internal_error : std::logic_error {
  explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

#define COMRL_CHECK(cond, msg)                        \
  do {                                                \
    if (!(cond)) throw ::comrl::internal_error(msg);  \
  } while (0)

#define COMRL_REQUIRE(cond, msg)                     \
  do {                                               \
    if (!(cond)) throw ::comrl::config_error(msg);   \
  } while (0)

#define COMRL_NUMERIC(cond, msg)                     \
  do {                                               \
    if (!(cond)) throw ::comrl::numeric_error(msg);  \
  } while (0)

}  // namespace comrl
