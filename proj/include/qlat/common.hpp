#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qlat {

// Config / schema problems: bad files, bad field values, empty subsets.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad runtime arguments: dimension mismatches, out-of-range categories.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-convergence, NaN gradients, overflow.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Execution mode for the batch kernels. Both modes produce bit-identical
// results: work is split into fixed-size chunks and partial results are
// reduced in chunk order, independent of the thread count.
enum class Execution { Serial, Parallel };

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(std::uint64_t v);

// Round-trip-exact decimal formatting for doubles ("%.17g").
std::string format_double(double v);

// Short display formatting for labels and keys ("%.6g").
std::string format_short(double v);

}  // namespace qlat
