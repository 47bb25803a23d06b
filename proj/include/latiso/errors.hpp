#pragma once

#include <stdexcept>
#include <string>

namespace latiso {

/// Error categories surfaced by the library. The CLI maps these onto
/// exit codes (usage = 1, data = 2, degenerate statistics = 3).
enum class errc {
  invalid_argument,
  degenerate_restriction,
  invalid_block_size,
  non_square_block,
  zero_scale,
  empty_locations,
  too_few_points,
  too_few_vectors,
  too_few_weighted,
  singular_scatter,
  no_testable_contrasts,
  irreparable_covariance,
  block_too_small_for_lagset,
  all_windows_failed,
  grid_too_small,
  size_guard_exceeded,
  factorization_failed,
  block_exceeds_grid,
  parse_error,
};

const char* errc_name(errc code) noexcept;

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw error(code, message);
}

}  // namespace latiso
