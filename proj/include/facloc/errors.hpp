#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace facloc {

// Base of every error the library throws.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad inputs: malformed files, mismatched shapes, out-of-range parameters.
// The CLI maps these to exit code 1.
struct validation_error : error {
  using error::error;
};

// Failures that arise while solving a well-formed instance (guards tripped,
// no repair possible, generator could not satisfy its constraints).
// The CLI maps these to exit code 2.
struct solver_error : error {
  using error::error;
};

struct zero_vector_error : validation_error {
  std::int64_t row;
  explicit zero_vector_error(std::int64_t r)
      : validation_error("cannot normalize row " + std::to_string(r) + ": zero norm"), row(r) {}
};

struct dimension_mismatch : validation_error {
  using validation_error::validation_error;
};

struct empty_candidate_set : validation_error {
  using validation_error::validation_error;
};

struct invalid_quantile : validation_error {
  using validation_error::validation_error;
};

struct k_too_large : validation_error {
  using validation_error::validation_error;
};

struct no_unused_sites : solver_error {
  using solver_error::solver_error;
};

struct instance_too_large : solver_error {
  using solver_error::solver_error;
};

struct rejection_budget_exceeded : solver_error {
  using solver_error::solver_error;
};

// I/O errors ----------------------------------------------------------------

struct io_error : validation_error {
  using validation_error::validation_error;
};

struct bad_magic : io_error {
  using io_error::io_error;
};

struct truncated_file : io_error {
  using io_error::io_error;
};

struct non_finite_value : io_error {
  std::int64_t row;
  std::int64_t col;
  non_finite_value(const std::string& what, std::int64_t r, std::int64_t c)
      : io_error(what + ": non-finite value at row " + std::to_string(r) + ", column " +
                 std::to_string(c)),
        row(r),
        col(c) {}
};

}  // namespace facloc
