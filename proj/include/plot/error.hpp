#pragma once

#include <stdexcept>
#include <string>

namespace plot {

enum class Errc {
  invalid_argument,
  degenerate_input,
  insufficient_correspondences,
  rank_deficient,
  empty_cloud,
  zero_spread,
  missing_prior,
  io,
  parse,
  validation,
};

const char* to_string(Errc code);

// Single exception type for the library; the code tells callers (the CLI in
// particular) how to map a failure onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace plot
