#pragma once

#include <stdexcept>
#include <string>

namespace diraclab {

// Invalid configuration, preset, or input data; maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Blow-up of the linear solve or a violated runtime bound; remembers the last
// time at which the state was still valid. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double last_good_t)
      : std::runtime_error(what + " (last good t = " + std::to_string(last_good_t) + ")"),
        last_good_t_(last_good_t) {}

  double last_good_t() const { return last_good_t_; }

 private:
  double last_good_t_;
};

}  // namespace diraclab
