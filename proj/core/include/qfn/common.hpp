#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qfn {

// Exit-code mapping used by the CLI: config errors -> 2, resource overflow -> 3.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidAssignment : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InstanceTooLarge : public ResourceOverflow {
 public:
  using ResourceOverflow::ResourceOverflow;
};

class DecompositionInfeasible : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

inline std::uint64_t pow2(int k) { return std::uint64_t{1} << k; }

}  // namespace qfn
