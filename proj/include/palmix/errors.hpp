// Copyright 2026 palmix developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace palmix {

// Base class for every error thrown by the library.
class PalmixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two patterns or models that must share a window do not.
class WindowMismatch : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// remove_atom found no point equal to the requested atom.
class AtomNotFound : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// A point lies outside the model window.
class OutOfWindow : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// The model does not expose a closed-form conditional (Palm) sampler.
class NoAnalyticPalm : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// The model does not expose a second product density.
class NoProductDensity : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// Conditioning point where the total intensity vanishes; the conditional
// law is undefined there.
class ZeroIntensityAtPoint : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// Two-point conditioning with all four branch weights zero.
class DegenerateConditioning : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// No replicate carried positive weight; the empirical conditional law
// cannot be formed.
class ZeroTotalWeight : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// A model invariant was violated at runtime (e.g. a thinning bound lied).
class InvalidModel : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// An operation received an empty input it cannot handle.
class EmptyInput : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// File could not be read or written.
class IoError : public PalmixError {
 public:
  using PalmixError::PalmixError;
};

// Configuration text failed to parse or validate. Carries every problem
// found, not just the first.
class ConfigError : public PalmixError {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : PalmixError(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::string out;
    for (const auto& p : problems) {
      if (!out.empty()) out += "; ";
      out += p;
    }
    return out.empty() ? std::string("invalid config") : out;
  }

  std::vector<std::string> problems_;
};

// Config text is syntactically malformed.
class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Config text parsed but violates semantic rules.
class ValidationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace palmix
