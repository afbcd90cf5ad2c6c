#pragma once

#include <stdexcept>
#include <string>

namespace radarnet {

/// Caller broke a documented precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Numeric input outside the domain of a geometric or filtering operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Target lies outside a radar's instrumented range.
class NotVisible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyScenario : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace radarnet
