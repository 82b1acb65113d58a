#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "agentlab/core/ids.hpp"
#include "agentlab/core/schema.hpp"

namespace agentlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class AgentMissing : public Error {
 public:
  explicit AgentMissing(AgentId id)
      : Error("observation addressed to unknown agent " + to_string(id)), agent_(id) {}
  AgentId agent() const { return agent_; }

 private:
  AgentId agent_;
};

class UnknownRecipient : public Error {
 public:
  explicit UnknownRecipient(AgentId id) : Error("message addressed to unknown agent " + to_string(id)), dst_(id) {}
  AgentId recipient() const { return dst_; }

 private:
  AgentId dst_;
};

class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string context, std::vector<Violation> violations)
      : Error(context + ": " + format_violations(violations)), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

}  // namespace agentlab
