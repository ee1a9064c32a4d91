#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agentlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid user-facing configuration (battery bounds, price levels, CLI flags).
struct ConfigError : Error {
  using Error::Error;
};

// A requested action violates feasibility. Raised instead of clamping so that
// policy or parser bugs surface immediately.
struct InfeasibleActionError : Error {
  using Error::Error;
};

// Backend reply could not be turned into a structured response.
struct ParseError : Error {
  using Error::Error;
};

struct BackendError : Error {
  enum class Category { Transport, Http, RateLimited, Format };
  Category category;
  int status;  // HTTP status when category is Http/RateLimited, else 0
  BackendError(Category c, int http_status, const std::string& what)
      : Error(what), category(c), status(http_status) {}
};

// rho is undefined on paths where the DP rollout earns nothing.
struct DegenerateScenario : Error {
  using Error::Error;
};

struct EmptyVocabulary : Error {
  using Error::Error;
};

struct TooFewPoints : Error {
  using Error::Error;
};

struct MissingCondition : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct SchemaViolation : Error {
  using Error::Error;
};

struct CorruptLine : Error {
  std::size_t line_no;
  CorruptLine(std::size_t line, const std::string& what)
      : Error(what), line_no(line) {}
};

struct VersionMismatch : Error {
  using Error::Error;
};

}  // namespace agentlab
