#pragma once

#include <stdexcept>
#include <string>

namespace fsi {

// Base for all library errors; `kind()` gives a stable short tag.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct InvalidConfig : Error {
  explicit InvalidConfig(const std::string& w) : Error("invalid-config", w) {}
};
struct ParseError : Error {
  ParseError(const std::string& w, int line)
      : Error("parse-error", "line " + std::to_string(line) + ": " + w), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};
struct AssemblyError : Error {
  explicit AssemblyError(const std::string& w) : Error("assembly-error", w) {}
};
struct CouplingError : Error {
  explicit CouplingError(const std::string& w) : Error("coupling-error", w) {}
};
struct SolverError : Error {
  explicit SolverError(const std::string& w) : Error("solver-error", w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain-error", w) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape-error", w) {}
};

}  // namespace fsi
