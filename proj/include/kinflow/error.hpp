#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kinflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedElementError : public Error {
 public:
  using Error::Error;
};

/// Raised for degenerate cells; carries the offending (0-based) cell index.
class GeometryError : public Error {
 public:
  GeometryError(int cell, const std::string& what)
      : Error("cell " + std::to_string(cell) + ": " + what), cell_(cell) {}
  int cell() const noexcept { return cell_; }

 private:
  int cell_;
};

class ConnectivityError : public Error {
 public:
  using Error::Error;
};

class BoundaryConditionError : public Error {
 public:
  using Error::Error;
};

class StencilError : public Error {
 public:
  StencilError(int cell, const std::string& what)
      : Error("cell " + std::to_string(cell) + ": " + what), cell_(cell) {}
  int cell() const noexcept { return cell_; }

 private:
  int cell_;
};

class SingularStencilError : public StencilError {
 public:
  using StencilError::StencilError;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class PositivityError : public StateError {
 public:
  PositivityError(int cell, const std::string& what)
      : StateError("cell " + std::to_string(cell) + ": " + what +
                   " (try a smaller CFL number)"),
        cell_(cell) {}
  int cell() const noexcept { return cell_; }

 private:
  int cell_;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kinflow
