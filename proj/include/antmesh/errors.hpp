#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace antmesh {

// Base of every error raised by the simulator. Drops and link breaks are
// outcomes, not errors, and never surface through this hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SchedulingInPast : Error {
  using Error::Error;
};
struct InvalidRange : Error {
  using Error::Error;
};
struct AllZeroWeights : Error {
  AllZeroWeights() : Error("all sampling weights are zero") {}
};
struct EmptyRow : Error {
  EmptyRow() : Error("pheromone row sums to zero") {}
};
struct NoNeighbors : Error {
  NoNeighbors() : Error("node has no neighbors") {}
};
struct NoRoute : Error {
  NoRoute() : Error("no positive-pheromone next hop") {}
};
struct DegenerateTime : Error {
  DegenerateTime() : Error("non-positive remaining trip time") {}
};
struct NoTraffic : Error {
  NoTraffic() : Error("no data packets were sent") {}
};
struct NoDeliveries : Error {
  NoDeliveries() : Error("no data packets were delivered") {}
};
struct InvalidConfig : Error {
  using Error::Error;
};
struct IoFailure : Error {
  using Error::Error;
};

// Scenario parsing errors carry the 1-based line they refer to (0 when the
// problem is not tied to a line, e.g. a missing mandatory key).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct UnknownKey : ParseError {
  using ParseError::ParseError;
};
struct TypeMismatch : ParseError {
  using ParseError::ParseError;
};

}  // namespace antmesh
