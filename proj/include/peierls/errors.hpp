#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace peierls {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SiteOutsideWindow : public Error {
 public:
  SiteOutsideWindow(std::int32_t x, std::int32_t y)
      : Error("site (" + std::to_string(x) + ", " + std::to_string(y) + ") is outside the window") {}
};

class EmptyCluster : public Error {
 public:
  EmptyCluster() : Error("outer boundary of an empty cluster is undefined") {}
};

// Feasibility failures. The CLI maps both to exit code 3.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

class IncompletenessError : public Error {
 public:
  using Error::Error;
};

class NoRayIntersection : public Error {
 public:
  NoRayIntersection() : Error("contour does not meet the positive e1 ray; it cannot enclose the origin") {}
};

class DivergentSeries : public Error {
 public:
  explicit DivergentSeries(double zeta)
      : Error("series diverges for c <= 4/5 (zeta = 5(1-c) = " + std::to_string(zeta) + ")") {}
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace peierls
