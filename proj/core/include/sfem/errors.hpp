#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the offending path and 1-based line (0 when
/// the problem is not tied to a line).
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);
  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

/// Well-formed input describing something outside the supported subset
/// (2D meshes, quadratic tetrahedra, ...).
class UnsupportedMesh : public Error {
 public:
  using Error::Error;
};

/// Non-manifold or inconsistent face/tetrahedron connectivity.
class TopologyError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A smoothing domain with zero volume. `face()` is the domain ordinal
/// (exterior faces first, then interior faces).
class DegenerateDomain : public Error {
 public:
  DegenerateDomain(std::size_t face, const std::string& what);
  std::size_t face() const noexcept { return face_; }

 private:
  std::size_t face_;
};

class MaterialError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Non-fatal findings collected while loading or solving.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

}  // namespace sfem
