#include "sfem/errors.hpp"

namespace sfem {

namespace {

std::string located(const std::string& path, std::size_t line, const std::string& what) {
  std::string out = path;
  if (line > 0) out += ":" + std::to_string(line);
  return out + ": " + what;
}

}  // namespace

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : Error(located(path, line, what)), path_(path), line_(line) {}

DegenerateDomain::DegenerateDomain(std::size_t face, const std::string& what)
    : Error("smoothing domain " + std::to_string(face) + ": " + what), face_(face) {}

IoError::IoError(const std::string& path, const std::string& what)
    : Error(path + ": " + what), path_(path) {}

}  // namespace sfem
