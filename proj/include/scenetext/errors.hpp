#pragma once

#include <stdexcept>
#include <string>

namespace scenetext {

/// Triangle with (near) zero area handed to a geometric primitive.
class DegenerateGeometry : public std::runtime_error {
public:
  explicit DegenerateGeometry(const std::string& what) : std::runtime_error(what) {}
};

class EmptyScene : public std::runtime_error {
public:
  EmptyScene() : std::runtime_error("empty scene") {}
};

/// Argument outside the mathematical domain of an operation (negative depth, zero-length ray...).
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A file referenced by a scene or config could not be read or parsed.
class LoadError : public std::runtime_error {
public:
  explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scenetext
