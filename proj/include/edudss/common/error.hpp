#pragma once

#include <stdexcept>
#include <string>

namespace edudss {

// Broad failure classes. The CLI maps them onto exit codes and the HTTP
// layer onto status codes, so every thrown error must carry one.
enum class ErrorKind {
  kUsage,
  kData,
  kModel,
  kIntegrity,
  kConflict,
  kService,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, message) {}
};

// Malformed or schema-violating input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorKind::kData, message) {}
};

// Training / prediction contract violations and bad model documents.
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& message)
      : Error(ErrorKind::kModel, message) {}
};

// On-disk state failed a checksum or structural check.
class IntegrityError : public Error {
 public:
  IntegrityError(const std::string& file, const std::string& message)
      : Error(ErrorKind::kIntegrity, file + ": " + message), file_(file) {}

  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

// The requested mutation cannot run in the current state (retrain already in
// flight, nothing new to train on, store locked by another writer).
class ConflictError : public Error {
 public:
  explicit ConflictError(const std::string& message)
      : Error(ErrorKind::kConflict, message) {}
};

class ServiceError : public Error {
 public:
  explicit ServiceError(const std::string& message)
      : Error(ErrorKind::kService, message) {}
};

// 0 ok, 2 usage, 3 data, 4 model, 5 service.
int exit_code_for(ErrorKind kind) noexcept;

}  // namespace edudss
