#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedgnn {

// Base of every structured error raised by the library. `prefix()` is a
// stable tag the CLI prints before the message.
class Error : public std::runtime_error {
 public:
  Error(std::string prefix, const std::string& message)
      : std::runtime_error(message), prefix_(std::move(prefix)) {}
  const std::string& prefix() const noexcept { return prefix_; }

 private:
  std::string prefix_;
};

class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& message)
      : Error("parse-error",
              file + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                  ": " + message),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("config-error", m) {}
};

// Violated layout/shape preconditions between cooperating objects.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& m) : Error("contract-error", m) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& m)
      : Error("generation-error", m) {}
};

class InjectionError : public Error {
 public:
  explicit InjectionError(const std::string& m) : Error("injection-error", m) {}
};

class PoisoningError : public Error {
 public:
  PoisoningError(std::size_t client, const std::string& m)
      : Error("poisoning-error", "client " + std::to_string(client) + ": " + m),
        client_(client) {}
  std::size_t client() const noexcept { return client_; }

 private:
  std::size_t client_;
};

class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& m)
      : Error("evaluation-error", m) {}
};

class DefenseError : public Error {
 public:
  explicit DefenseError(const std::string& m) : Error("defense-error", m) {}
};

class MetricError : public Error {
 public:
  explicit MetricError(const std::string& m) : Error("metric-error", m) {}
};

// Wraps a failure raised while a client trained in some round.
class ClientFailure : public Error {
 public:
  ClientFailure(std::size_t round, std::size_t client, const std::string& m)
      : Error("client-failure", "round " + std::to_string(round) + ", client " +
                                    std::to_string(client) + ": " + m),
        round_(round),
        client_(client) {}
  std::size_t round() const noexcept { return round_; }
  std::size_t client() const noexcept { return client_; }

 private:
  std::size_t round_;
  std::size_t client_;
};

}  // namespace fedgnn
