#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "rcf/boosting.hpp"

namespace rcf {

inline constexpr int kModelVersion = 1;

enum class ModelErrorCode { kIo, kParse, kVersion, kSchema, kNonFinite };

class ModelError : public std::runtime_error {
 public:
  ModelError(ModelErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ModelErrorCode code() const { return code_; }

 private:
  ModelErrorCode code_;
};

/// Canonical JSON text: sorted keys, shortest round-trip floats, infinite
/// thresholds written as +-DBL_MAX. Throws ModelError(kNonFinite) for NaN or
/// infinite values anywhere else.
std::string serialize_model(const Cascade& cascade);
/// Inverse of serialize_model.
Cascade parse_model(const std::string& text);

void save_model(const Cascade& cascade, const std::filesystem::path& path);
Cascade load_model(const std::filesystem::path& path);

}  // namespace rcf
