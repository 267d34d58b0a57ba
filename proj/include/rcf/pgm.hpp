#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcf/channels.hpp"

namespace rcf {

enum class PgmErrorCode {
  kIo,
  kBadMagic,           // not a netpbm file
  kUnsupportedFormat,  // netpbm, but not binary graymap (P5)
  kMalformedHeader,
  kMaxval,             // maxval outside [1, 255]
  kTruncated,
};

class PgmError : public std::runtime_error {
 public:
  PgmError(PgmErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  PgmErrorCode code() const { return code_; }

 private:
  PgmErrorCode code_;
};

/// Decodes a binary P5 graymap. Values are rescaled to [0, 255] when maxval
/// is below 255.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage load_pgm(const std::filesystem::path& path);

/// Writes P5 with maxval 255; intensities are rounded to the nearest integer.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// All *.pgm files of a directory in lexicographic order.
std::vector<std::filesystem::path> list_pgm_files(const std::filesystem::path& dir);

}  // namespace rcf
