#include "rcf/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace rcf {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then reads an unsigned decimal token.
  long long read_uint(const char* field) {
    skip_space();
    if (pos_ >= bytes_.size()) throw PgmError(PgmErrorCode::kTruncated, std::string("PGM header ends before ") + field);
    if (!std::isdigit(bytes_[pos_])) {
      throw PgmError(PgmErrorCode::kMalformedHeader, std::string("PGM header: expected a number for ") + field);
    }
    long long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1ll << 31)) throw PgmError(PgmErrorCode::kMalformedHeader, std::string("PGM header: ") + field + " too large");
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void end_header() {
    if (pos_ >= bytes_.size()) throw PgmError(PgmErrorCode::kTruncated, "PGM header ends before the raster");
    if (!std::isspace(bytes_[pos_])) throw PgmError(PgmErrorCode::kMalformedHeader, "PGM header: missing separator");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw PgmError(PgmErrorCode::kBadMagic, "not a PGM file (bad magic)");
  if (bytes[1] != '5') {
    if (bytes[1] >= '1' && bytes[1] <= '7') {
      throw PgmError(PgmErrorCode::kUnsupportedFormat,
                     std::string("unsupported format P") + static_cast<char>(bytes[1]) + ", only binary P5 is read");
    }
    throw PgmError(PgmErrorCode::kBadMagic, "not a PGM file (bad magic)");
  }
  HeaderReader header(bytes);
  const long long width = header.read_uint("width");
  const long long height = header.read_uint("height");
  const long long maxval = header.read_uint("maxval");
  if (width < 1 || height < 1) throw PgmError(PgmErrorCode::kMalformedHeader, "PGM header: zero dimension");
  if (maxval < 1 || maxval > 255) {
    throw PgmError(PgmErrorCode::kMaxval, "PGM maxval " + std::to_string(maxval) + " outside [1, 255]");
  }
  header.end_header();

  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t available = bytes.size() - header.pos();
  if (available < count) {
    throw PgmError(PgmErrorCode::kTruncated, "PGM raster truncated: expected " + std::to_string(count) +
                                                 " bytes, found " + std::to_string(available));
  }
  std::vector<double> data(count);
  const double scale = maxval == 255 ? 1.0 : 255.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    const double v = bytes[header.pos() + i];
    if (v > maxval) throw PgmError(PgmErrorCode::kMaxval, "PGM sample exceeds maxval");
    data[i] = v * scale;
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PgmError(PgmErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_pgm(bytes);
  } catch (const PgmError& e) {
    throw PgmError(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.pixels().size());
  for (double v : img.pixels()) out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l)));
  return out;
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PgmError(PgmErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw PgmError(PgmErrorCode::kIo, "write failed for " + path.string());
}

std::vector<std::filesystem::path> list_pgm_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw PgmError(PgmErrorCode::kIo, dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace rcf
