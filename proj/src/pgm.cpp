#include "nlpb/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "nlpb/errors.hpp"

namespace nlpb {

namespace {

class Reader {
 public:
  Reader(std::string bytes, std::string name) : buf_(std::move(bytes)), name_(std::move(name)) {}

  [[noreturn]] void fail(const std::string& msg) const { throw IoError(name_ + ": " + msg); }

  void skip_space_and_comments() {
    while (pos_ < buf_.size()) {
      const char c = buf_[pos_];
      if (c == '#') {
        while (pos_ < buf_.size() && buf_[pos_] != '\n' && buf_[pos_] != '\r') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long long header_int(const char* what) {
    skip_space_and_comments();
    return digits(what);
  }

  long long ascii_sample() {
    while (pos_ < buf_.size() && std::isspace(static_cast<unsigned char>(buf_[pos_]))) ++pos_;
    if (pos_ >= buf_.size()) fail("truncated payload");
    return digits("sample");
  }

  void single_whitespace() {
    if (pos_ >= buf_.size() || !std::isspace(static_cast<unsigned char>(buf_[pos_])))
      fail("malformed header: missing whitespace after maxval");
    ++pos_;
  }

  std::string magic() {
    if (buf_.size() < 2) fail("malformed header");
    pos_ = 2;
    return buf_.substr(0, 2);
  }

  unsigned byte() {
    if (pos_ >= buf_.size()) fail("truncated payload");
    return static_cast<unsigned char>(buf_[pos_++]);
  }

 private:
  long long digits(const char* what) {
    const std::size_t start = pos_;
    long long v = 0;
    while (pos_ < buf_.size() && std::isdigit(static_cast<unsigned char>(buf_[pos_]))) {
      v = v * 10 + (buf_[pos_] - '0');
      if (v > 1'000'000'000) fail(std::string("malformed ") + what);
      ++pos_;
    }
    if (pos_ == start) fail(std::string("malformed ") + what);
    return v;
  }

  std::string buf_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

PgmImage read_pgm_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}), path.string());
  const std::string magic = r.magic();
  if (magic != "P2" && magic != "P5") r.fail("not a P2/P5 PGM");
  PgmImage img;
  const long long w = r.header_int("width");
  const long long h = r.header_int("height");
  const long long maxval = r.header_int("maxval");
  if (w < 1 || h < 1 || w * h > 100'000'000) r.fail("malformed header: bad dimensions");
  if (maxval < 1 || maxval > 65535) r.fail("maxval must be in [1, 65535]");
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.maxval = static_cast<int>(maxval);
  img.pixels.resize(static_cast<std::size_t>(w * h));
  if (magic == "P5") r.single_whitespace();
  for (double& px : img.pixels) {
    long long v = 0;
    if (magic == "P2") {
      v = r.ascii_sample();
    } else if (maxval < 256) {
      v = r.byte();
    } else {
      const unsigned hi = r.byte();
      v = (hi << 8) | r.byte();
    }
    if (v > maxval) r.fail("sample exceeds maxval");
    px = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return img;
}

void write_pgm_image(const PgmImage& img, const std::filesystem::path& path) {
  if (img.maxval < 1 || img.maxval > 65535) throw DomainError("maxval must be in [1, 65535]");
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height))
    throw DomainError("pixel count does not match image size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P5\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  for (double px : img.pixels) {
    const double c = std::isfinite(px) ? std::clamp(px, 0.0, 1.0) : 0.0;
    const auto v = static_cast<unsigned>(std::lround(c * img.maxval));
    if (img.maxval > 255) out.put(static_cast<char>(v >> 8));
    out.put(static_cast<char>(v & 0xff));
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

DomainSpec image_domain(int width, int height, int pad_cells) {
  Box box{};
  box.hi = {static_cast<double>(width), static_cast<double>(height)};
  return DomainSpec::uniform(2, box, {width, height}, pad_cells);
}

Field image_to_field(const PgmImage& img, int pad_cells) {
  return zero_extend(img.pixels, image_domain(img.width, img.height, pad_cells));
}

PgmImage field_to_image(const Field& f, int maxval) {
  const DomainSpec& spec = f.spec();
  if (spec.dim != 2) throw DomainError("images need a 2D field");
  PgmImage img;
  img.width = spec.nx[0];
  img.height = spec.nx[1];
  img.maxval = maxval;
  img.pixels = f.interior_values();
  return img;
}

Field read_pgm(const std::filesystem::path& path, int pad_cells) {
  return image_to_field(read_pgm_image(path), pad_cells);
}

void write_pgm(const Field& f, const std::filesystem::path& path, int maxval) {
  write_pgm_image(field_to_image(f, maxval), path);
}

}  // namespace nlpb
