#include "vitnt/image.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include "vitnt/error.hpp"

namespace vitnt {

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& path) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw FormatError(path + ": truncated PPM header");
  return tok;
}

std::size_t header_number(std::istream& in, const std::string& path, const char* what) {
  const auto tok = header_token(in, path);
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size()) throw FormatError(path + ": bad PPM " + what + " '" + tok + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  const std::string p = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p + "' for reading");
  const auto magic = header_token(in, p);
  if (magic != "P6") throw FormatError(p + ": unsupported image format '" + magic + "' (only binary P6 PPM)");
  const auto width = header_number(in, p, "width");
  const auto height = header_number(in, p, "height");
  const auto maxval = header_number(in, p, "maxval");
  if (width == 0 || height == 0) throw FormatError(p + ": PPM has zero size");
  if (maxval != 255) throw FormatError(p + ": unsupported PPM maxval " + std::to_string(maxval) + " (need 255)");
  // header_token consumed exactly one whitespace byte after maxval.
  Image img(width, height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
    throw LengthError(p + ": PPM pixel data truncated");
  }
  return img;
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string pixel_digest(const Image& image) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : image.pixels) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vitnt
