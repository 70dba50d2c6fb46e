#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vservo/camera.hpp"

namespace vservo {

namespace {

// next header token, skipping whitespace and # comments
std::string token(std::istream& in) {
  std::string t;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!t.empty()) break;
      continue;
    }
    t.push_back(static_cast<char>(c));
  }
  return t;
}

int to_int(const std::string& s, const std::string& path) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, path + ": bad PGM header field '" + s + "'");
  }
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path);
  if (token(in) != "P5") throw Error(ErrorKind::Parse, path + ": not a binary PGM (P5)");
  int w = to_int(token(in), path), h = to_int(token(in), path), maxv = to_int(token(in), path);
  if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 255)
    throw Error(ErrorKind::Parse, path + ": only 8-bit PGM is supported");
  std::vector<unsigned char> buf(static_cast<size_t>(w) * h);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw Error(ErrorKind::Parse, path + ": truncated pixel data");
  Image img(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) img(i, j) = buf[static_cast<size_t>(i) * w + j];
  return img;
}

void write_pgm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Parse, "cannot write " + path);
  out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < img.rows(); ++i)
    for (Eigen::Index j = 0; j < img.cols(); ++j) {
      double v = std::clamp(std::round(img(i, j)), 0.0, 255.0);
      out.put(static_cast<char>(static_cast<unsigned char>(v)));
    }
}

}  // namespace vservo
