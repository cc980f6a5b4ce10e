#include "genpanis/tnsr.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "genpanis/common.hpp"

namespace genpanis::tnsr {

static_assert(std::endian::native == std::endian::little,
              "TNSR writer assumes a little-endian host");

namespace {

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s;
}

void write_header(std::ostream& out, const char* dtype, const std::vector<std::size_t>& shape) {
  out << "TNSR 1 " << dtype << " " << shape_str(shape) << " row-major little-endian\n";
}

std::vector<std::size_t> parse_shape(const std::string& s) {
  std::vector<std::size_t> shape;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t next = s.find('x', pos);
    if (next == std::string::npos) next = s.size();
    shape.push_back(std::stoull(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  if (shape.empty()) throw error("TNSR: empty shape");
  return shape;
}

}  // namespace

void write_f64(std::ostream& out, const std::vector<std::size_t>& shape, const double* data) {
  write_header(out, "f64", shape);
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!out) throw error("TNSR: write failed");
}

void write_u8(std::ostream& out, const std::vector<std::size_t>& shape, const std::uint8_t* data) {
  write_header(out, "u8", shape);
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw error("TNSR: write failed");
}

Tensor read(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw error("TNSR: missing header");
  std::istringstream hs(header);
  std::string magic, version, dtype, shape_s, order, endian;
  hs >> magic >> version >> dtype >> shape_s >> order >> endian;
  if (magic != "TNSR") throw error("TNSR: bad magic '" + magic + "'");
  if (version != "1") throw error("TNSR: unsupported version '" + version + "'");
  if (dtype != "f64" && dtype != "u8") throw error("TNSR: unsupported dtype '" + dtype + "'");
  if (order != "row-major" || endian != "little-endian")
    throw error("TNSR: unsupported layout '" + order + " " + endian + "'");

  Tensor t;
  t.dtype = dtype;
  t.shape = parse_shape(shape_s);
  const std::size_t n = t.count();
  if (dtype == "f64") {
    t.f64.resize(n);
    in.read(reinterpret_cast<char*>(t.f64.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double))
      throw error("TNSR: truncated payload");
  } else {
    t.u8.resize(n);
    in.read(reinterpret_cast<char*>(t.u8.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw error("TNSR: truncated payload");
  }
  return t;
}

void write_f64(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
               const double* data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open " + path.string());
  write_f64(out, shape, data);
}

void write_u8(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
              const std::uint8_t* data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open " + path.string());
  write_u8(out, shape, data);
}

Tensor read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open " + path.string());
  return read(in);
}

}  // namespace genpanis::tnsr
