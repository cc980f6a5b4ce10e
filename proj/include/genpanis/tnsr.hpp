#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace genpanis::tnsr {

/// Self-describing tensor container. Layout on disk:
///   ASCII header line  "TNSR 1 <f64|u8> <d1xd2x...> row-major little-endian\n"
/// followed by the raw payload, row-major, little-endian.
struct Tensor {
  std::string dtype;  // "f64" or "u8"
  std::vector<std::size_t> shape;
  std::vector<double> f64;
  std::vector<std::uint8_t> u8;

  std::size_t count() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
};

void write_f64(std::ostream& out, const std::vector<std::size_t>& shape, const double* data);
void write_u8(std::ostream& out, const std::vector<std::size_t>& shape, const std::uint8_t* data);
Tensor read(std::istream& in);

void write_f64(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
               const double* data);
void write_u8(const std::filesystem::path& path, const std::vector<std::size_t>& shape,
              const std::uint8_t* data);
Tensor read(const std::filesystem::path& path);

}  // namespace genpanis::tnsr
