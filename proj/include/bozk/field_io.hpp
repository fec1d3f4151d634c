#pragma once

// Bit-exact field file format "BOZK1":
//   line 1: ASCII decimal byte count of the header line, then '\n'
//   line 2: one JSON object terminated by '\n' (exactly the advertised size)
//   payload: nx*ny little-endian float64, row-major (x slow, y fast)

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bozk/functionals.hpp"
#include "bozk/spectral.hpp"

namespace bozk {

class field_io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t to_le_bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  if constexpr (std::endian::native == std::endian::big) {
    b = __builtin_bswap64(b);
  }
  return b;
}

inline double from_le_bits(std::uint64_t b) {
  if constexpr (std::endian::native == std::endian::big) {
    b = __builtin_bswap64(b);
  }
  double x;
  std::memcpy(&x, &b, sizeof x);
  return x;
}

}  // namespace detail

inline void write_field(const std::filesystem::path& path, const Field& f,
                        const Params& q) {
  nlohmann::json h;
  h["magic"] = "BOZK1";
  h["nx"] = f.grid.nx;
  h["ny"] = f.grid.ny;
  h["lx"] = f.grid.lx;
  h["ly"] = f.grid.ly;
  h["params"] = params_to_json(q);
  h["dtype"] = "f64le";
  h["order"] = "row_major";
  std::string header = h.dump();
  header.push_back('\n');

  std::ofstream os(path, std::ios::binary);
  if (!os) throw field_io_error("write_field: cannot open " + path.string());
  os << header.size() << '\n' << header;
  std::vector<std::uint64_t> buf(f.v.size());
  for (std::size_t i = 0; i < f.v.size(); ++i)
    buf[i] = detail::to_le_bits(f.v[i]);
  os.write(reinterpret_cast<const char*>(buf.data()),
           std::streamsize(buf.size() * 8));
  if (!os) throw field_io_error("write_field: short write to " + path.string());
}

inline std::pair<Field, Params> read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw field_io_error("read_field: cannot open " + path.string());

  std::string lenline;
  if (!std::getline(is, lenline))
    throw field_io_error("read_field: missing header length line");
  std::size_t hlen = 0;
  try {
    hlen = std::stoul(lenline);
  } catch (...) {
    throw field_io_error("read_field: bad header length line");
  }
  if (hlen == 0 || hlen > 1 << 20)
    throw field_io_error("read_field: implausible header length");

  std::string header(hlen, '\0');
  is.read(header.data(), std::streamsize(hlen));
  if (std::size_t(is.gcount()) != hlen)
    throw field_io_error("read_field: truncated header");

  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const std::exception& e) {
    throw field_io_error(std::string("read_field: header is not JSON: ") + e.what());
  }
  if (h.value("magic", "") != std::string("BOZK1"))
    throw field_io_error("read_field: bad magic (expected BOZK1)");
  if (h.value("dtype", "") != std::string("f64le"))
    throw field_io_error("read_field: unsupported dtype");
  if (h.value("order", "") != std::string("row_major"))
    throw field_io_error("read_field: unsupported element order");

  int nx = h.at("nx").get<int>(), ny = h.at("ny").get<int>();
  double lx = h.at("lx").get<double>(), ly = h.at("ly").get<double>();
  Params q = params_from_json(h.at("params"));

  // size check before any payload allocation
  const auto header_end = is.tellg();
  is.seekg(0, std::ios::end);
  const auto file_end = is.tellg();
  const std::uint64_t actual = std::uint64_t(file_end - header_end);
  if (nx < 8 || ny < 8 || nx % 2 || ny % 2)
    throw field_io_error("read_field: invalid grid dimensions in header");
  const std::uint64_t expected = std::uint64_t(nx) * std::uint64_t(ny) * 8u;
  if (actual != expected) {
    std::ostringstream os;
    os << "read_field: payload size mismatch: expected " << expected
       << " bytes (nx*ny*8), found " << actual;
    throw field_io_error(os.str());
  }
  is.seekg(header_end);

  Field f(Grid2D(nx, ny, lx, ly));
  std::vector<std::uint64_t> buf(f.v.size());
  is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(expected));
  if (std::uint64_t(is.gcount()) != expected)
    throw field_io_error("read_field: truncated payload");
  for (std::size_t i = 0; i < f.v.size(); ++i)
    f.v[i] = detail::from_le_bits(buf[i]);
  return {f, q};
}

}  // namespace bozk
