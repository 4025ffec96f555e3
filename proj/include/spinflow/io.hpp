#pragma once

// Field serialization: a one-line JSON header {n, res, kind} followed by the
// raw payload — row-major over grid points, little-endian doubles, complex
// values interleaved (re, im). Components are interleaved per point.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinflow/grid.hpp"

namespace spinflow::io {

namespace detail {

inline void write_header(std::ostream& os, const Grid& g, const std::string& kind) {
  nlohmann::json hdr = {{"n", g.n}, {"res", g.res}, {"kind", kind}};
  os << hdr.dump() << '\n';
}

inline Grid read_header(std::istream& is, const std::string& want_kind) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("field file: missing JSON header");
  nlohmann::json hdr = nlohmann::json::parse(line);
  if (hdr.at("kind").get<std::string>() != want_kind)
    throw std::runtime_error("field file: kind mismatch, expected " + want_kind +
                             ", got " + hdr.at("kind").get<std::string>());
  return Grid(hdr.at("n").get<int>(), hdr.at("res").get<int>());
}

inline void write_doubles(std::ostream& os, const std::vector<double>& buf) {
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(double)));
}

inline void read_doubles(std::istream& is, std::vector<double>& buf) {
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(double)));
  if (!is) throw std::runtime_error("field file: truncated payload");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

}  // namespace detail

inline void write_scalar(const std::string& path, const ScalarField& f) {
  auto os = detail::open_out(path);
  detail::write_header(os, f.grid(), "scalar");
  detail::write_doubles(os, f.data());
}

inline ScalarField read_scalar(const std::string& path) {
  auto is = detail::open_in(path);
  ScalarField f(detail::read_header(is, "scalar"));
  detail::read_doubles(is, f.data());
  return f;
}

inline void write_sym2(const std::string& path, const Sym2Field& a) {
  auto os = detail::open_out(path);
  const Grid& g = a.grid();
  detail::write_header(os, g, "sym2");
  std::vector<double> buf;
  buf.reserve(g.points() * static_cast<std::size_t>(g.n * g.n));
  for (std::size_t p = 0; p < g.points(); ++p)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) buf.push_back(a.at(i, j, p));
  detail::write_doubles(os, buf);
}

inline Sym2Field read_sym2(const std::string& path) {
  auto is = detail::open_in(path);
  Grid g = detail::read_header(is, "sym2");
  std::vector<double> buf(g.points() * static_cast<std::size_t>(g.n * g.n));
  detail::read_doubles(is, buf);
  Sym2Field a(g);
  std::size_t k = 0;
  for (std::size_t p = 0; p < g.points(); ++p)
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) a.at(i, j, p) = buf[k++];
  return a;
}

inline void write_spinor(const std::string& path, const SpinorField& psi) {
  auto os = detail::open_out(path);
  const Grid& g = psi.grid();
  detail::write_header(os, g, "spinor");
  std::vector<double> buf;
  buf.reserve(g.points() * 2 * SpinorField::rank);
  for (std::size_t p = 0; p < g.points(); ++p)
    for (int c = 0; c < SpinorField::rank; ++c) {
      buf.push_back(psi.at(c, p).real());
      buf.push_back(psi.at(c, p).imag());
    }
  detail::write_doubles(os, buf);
}

inline SpinorField read_spinor(const std::string& path) {
  auto is = detail::open_in(path);
  Grid g = detail::read_header(is, "spinor");
  std::vector<double> buf(g.points() * 2 * SpinorField::rank);
  detail::read_doubles(is, buf);
  SpinorField psi(g);
  std::size_t k = 0;
  for (std::size_t p = 0; p < g.points(); ++p)
    for (int c = 0; c < SpinorField::rank; ++c) {
      psi.at(c, p) = complexd(buf[k], buf[k + 1]);
      k += 2;
    }
  return psi;
}

}  // namespace spinflow::io
