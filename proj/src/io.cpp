#include "hemorom/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hemorom/errors.hpp"

namespace hemorom {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

void read_field_header(std::istream& in, const std::filesystem::path& path,
                       const std::string& expected_kind, int& nx, int& ny) {
  std::string magic, version, kind;
  in >> magic >> version >> kind >> nx >> ny;
  if (!in || magic != "ROMFLD" || version != "v1")
    throw IoError("bad ROMFLD header in " + path.string());
  if (kind != expected_kind)
    throw IoError("expected " + expected_kind + " field in " + path.string() +
                  ", found " + kind);
  if (nx < 1 || ny < 1) throw IoError("bad field dims in " + path.string());
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& f,
                 int nx, int ny) {
  if (f.size() != nx * ny) throw DimensionError("write_field: size mismatch");
  auto out = open_out(path);
  out << "ROMFLD v1 scalar " << nx << ' ' << ny << '\n';
  for (int c = 0; c < f.size(); ++c) out << fmt17(f[c]) << '\n';
}

void write_field(const std::filesystem::path& path, const VectorField& f,
                 int nx, int ny) {
  if (f.size() != nx * ny) throw DimensionError("write_field: size mismatch");
  auto out = open_out(path);
  out << "ROMFLD v1 vector " << nx << ' ' << ny << '\n';
  for (int c = 0; c < f.size(); ++c)
    out << fmt17(f[c].x) << ' ' << fmt17(f[c].y) << '\n';
}

ScalarField read_scalar_field(const std::filesystem::path& path, int* nx_out,
                              int* ny_out) {
  auto in = open_in(path);
  int nx, ny;
  read_field_header(in, path, "scalar", nx, ny);
  ScalarField f(nx * ny);
  for (int c = 0; c < f.size(); ++c)
    if (!(in >> f[c])) throw IoError("truncated field file: " + path.string());
  if (nx_out) *nx_out = nx;
  if (ny_out) *ny_out = ny;
  return f;
}

VectorField read_vector_field(const std::filesystem::path& path, int* nx_out,
                              int* ny_out) {
  auto in = open_in(path);
  int nx, ny;
  read_field_header(in, path, "vector", nx, ny);
  VectorField f(nx * ny);
  for (int c = 0; c < f.size(); ++c)
    if (!(in >> f[c].x >> f[c].y))
      throw IoError("truncated field file: " + path.string());
  if (nx_out) *nx_out = nx;
  if (ny_out) *ny_out = ny;
  return f;
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  auto out = open_out(path);
  out << "ROMMAT v1 " << m.rows << ' ' << m.cols << '\n';
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) out << (j ? " " : "") << fmt17(m(i, j));
    out << '\n';
  }
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string magic, version;
  int rows, cols;
  in >> magic >> version >> rows >> cols;
  if (!in || magic != "ROMMAT" || version != "v1")
    throw IoError("bad ROMMAT header in " + path.string());
  DenseMatrix m(rows, cols);
  for (double& v : m.a)
    if (!(in >> v)) throw IoError("truncated matrix file: " + path.string());
  return m;
}

void write_tensor(const std::filesystem::path& path, const Tensor3& t) {
  auto out = open_out(path);
  out << "ROMTEN v1 " << t.d1 << ' ' << t.d2 << ' ' << t.d3 << '\n';
  for (int i = 0; i < t.d1; ++i)
    for (int j = 0; j < t.d2; ++j) {
      for (int k = 0; k < t.d3; ++k) out << (k ? " " : "") << fmt17(t(i, j, k));
      out << '\n';
    }
}

Tensor3 read_tensor(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string magic, version;
  int d1, d2, d3;
  in >> magic >> version >> d1 >> d2 >> d3;
  if (!in || magic != "ROMTEN" || version != "v1")
    throw IoError("bad ROMTEN header in " + path.string());
  Tensor3 t(d1, d2, d3);
  for (double& v : t.a)
    if (!(in >> v)) throw IoError("truncated tensor file: " + path.string());
  return t;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot checksum: " + path.string());
  uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  char out[20];
  std::snprintf(out, sizeof(out), "%016" PRIx64, h);
  return out;
}

}  // namespace hemorom
