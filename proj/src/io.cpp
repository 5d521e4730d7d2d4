#include "zyg/io.hpp"

#include <cstring>
#include <fstream>

namespace zyg {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("ZYGF: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("ZYGF: truncated file");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

void put_payload(std::ostream& os, const ScalarField& f) {
  for (double v : f.a) put_f64(os, v);
}

void get_payload(std::istream& is, ScalarField& f) {
  for (double& v : f.a) v = get_f64(is);
}

void put_spec(std::ostream& os, const GridSpec& s) {
  put_u32(os, static_cast<std::uint32_t>(s.ndim));
  for (int a = 0; a < s.ndim; ++a) put_u32(os, static_cast<std::uint32_t>(s.sizes[a]));
  put_f64(os, s.half_width);
}

GridSpec get_spec(std::istream& is) {
  int ndim = static_cast<int>(get_u32(is));
  std::vector<int> sizes(ndim);
  for (int a = 0; a < ndim; ++a) sizes[a] = static_cast<int>(get_u32(is));
  double hw = get_f64(is);
  return GridSpec::make(sizes, hw);
}

}  // namespace

void field_io_write(const std::string& path, const FieldObject& obj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ZYGF: cannot open for writing: " + path);
  os.write("ZYGF", 4);
  put_u32(os, 1);

  if (std::holds_alternative<ScalarField>(obj)) {
    const auto& f = std::get<ScalarField>(obj);
    assert_finite(f, "field_io_write");
    put_u32(os, 0);
    put_spec(os, f.spec);
    put_payload(os, f);
  } else if (std::holds_alternative<FormField>(obj)) {
    const auto& w = std::get<FormField>(obj);
    for (const auto& c : w.comps) {
      require_same_spec(c.spec, w.spec, "field_io_write(form)");
      assert_finite(c, "field_io_write(form)");
    }
    put_u32(os, 1);
    put_spec(os, w.spec);
    put_u32(os, static_cast<std::uint32_t>(w.degree));
    put_u32(os, static_cast<std::uint32_t>(w.comps.size()));
    for (const auto& mi : w.indices)
      for (int ax : mi) put_u32(os, static_cast<std::uint32_t>(ax));
    for (const auto& c : w.comps) put_payload(os, c);
  } else if (std::holds_alternative<Frame>(obj)) {
    const auto& fr = std::get<Frame>(obj);
    for (const auto& vf : fr.vfs)
      for (const auto& c : vf) {
        require_same_spec(c.spec, fr.spec, "field_io_write(frame)");
        assert_finite(c, "field_io_write(frame)");
      }
    fr.check_c_antisymmetry();
    put_u32(os, 2);
    put_spec(os, fr.spec);
    put_u32(os, static_cast<std::uint32_t>(fr.q));
    put_u32(os, fr.has_c ? 1 : 0);
    for (const auto& vf : fr.vfs)
      for (const auto& c : vf) put_payload(os, c);
    if (fr.has_c)
      for (const auto& c : fr.c) put_payload(os, c);
  } else {
    const auto& m = std::get<MatrixField>(obj);
    for (const auto& c : m.e) {
      require_same_spec(c.spec, m.spec, "field_io_write(matrix)");
      assert_finite(c, "field_io_write(matrix)");
    }
    put_u32(os, 3);
    put_spec(os, m.spec);
    put_u32(os, static_cast<std::uint32_t>(m.rows));
    put_u32(os, static_cast<std::uint32_t>(m.cols));
    for (const auto& c : m.e) put_payload(os, c);
  }
  if (!os) throw std::runtime_error("ZYGF: write failed: " + path);
}

FieldObject field_io_read(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ZYGF: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "ZYGF", 4) != 0)
    throw std::runtime_error("ZYGF: bad magic in " + path);
  if (get_u32(is) != 1) throw std::runtime_error("ZYGF: unsupported version");
  std::uint32_t kind = get_u32(is);
  GridSpec spec = get_spec(is);

  if (kind == 0) {
    ScalarField f(spec);
    get_payload(is, f);
    return f;
  }
  if (kind == 1) {
    int degree = static_cast<int>(get_u32(is));
    int ncomp = static_cast<int>(get_u32(is));
    FormField w(degree, spec);
    if (static_cast<int>(w.comps.size()) != ncomp)
      throw std::runtime_error("ZYGF: component count mismatch");
    for (auto& mi : w.indices)
      for (int& ax : mi) ax = static_cast<int>(get_u32(is));
    for (auto& c : w.comps) get_payload(is, c);
    return w;
  }
  if (kind == 2) {
    int q = static_cast<int>(get_u32(is));
    bool has_c = get_u32(is) != 0;
    Frame fr(q, spec);
    for (auto& vf : fr.vfs)
      for (auto& c : vf) get_payload(is, c);
    if (has_c) {
      fr.has_c = true;
      fr.c.assign(static_cast<std::size_t>(q) * q * q, ScalarField(spec));
      for (auto& c : fr.c) get_payload(is, c);
    }
    return fr;
  }
  if (kind == 3) {
    int rows = static_cast<int>(get_u32(is));
    int cols = static_cast<int>(get_u32(is));
    MatrixField m(rows, cols, spec);
    for (auto& c : m.e) get_payload(is, c);
    return m;
  }
  throw std::runtime_error("ZYGF: unknown kind");
}

void write_scalar(const std::string& path, const ScalarField& f) { field_io_write(path, f); }

ScalarField read_scalar(const std::string& path) {
  auto obj = field_io_read(path);
  if (!std::holds_alternative<ScalarField>(obj))
    throw std::runtime_error("ZYGF: expected a scalar field in " + path);
  return std::get<ScalarField>(obj);
}

}  // namespace zyg
