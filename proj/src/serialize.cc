#include "balab/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace balab {

namespace {

constexpr char kMagic[4] = {'B', 'L', 'B', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in, const std::filesystem::path& path, const char* what) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error(path.string() + ": truncated while reading " + std::string(what));
  return v;
}

double get_f64(std::istream& in, const std::filesystem::path& path, const char* what) {
  double v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error(path.string() + ": truncated while reading " + std::string(what));
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return in;
}

void write_header(std::ostream& out, const GridDomain& g, std::uint32_t kind) {
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(g.n));
  put_u32(out, static_cast<std::uint32_t>(g.resolution));
  put_u32(out, static_cast<std::uint32_t>(g.naxes()));
  for (int a : g.active) put_u32(out, static_cast<std::uint32_t>(a));
  for (double L : g.periods) put_f64(out, L);
  put_u32(out, kind);
}

GridDomain read_header(std::istream& in, const std::filesystem::path& path, std::uint32_t* kind) {
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path.string() + ": not a field container (bad magic)");
  const std::uint32_t version = get_u32(in, path, "version");
  if (version != kVersion)
    throw std::runtime_error(path.string() + ": unsupported container version " +
                             std::to_string(version));
  GridDomain g;
  g.n = static_cast<int>(get_u32(in, path, "n"));
  g.resolution = static_cast<int>(get_u32(in, path, "resolution"));
  const std::uint32_t naxes = get_u32(in, path, "axis count");
  if (g.n < 2 || g.n > 8 || naxes == 0 || naxes > 16)
    throw std::runtime_error(path.string() + ": implausible header dimensions");
  g.active.resize(naxes);
  for (std::uint32_t a = 0; a < naxes; ++a)
    g.active[a] = static_cast<int>(get_u32(in, path, "axis"));
  g.periods.resize(static_cast<std::size_t>(2 * g.n));
  for (double& L : g.periods) L = get_f64(in, path, "period");
  g.validate();
  *kind = get_u32(in, path, "container kind");
  return g;
}

}  // namespace

void write_form(const std::filesystem::path& path, const ComplexForm& f) {
  std::ofstream out = open_out(path);
  write_header(out, f.domain(), 0);
  put_u32(out, static_cast<std::uint32_t>(f.terms().size()));
  for (const auto& [key, coeff] : f.terms()) {
    put_u32(out, static_cast<std::uint32_t>(key.J));
    put_u32(out, static_cast<std::uint32_t>(key.K));
    for (const Complex& c : coeff) {
      put_f64(out, c.real());
      put_f64(out, c.imag());
    }
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

ComplexForm read_form(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::uint32_t kind = 0;
  const GridDomain g = read_header(in, path, &kind);
  if (kind != 0) throw std::runtime_error(path.string() + ": container does not hold a form");
  ComplexForm f(g);
  const std::uint32_t nterms = get_u32(in, path, "term count");
  for (std::uint32_t t = 0; t < nterms; ++t) {
    FormKey key;
    key.J = static_cast<Mask>(get_u32(in, path, "holomorphic mask"));
    key.K = static_cast<Mask>(get_u32(in, path, "antiholomorphic mask"));
    CplxField& coeff = f.at(key);
    for (std::size_t i = 0; i < g.num_points(); ++i) {
      const double re = get_f64(in, path, "coefficient");
      const double im = get_f64(in, path, "coefficient");
      coeff[i] = Complex(re, im);
    }
  }
  return f;
}

void write_spacetime(const std::filesystem::path& path, const SpaceTimeField& f) {
  std::ofstream out = open_out(path);
  write_header(out, f.domain(), 1);
  put_u32(out, static_cast<std::uint32_t>(f.rows()));
  for (int i = 0; i < f.rows(); ++i)
    for (double v : f.row(i)) put_f64(out, v);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

SpaceTimeField read_spacetime(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::uint32_t kind = 0;
  const GridDomain g = read_header(in, path, &kind);
  if (kind != 1)
    throw std::runtime_error(path.string() + ": container does not hold a space-time field");
  const std::uint32_t rows = get_u32(in, path, "row count");
  if (rows < 2) throw std::runtime_error(path.string() + ": space-time container needs >= 2 rows");
  SpaceTimeField f(g, static_cast<int>(rows) - 1);
  for (std::uint32_t i = 0; i < rows; ++i) {
    RealField& row = f.row(static_cast<int>(i));
    for (double& v : row) v = get_f64(in, path, "row value");
  }
  return f;
}

void write_real_field(const std::filesystem::path& path, const GridDomain& g, const RealField& f) {
  if (f.size() != g.num_points())
    throw std::invalid_argument("write_real_field: field size does not match the grid");
  std::ofstream out = open_out(path);
  write_header(out, g, 1);
  put_u32(out, 1);
  for (double v : f) put_f64(out, v);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

RealField read_real_field(const std::filesystem::path& path, GridDomain* grid_out) {
  std::ifstream in = open_in(path);
  std::uint32_t kind = 0;
  const GridDomain g = read_header(in, path, &kind);
  if (kind != 1)
    throw std::runtime_error(path.string() + ": container does not hold a field");
  const std::uint32_t rows = get_u32(in, path, "row count");
  if (rows != 1) throw std::runtime_error(path.string() + ": expected a single-row field");
  RealField f(g.num_points());
  for (double& v : f) v = get_f64(in, path, "value");
  if (grid_out) *grid_out = g;
  return f;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create '" + path.string() + "'");
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << "\n";
  char buf[32];
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw std::invalid_argument("write_csv: row width does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, row[c]);
        if (std::stod(buf) == row[c]) break;
      }
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

OutputDir::OutputDir(const std::filesystem::path& final_path) : final_(final_path) {
  if (final_.empty()) throw std::invalid_argument("OutputDir: empty path");
  if (std::filesystem::exists(final_))
    throw std::runtime_error("output directory '" + final_.string() + "' already exists");
  stage_ = final_;
  stage_ += ".partial";
  std::filesystem::remove_all(stage_);
  std::filesystem::create_directories(stage_);
}

OutputDir::~OutputDir() {
  if (!committed_) {
    std::error_code ec;
    std::filesystem::remove_all(stage_, ec);
  }
}

void OutputDir::commit() {
  std::filesystem::rename(stage_, final_);
  committed_ = true;
}

}  // namespace balab
