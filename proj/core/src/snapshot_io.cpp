#include "smcflow/snapshot_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "smcflow/errors.hpp"
#include "smcflow/immersion.hpp"

namespace smc::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_snapshot(std::ostream& os, const GridImmersion& imm) {
  const Grid& g = imm.grid;
  const int amb = g.ambient_dim();
  os << "# smcflow immersion snapshot\n";
  os << "dim " << g.dim << "\n";
  os << "shape " << g.shape[0];
  if (g.dim == 2) os << ' ' << g.shape[1];
  os << "\nparam_periods " << format_double(g.periods[0]);
  if (g.dim == 2) os << ' ' << format_double(g.periods[1]);
  os << "\nambient_dim " << amb << "\n";
  for (int k = 0; k < amb; ++k) os << (k ? " " : "") << 'x' << k;
  os << '\n';
  for (const Vec& x : imm.points) {
    for (int k = 0; k < amb; ++k) os << (k ? " " : "") << format_double(x[k]);
    os << '\n';
  }
}

GridImmersion read_snapshot(std::istream& is) {
  auto fail = [](const std::string& what) -> InvalidInput {
    return InvalidInput("snapshot: " + what);
  };
  std::string line;
  auto next = [&]() -> std::string {
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      return line;
    }
    throw fail("unexpected end of file");
  };
  auto keyed = [&](const std::string& key) {
    std::istringstream ls(next());
    std::string k;
    ls >> k;
    if (k != key) throw fail("expected '" + key + "', found '" + k + "'");
    return ls.str().substr(k.size());
  };

  GridImmersion imm;
  Grid& g = imm.grid;
  {
    std::istringstream ls(keyed("dim"));
    if (!(ls >> g.dim) || (g.dim != 1 && g.dim != 2)) throw fail("dim must be 1 or 2");
  }
  {
    std::istringstream ls(keyed("shape"));
    g.shape = {0, 1};
    for (int a = 0; a < g.dim; ++a)
      if (!(ls >> g.shape[a])) throw fail("bad shape line");
  }
  {
    std::istringstream ls(keyed("param_periods"));
    g.periods = {0.0, 1.0};
    for (int a = 0; a < g.dim; ++a)
      if (!(ls >> g.periods[a]) || !(g.periods[a] > 0)) throw fail("bad param_periods line");
    if (g.dim == 1) g.periods[1] = 1.0;
  }
  int amb = 0;
  {
    std::istringstream ls(keyed("ambient_dim"));
    if (!(ls >> amb) || amb != g.dim + 2) throw fail("ambient_dim must equal dim + 2");
  }
  next();  // column header
  imm.points.resize(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    std::istringstream ls(next());
    Vec x = Vec::Zero();
    for (int k = 0; k < amb; ++k) {
      std::string tok;
      if (!(ls >> tok)) throw fail("row " + std::to_string(p) + " is short");
      x[k] = std::stod(tok);
    }
    imm.points[p] = x;
  }
  validate(imm);
  return imm;
}

void save_snapshot(const std::filesystem::path& path, const GridImmersion& imm) {
  std::ostringstream os;
  write_snapshot(os, imm);
  write_file_atomic(path, os.str());
}

GridImmersion load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

void write_shape_field(std::ostream& os, const ShapeField& shape, const TorsionForm* torsion) {
  const int n = shape.dim();
  const int amb = shape.grid.ambient_dim();
  std::vector<std::string> cols;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) cols.push_back("g_" + std::to_string(i) + std::to_string(j));
  for (const char* name : {"H", "nu1", "nu2"})
    for (int k = 0; k < amb; ++k) cols.push_back(std::string(name) + "_" + std::to_string(k));
  cols.push_back("rho");
  if (torsion != nullptr)
    for (int i = 0; i < n; ++i) cols.push_back("tau_" + std::to_string(i));

  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  for (std::size_t p = 0; p < shape.size(); ++p) {
    std::vector<double> row;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) row.push_back(shape.metric[p](i, j));
    for (const NormalField* f : {&shape.mean_curvature, &shape.nu1, &shape.nu2})
      for (int k = 0; k < amb; ++k) row.push_back(f->empty() ? std::nan("") : (*f)[p][k]);
    row.push_back(shape.rho[p]);
    if (torsion != nullptr)
      for (int i = 0; i < n; ++i) row.push_back(torsion->tau[p][i]);
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << '\n';
  }
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) throw InvalidInput("CSV row width does not match header");
  rows_.push_back(values);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::ios_base::failure("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

}  // namespace smc::io
