#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "smcflow/diffgeo.hpp"
#include "smcflow/grid.hpp"

namespace smc::io {

/// Immersion snapshot format:
///
///   # smcflow immersion snapshot
///   dim 2
///   shape 64 64
///   param_periods 6.2831853071795862 6.2831853071795862
///   ambient_dim 4
///   x0 x1 x2 x3
///   <one row per grid point, row-major multi-index order, 17 significant digits>
void write_snapshot(std::ostream& os, const GridImmersion& imm);
GridImmersion read_snapshot(std::istream& is);

void save_snapshot(const std::filesystem::path& path, const GridImmersion& imm);
GridImmersion load_snapshot(const std::filesystem::path& path);

/// ShapeField export, same point ordering as the snapshot, one named column
/// per component (metric, mean curvature, frame, rho, optional torsion).
void write_shape_field(std::ostream& os, const ShapeField& shape,
                       const TorsionForm* torsion = nullptr);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double x);

/// Minimal CSV table: mandatory header, full-precision numeric cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add_row(const std::vector<double>& values);
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

/// Writes via a temporary file in the same directory followed by rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace smc::io
