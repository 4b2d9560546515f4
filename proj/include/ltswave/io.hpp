#ifndef LTSWAVE_IO_HPP
#define LTSWAVE_IO_HPP

#include "ltswave/mesh.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace ltswave {

/// Format a floating-point cell with 16 significant digits (scientific),
/// enough to round-trip a double through text.
std::string csv_num(double v);

/// Format an integer cell.
std::string csv_int(long long v);

/// Comma-separated writer: a header row naming the columns, then one row
/// per call.  Cells are pre-formatted strings (csv_num / csv_int).  The
/// file is flushed and closed by the destructor; write failures throw
/// IoFailure.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<std::string>& cells);
    void close();

  private:
    std::string path_;
    void* stream_ = nullptr; // std::ofstream, kept out of the header
    std::size_t n_cols_ = 0;
};

/// Write one scalar field as a legacy-VTK ASCII unstructured grid
/// (lines in 1D, triangles in 2D) with POINT_DATA at the mesh vertices.
/// `vertex_values` must hold one value per mesh point; for degree-2
/// fields pass the leading vertex block of the coefficient vector.
void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<double>& vertex_values,
               const std::string& field_name);

/// Series helper: "<prefix>_<index zero-padded to 4>.vtk".
std::string vtk_series_name(const std::string& prefix, std::size_t index);

/// Create the directory (and parents) if missing; throws IoFailure when
/// the path exists but is not a directory.
void ensure_directory(const std::string& path);

} // namespace ltswave

#endif
