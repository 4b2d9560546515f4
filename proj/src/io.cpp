#include "ltswave/io.hpp"

#include "ltswave/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ltswave {

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15e", v);
    return buf;
}

std::string csv_int(long long v) {
    return std::to_string(v);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), n_cols_(columns.size()) {
    if (columns.empty())
        throw InvalidArgument("csv: need at least one column");
    auto* out = new std::ofstream(path);
    if (!*out) {
        delete out;
        throw IoFailure("csv: cannot open '" + path + "' for writing");
    }
    stream_ = out;
    for (std::size_t i = 0; i < columns.size(); ++i)
        *out << (i ? "," : "") << columns[i];
    *out << '\n';
}

CsvWriter::~CsvWriter() {
    close();
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (!stream_)
        throw IoFailure("csv: writer for '" + path_ + "' is closed");
    if (cells.size() != n_cols_)
        throw InvalidArgument("csv: row width does not match the header");
    auto* out = static_cast<std::ofstream*>(stream_);
    for (std::size_t i = 0; i < cells.size(); ++i)
        *out << (i ? "," : "") << cells[i];
    *out << '\n';
    if (!*out)
        throw IoFailure("csv: write to '" + path_ + "' failed");
}

void CsvWriter::close() {
    if (!stream_)
        return;
    auto* out = static_cast<std::ofstream*>(stream_);
    out->flush();
    const bool ok = static_cast<bool>(*out);
    delete out;
    stream_ = nullptr;
    if (!ok)
        throw IoFailure("csv: flush of '" + path_ + "' failed");
}

void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<double>& vertex_values,
               const std::string& field_name) {
    if (vertex_values.size() != mesh.points.size())
        throw InvalidArgument("vtk: need one value per mesh vertex");

    std::ofstream out(path);
    if (!out)
        throw IoFailure("vtk: cannot open '" + path + "' for writing");

    const std::size_t nv = mesh.vertices_per_elem();
    out << "# vtk DataFile Version 3.0\n"
        << field_name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";

    out << "POINTS " << mesh.points.size() << " double\n";
    out << std::setprecision(16);
    for (const Point& p : mesh.points)
        out << p.x << ' ' << p.y << " 0\n";

    out << "CELLS " << mesh.elements.size() << ' '
        << mesh.elements.size() * (nv + 1) << '\n';
    for (const Simplex& s : mesh.elements) {
        out << nv;
        for (std::size_t k = 0; k < nv; ++k)
            out << ' ' << s.v[k];
        out << '\n';
    }

    const int cell_type = mesh.dim == 1 ? 3 : 5; // VTK_LINE / VTK_TRIANGLE
    out << "CELL_TYPES " << mesh.elements.size() << '\n';
    for (std::size_t e = 0; e < mesh.elements.size(); ++e)
        out << cell_type << '\n';

    out << "POINT_DATA " << mesh.points.size() << '\n'
        << "SCALARS " << field_name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : vertex_values)
        out << v << '\n';

    if (!out)
        throw IoFailure("vtk: write to '" + path + "' failed");
}

std::string vtk_series_name(const std::string& prefix, std::size_t index) {
    std::ostringstream name;
    name << prefix << '_' << std::setw(4) << std::setfill('0') << index << ".vtk";
    return name.str();
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec || !std::filesystem::is_directory(path))
        throw IoFailure("io: cannot create directory '" + path + "'");
}

} // namespace ltswave
