#pragma once

// ASCII outputs. Numbers are printed with %.17g so reruns are byte-identical
// and values round-trip exactly.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "damgms/driver.hpp"
#include "damgms/errors.hpp"
#include "damgms/fem_assembly.hpp"
#include "damgms/grid.hpp"

namespace damgms {

enum class FieldFileFormat { Csv, Vtk };

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw FormatError("write to '" + path + "' failed");
}

}  // namespace detail

/// Nodal field. CSV: one line per node row j, values over i. VTK: legacy
/// ASCII STRUCTURED_POINTS with (nx+1) x (ny+1) x 1 points.
inline void write_field(const NodalField& field, const FineMesh& mesh, const std::string& path, FieldFileFormat format,
                        const std::string& name = "field") {
    if (field.size() != mesh.node_count()) {
        throw InvalidArgument("write_field: field has " + std::to_string(field.size()) + " values, mesh has " +
                              std::to_string(mesh.node_count()) + " nodes");
    }
    auto out = detail::open_for_write(path);
    const int px = mesh.nx() + 1;
    const int py = mesh.ny() + 1;
    if (format == FieldFileFormat::Csv) {
        for (int j = 0; j < py; ++j) {
            for (int i = 0; i < px; ++i) out << (i ? "," : "") << detail::num(field[mesh.node(i, j)]);
            out << '\n';
        }
    } else {
        out << "# vtk DataFile Version 3.0\n"
            << name << '\n'
            << "ASCII\n"
            << "DATASET STRUCTURED_POINTS\n"
            << "DIMENSIONS " << px << ' ' << py << " 1\n"
            << "ORIGIN 0 0 0\n"
            << "SPACING " << detail::num(mesh.h1()) << ' ' << detail::num(mesh.h2()) << " 1\n"
            << "POINT_DATA " << mesh.node_count() << '\n'
            << "SCALARS " << name << " double 1\n"
            << "LOOKUP_TABLE default\n";
        for (int n = 0; n < mesh.node_count(); ++n) out << detail::num(field[n]) << '\n';
    }
    detail::finish(out, path);
}

/// Reads a CSV nodal field written by write_field.
inline NodalField read_field_csv(const FineMesh& mesh, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            std::size_t used = 0;
            try {
                values.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw FormatError(path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
            }
            if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
                throw FormatError(path + ":" + std::to_string(line_no) + ": trailing characters in '" + cell + "'");
            }
        }
    }
    if (static_cast<int>(values.size()) != mesh.node_count()) {
        throw FormatError(path + ": expected " + std::to_string(mesh.node_count()) + " values, found " +
                          std::to_string(values.size()));
    }
    return Eigen::Map<const NodalField>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline const char* kErrorTableHeader = "coarse_dim,Li,energy_error_percent";

inline void write_error_table(const std::vector<ErrorReport>& reports, const std::string& path) {
    auto out = detail::open_for_write(path);
    out << kErrorTableHeader << '\n';
    for (const ErrorReport& r : reports) {
        out << r.coarse_dim << ',' << r.li << ',' << detail::num(r.energy_error_percent) << '\n';
    }
    detail::finish(out, path);
}

/// Sparse matrix as `row,col,value` lines (0-based) after a
/// `rows,cols,nnz` header line.
inline void write_matrix_coo(const SparseMatrix& m, const std::string& path) {
    auto out = detail::open_for_write(path);
    out << m.rows() << ',' << m.cols() << ',' << m.nonZeros() << '\n';
    for (int col = 0; col < m.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
            out << it.row() << ',' << it.col() << ',' << detail::num(it.value()) << '\n';
        }
    }
    detail::finish(out, path);
}

inline void write_vector(const Eigen::VectorXd& v, const std::string& path) {
    auto out = detail::open_for_write(path);
    for (Eigen::Index k = 0; k < v.size(); ++k) out << detail::num(v[k]) << '\n';
    detail::finish(out, path);
}

}  // namespace damgms
