#pragma once

/**
 * @file output.hpp
 * @brief Writers for VTK fields, slice and error-table CSV files.
 */

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rdfm/dg.hpp"
#include "rdfm/geometry.hpp"

namespace rdfm {

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A DG field to be written under `name`; two-component fields become vector arrays.
struct NamedField {
    std::string name;
    const DGField* field = nullptr;
};

/**
 * @brief Legacy ASCII unstructured grid, one independent quad per cell.
 *
 * Each cell gets its own four corner points, so jumps between cells survive
 * in the point data. All fields must live on `grid`.
 */
void write_field_vtk(const std::string& path, const Grid& grid, const std::vector<NamedField>& fields);

/// `s,value` rows; samples must be nonempty with nondecreasing arclength.
void write_slice_csv(const std::string& path, const std::vector<std::pair<double, double>>& samples);

struct ErrorLevel {
    int mesh = 0;  ///< cells per side
    double l1 = 0.0;
    double l2 = 0.0;
};

struct ErrorReport {
    std::vector<ErrorLevel> levels;

    /// Observed order between level i-1 and i (i >= 1), measured against h.
    double l1_order(std::size_t i) const;
    double l2_order(std::size_t i) const;
};

/// `mesh,L1_error,L1_order,L2_error,L2_order`; orders blank on the first row.
void write_error_table(const std::string& path, const ErrorReport& report);

/// `segment,kind,x1,y1,x2,y2,thickness,perm` for the placed segments.
void write_segments_csv(const std::string& path, const Clipping& clipping);

/// `cell,x,y,<name>` with cell centers and cell averages.
void write_cell_average_csv(const std::string& path, const DGField& field, const std::string& name);

}  // namespace rdfm
