#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcf/flow.hpp"
#include "mcf/verify.hpp"

namespace mcf {

/// One asserted property of a run. `anchor` states the mathematical fact the
/// check realizes.
struct Property {
    std::string name;
    std::string anchor;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string relation = "<=";  ///< how measured is compared with tolerance
    bool passed = false;
};

struct RunSummary {
    std::string kind;
    std::vector<Property> properties;
    std::vector<std::pair<std::string, std::string>> scalars;
    std::vector<std::string> files;

    bool all_passed() const;
    /// Adds a property; passed = measured <= tolerance (or >= for relation ">=").
    Property& check(std::string name, std::string anchor, double measured, double tolerance,
                    std::string relation = "<=");
    void scalar(std::string key, double value);
    void scalar(std::string key, std::string value);
};

/// Header: t,sup_u,sup_grad,sup_ut,J,diss,src,resid. `residual` may be empty
/// (column written as 0) or one entry per row.
void write_series_csv(const std::filesystem::path& path, const std::vector<SeriesRow>& series,
                      const std::vector<double>& residual);

struct CsvTable {
    std::string name;  ///< file name
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Raw field dump: "MCFGRID1", u64 dim, u64 counts[dim], f64 lower[dim],
/// f64 upper[dim], f64 values[prod counts] (x1 fastest, NaN outside the
/// domain); all little-endian.
void write_snapshot(const std::filesystem::path& path, const Grid& grid, const FieldState& state);

struct SnapshotData {
    std::uint64_t dim = 0;
    std::vector<std::uint64_t> counts;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> values;
};

SnapshotData read_snapshot(const std::filesystem::path& path);

/// Size in bytes of a dump with the given per-axis counts.
std::uint64_t snapshot_size(const std::vector<std::uint64_t>& counts);

void write_summary(const std::filesystem::path& path, const RunSummary& summary);

struct OutputBundle {
    const FlowReport* flow = nullptr;
    const EnergyTrace* trace = nullptr;
    std::vector<CsvTable> tables;
    /// Extra named field dumps (file name, state) on the flow grid or `grid`.
    std::shared_ptr<const Grid> grid;
    std::vector<std::pair<std::string, FieldState>> fields;
};

/// Writes series.csv, snapshot_<step>.bin per snapshot, extra tables and
/// fields, then summary.txt; the manifest is appended to summary.files.
std::vector<std::string> write_outputs(const std::filesystem::path& dir, const OutputBundle& bundle,
                                       RunSummary& summary);

}  // namespace mcf
