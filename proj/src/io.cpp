#include "mcf/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mcf {

namespace {

constexpr char kMagic[8] = {'M', 'C', 'F', 'G', 'R', 'I', 'D', '1'};

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void io_failure(const std::filesystem::path& path, const char* what) {
    throw Error(std::string(what) + ": " + path.string());
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) io_failure(path, "cannot open for writing");
    return out;
}

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
    char bytes[8];
    if (!in.read(bytes, 8)) io_failure(path, "truncated snapshot");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    T value;
    std::memcpy(&value, &bits, 8);
    return value;
}

}  // namespace

bool RunSummary::all_passed() const {
    for (const auto& p : properties)
        if (!p.passed) return false;
    return true;
}

Property& RunSummary::check(std::string name, std::string anchor, double measured, double tolerance,
                            std::string relation) {
    Property p{std::move(name), std::move(anchor), measured, tolerance, std::move(relation), false};
    p.passed = p.relation == ">=" ? measured >= tolerance : measured <= tolerance;
    properties.push_back(std::move(p));
    return properties.back();
}

void RunSummary::scalar(std::string key, double value) {
    scalars.emplace_back(std::move(key), format_double(value));
}

void RunSummary::scalar(std::string key, std::string value) {
    scalars.emplace_back(std::move(key), std::move(value));
}

void write_series_csv(const std::filesystem::path& path, const std::vector<SeriesRow>& series,
                      const std::vector<double>& residual) {
    if (!residual.empty() && residual.size() != series.size())
        throw Error("series.csv: residual column has " + std::to_string(residual.size()) + " entries for " +
                    std::to_string(series.size()) + " rows");
    auto out = open_out(path);
    out << "t,sup_u,sup_grad,sup_ut,J,diss,src,resid\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& r = series[k];
        const double resid = k < residual.size() ? residual[k] : 0.0;
        for (double v : {r.t, r.sup_u, r.sup_grad, r.sup_ut, r.energy, r.dissipation, r.source})
            out << format_double(v) << ',';
        out << format_double(resid) << '\n';
    }
    if (!out) io_failure(path, "write failed");
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    auto out = open_out(path);
    for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
    if (!out) io_failure(path, "write failed");
}

void write_snapshot(const std::filesystem::path& path, const Grid& grid, const FieldState& state) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write(kMagic, 8);
    const int dim = grid.dim();
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(dim));
    for (int k = 0; k < dim; ++k) put_le<std::uint64_t>(out, static_cast<std::uint64_t>(grid.counts()[k]));
    for (int k = 0; k < dim; ++k) put_le<double>(out, grid.lower()[k]);
    const Point upper = grid.upper();
    for (int k = 0; k < dim; ++k) put_le<double>(out, upper[k]);
    for (std::int32_t node = 0; node < grid.node_count(); ++node) put_le<double>(out, state.values[node]);
    if (!out) io_failure(path, "write failed");
}

SnapshotData read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_failure(path, "cannot open for reading");
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) io_failure(path, "bad snapshot magic");
    SnapshotData d;
    d.dim = get_le<std::uint64_t>(in, path);
    if (d.dim < 1 || d.dim > 3) io_failure(path, "bad snapshot dimension");
    std::uint64_t total = 1;
    for (std::uint64_t k = 0; k < d.dim; ++k) {
        d.counts.push_back(get_le<std::uint64_t>(in, path));
        total *= d.counts.back();
    }
    for (std::uint64_t k = 0; k < d.dim; ++k) d.lower.push_back(get_le<double>(in, path));
    for (std::uint64_t k = 0; k < d.dim; ++k) d.upper.push_back(get_le<double>(in, path));
    d.values.reserve(total);
    for (std::uint64_t i = 0; i < total; ++i) d.values.push_back(get_le<double>(in, path));
    if (in.peek() != std::char_traits<char>::eof()) io_failure(path, "trailing bytes in snapshot");
    return d;
}

std::uint64_t snapshot_size(const std::vector<std::uint64_t>& counts) {
    std::uint64_t total = 1;
    for (auto c : counts) total *= c;
    return 8 + 8 + counts.size() * 8 * 3 + total * 8;
}

void write_summary(const std::filesystem::path& path, const RunSummary& summary) {
    auto out = open_out(path);
    out << "experiment: " << summary.kind << '\n';
    out << "passed: " << (summary.all_passed() ? "yes" : "no") << '\n';
    for (const auto& p : summary.properties) {
        out << "property." << p.name << ": " << (p.passed ? "pass" : "FAIL") << " measured "
            << format_double(p.measured) << ' ' << p.relation << ' ' << format_double(p.tolerance) << '\n';
        out << "property." << p.name << ".anchor: " << p.anchor << '\n';
    }
    for (const auto& [k, v] : summary.scalars) out << k << ": " << v << '\n';
    for (const auto& f : summary.files) out << "file: " << f << '\n';
    if (!out) io_failure(path, "write failed");
}

std::vector<std::string> write_outputs(const std::filesystem::path& dir, const OutputBundle& bundle,
                                       RunSummary& summary) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) io_failure(dir, "cannot create output directory");
    std::vector<std::string> files;
    if (bundle.flow) {
        write_series_csv(dir / "series.csv", bundle.flow->series,
                         bundle.trace ? bundle.trace->residual : std::vector<double>{});
        files.push_back("series.csv");
        for (const auto& snap : bundle.flow->snapshots) {
            const std::string name = "snapshot_" + std::to_string(snap.step) + ".bin";
            write_snapshot(dir / name, *bundle.flow->grid, snap.state);
            files.push_back(name);
        }
    }
    for (const auto& table : bundle.tables) {
        write_csv(dir / table.name, table);
        files.push_back(table.name);
    }
    const Grid* grid = bundle.grid ? bundle.grid.get() : (bundle.flow ? bundle.flow->grid.get() : nullptr);
    for (const auto& [name, state] : bundle.fields) {
        if (!grid) throw Error("field output needs a grid");
        write_snapshot(dir / name, *grid, state);
        files.push_back(name);
    }
    files.push_back("summary.txt");
    summary.files.insert(summary.files.end(), files.begin(), files.end());
    write_summary(dir / "summary.txt", summary);
    return files;
}

}  // namespace mcf
