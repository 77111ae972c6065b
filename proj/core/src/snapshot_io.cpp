#include "skdv/snapshot_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace skdv {

static_assert(std::endian::native == std::endian::little, "binary snapshots assume a little-endian host");

namespace {

std::vector<double> parse_row(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool get(std::istream& is, T& v) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

void write_snapshots_csv(const std::string& path, const std::vector<Snapshot>& snaps) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    if (snaps.empty()) return;
    os << std::setprecision(17);
    const Grid& g = snaps.front().u.grid();
    os << "t";
    for (double x : g.nodes()) os << ',' << x;
    os << '\n';
    for (const auto& s : snaps) {
        os << s.t;
        for (double v : s.u.values()) os << ',' << v;
        os << '\n';
    }
}

std::vector<Snapshot> read_snapshots_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) return {};
    const auto header = parse_row(line.substr(line.find(',') + 1));
    const std::size_t n = header.size();
    if (n < 8) throw std::runtime_error(path + ": header too short");
    // x_0 = -L/2 exactly, unlike dx * N after decimal round trip
    Grid g(-2.0 * header[0], n);
    std::vector<Snapshot> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto row = parse_row(line);
        if (row.size() != n + 1) throw std::runtime_error(path + ": ragged row");
        Snapshot s;
        s.t = row[0];
        s.u = Field(g, std::vector<double>(row.begin() + 1, row.end()));
        out.push_back(std::move(s));
    }
    return out;
}

void write_snapshot_binary(std::ostream& os, const Snapshot& s) {
    put(os, s.u.grid().length());
    put(os, static_cast<std::uint64_t>(s.u.size()));
    put(os, s.t);
    put(os, s.eps);
    os.write(reinterpret_cast<const char*>(s.u.data()), static_cast<std::streamsize>(s.u.size() * sizeof(double)));
}

void write_snapshots_binary(const std::string& path, const std::vector<Snapshot>& snaps) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& s : snaps) write_snapshot_binary(os, s);
}

std::vector<Snapshot> read_snapshots_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<Snapshot> out;
    Grid g;
    double L = 0.0;
    while (get(is, L)) {
        std::uint64_t n = 0;
        Snapshot s;
        if (!get(is, n) || !get(is, s.t) || !get(is, s.eps)) throw std::runtime_error(path + ": truncated header");
        if (!g.valid() || g.size() != n || g.length() != L) g = Grid(L, n);
        std::vector<double> v(n);
        if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
            throw std::runtime_error(path + ": truncated record");
        s.u = Field(g, std::move(v));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace skdv
