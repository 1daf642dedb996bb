#include "superrad/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "superrad/error.hpp"

namespace superrad {
namespace {

void require_spacing(double d) {
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw InvalidArgument("lattice spacing must be positive and finite");
    }
}

void require_count(std::size_t n) {
    if (n == 0) throw InvalidArgument("atom count must be at least 1");
}

double uniform53(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

AtomCloud::AtomCloud(std::vector<Vec3> positions, Vec3 dipole, DipoleMode mode,
                     std::string label)
    : positions_(std::move(positions)), dipole_(dipole), mode_(mode), label_(std::move(label)) {
    if (std::abs(dipole_.norm() - 1.0) > 1e-12) {
        throw InvalidArgument("dipole orientation must be a unit vector");
    }
    for (const auto& p : positions_) {
        if (!p.allFinite()) throw InvalidArgument("atom position is not finite");
    }
    // exact coincidences only; near-coincident pairs are rejected by the kernel
    std::vector<std::size_t> order(positions_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto less = [this](std::size_t a, std::size_t b) {
        const auto& p = positions_[a];
        const auto& q = positions_[b];
        if (p.x() != q.x()) return p.x() < q.x();
        if (p.y() != q.y()) return p.y() < q.y();
        return p.z() < q.z();
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (positions_[order[i]] == positions_[order[i - 1]]) {
            throw InvalidArgument("coincident atoms " + std::to_string(order[i - 1]) + " and " +
                                  std::to_string(order[i]));
        }
    }
}

AtomCloud AtomCloud::translated(const Vec3& shift) const {
    std::vector<Vec3> moved = positions_;
    for (auto& p : moved) p += shift;
    return AtomCloud(std::move(moved), dipole_, mode_, label_);
}

AtomCloud AtomCloud::with_label(std::string label) const {
    AtomCloud copy = *this;
    copy.label_ = std::move(label);
    return copy;
}

AtomCloud line_lattice(std::size_t n, double d) {
    require_count(n);
    require_spacing(d);
    std::vector<Vec3> pos;
    pos.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pos.emplace_back(0.0, static_cast<double>(i) * d, 0.0);
    return AtomCloud(std::move(pos), Vec3::UnitZ(), DipoleMode::Linear, "line");
}

AtomCloud double_line_lattice(std::size_t n_total, double d, LineSplit split, double offset) {
    require_count(n_total);
    require_spacing(d);
    if (split == LineSplit::Even && n_total % 2 != 0) {
        throw InvalidArgument("double line needs an even atom total");
    }
    if (offset < 0.0) offset = d;
    require_spacing(offset);
    const std::size_t first = (n_total + 1) / 2;
    std::vector<Vec3> pos;
    pos.reserve(n_total);
    for (std::size_t i = 0; i < first; ++i) pos.emplace_back(0.0, static_cast<double>(i) * d, 0.0);
    for (std::size_t i = 0; i < n_total - first; ++i) {
        pos.emplace_back(offset, static_cast<double>(i) * d, 0.0);
    }
    return AtomCloud(std::move(pos), Vec3::UnitZ(), DipoleMode::Linear, "double_line");
}

AtomCloud square_lattice(std::size_t n1, double d) {
    require_count(n1);
    require_spacing(d);
    std::vector<Vec3> pos;
    pos.reserve(n1 * n1);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n1; ++j) {
            pos.emplace_back(static_cast<double>(i) * d, static_cast<double>(j) * d, 0.0);
        }
    }
    return AtomCloud(std::move(pos), Vec3::UnitZ(), DipoleMode::Linear, "square");
}

AtomCloud cubic_lattice(std::size_t n1, double d) {
    require_count(n1);
    require_spacing(d);
    std::vector<Vec3> pos;
    pos.reserve(n1 * n1 * n1);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n1; ++j) {
            for (std::size_t k = 0; k < n1; ++k) {
                pos.emplace_back(static_cast<double>(i) * d, static_cast<double>(j) * d,
                                 static_cast<double>(k) * d);
            }
        }
    }
    return AtomCloud(std::move(pos), Vec3::UnitZ(), DipoleMode::Linear, "cubic");
}

AtomCloud random_cloud(std::size_t n, double extent, double min_sep, std::uint64_t seed) {
    require_count(n);
    require_spacing(extent);
    if (min_sep < 0.0) throw InvalidArgument("minimum separation must be nonnegative");
    std::mt19937_64 rng(seed);
    std::vector<Vec3> pos;
    pos.reserve(n);
    std::size_t attempts = 0;
    while (pos.size() < n) {
        if (++attempts > 1000 * n + 10000) {
            throw InvalidArgument("cannot place atoms with the requested minimum separation");
        }
        Vec3 p(uniform53(rng) * extent, uniform53(rng) * extent, uniform53(rng) * extent);
        bool ok = true;
        for (const auto& q : pos) {
            if ((p - q).norm() < min_sep) {
                ok = false;
                break;
            }
        }
        if (ok) pos.push_back(p);
    }
    return AtomCloud(std::move(pos), Vec3::UnitZ(), DipoleMode::Linear, "random");
}

std::vector<std::size_t> thin_indices(std::size_t n, double p_remove, std::uint64_t seed) {
    if (!(p_remove >= 0.0 && p_remove <= 1.0)) {
        throw InvalidArgument("removal probability must lie in [0, 1]");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (uniform53(rng) >= p_remove) kept.push_back(i);
    }
    return kept;
}

AtomCloud thin_cloud(const AtomCloud& cloud, double p_remove, std::uint64_t seed) {
    const auto kept = thin_indices(cloud.size(), p_remove, seed);
    std::vector<Vec3> pos;
    pos.reserve(kept.size());
    for (std::size_t i : kept) pos.push_back(cloud.position(i));
    return AtomCloud(std::move(pos), cloud.dipole(), cloud.mode(), cloud.label());
}

AtomCloud parse_cloud(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<Vec3> pos;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        double x = 0, y = 0, z = 0;
        if (!(fields >> x >> y >> z)) throw ParseError("expected three numbers 'x y z'", line_no);
        std::string extra;
        if (fields >> extra) throw ParseError("unexpected trailing field '" + extra + "'", line_no);
        pos.emplace_back(x, y, z);
    }
    return AtomCloud(std::move(pos), Vec3::UnitZ(), DipoleMode::Linear, "file");
}

AtomCloud load_cloud(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open cloud file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_cloud(buf.str()).with_label(path.filename().string());
}

void save_cloud(const AtomCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write cloud file " + path.string());
    out << "# " << cloud.size() << " atoms, positions in units of lambda\n";
    char buf[96];
    for (const auto& p : cloud.positions()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace superrad
