#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "superrad/criteria.hpp"
#include "superrad/lattice.hpp"
#include "superrad/scan.hpp"

namespace superrad {

const char* library_version();

/// Formats with 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

using ParamValue = std::variant<double, long long, std::string, bool>;
using ParamList = std::map<std::string, ParamValue>;

/// Who made an artifact and with which parameters.
struct Provenance {
    std::string subcommand;
    ParamList params;
    std::optional<std::uint64_t> seed;
    std::string version = library_version();

    /// One "# ..." line per entry, newline terminated.
    std::string comment_block() const;
    /// The same content as a JSON object.
    std::string json() const;
};

/// P2 grayscale, maxval 255: superradiant cells 255, others 128; the first image row is
/// the smallest y. Empty maps are rejected with InvalidArgument.
std::string pgm_text(const RegionMap& map, const Provenance* prov = nullptr);
void emit_pgm(const RegionMap& map, const std::filesystem::path& path, const Provenance& prov);

/// Header "x,y,value,mask", one row per cell in row-major order, after comment lines that
/// include the axis names.
std::string csv_text(const RegionMap& map, const Provenance* prov = nullptr);
void emit_csv(const RegionMap& map, const std::filesystem::path& path, const Provenance& prov);

/// Inverse of csv_text. Throws ParseError with the offending line number.
RegionMap parse_csv(const std::string& text);
RegionMap read_csv(const std::filesystem::path& path);

/// {"N", "d_params", "alpha", "k_i", "k_f", "gamma0", "gdot0", "gddot0", "superradiant",
///  "provenance"}; absent optionals are null.
std::string slope_json(const SlopeResult& r, const ParamList& geometry, const Provenance& prov);

/// {"dim", "d", "kind", "C", "D", "rms", "n1_threshold", ...}.
std::string threshold_json(const ThresholdResult& r, const Provenance& prov);
std::string fit_json(const FitResult& f, const Provenance& prov);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace superrad
