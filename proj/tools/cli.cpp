#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "superrad/coupling.hpp"
#include "superrad/criteria.hpp"
#include "superrad/error.hpp"
#include "superrad/geometry.hpp"
#include "superrad/io.hpp"
#include "superrad/lattice.hpp"
#include "superrad/oracle.hpp"
#include "superrad/parallel.hpp"
#include "superrad/scan.hpp"

namespace superrad::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Family parse_family(const std::string& s) {
    if (s == "line") return Family::Line;
    if (s == "double_line" || s == "double-line") return Family::DoubleLine;
    if (s == "square") return Family::Square;
    if (s == "cubic") return Family::Cubic;
    throw UsageError("unknown family '" + s + "' (line, double_line, square, cubic)");
}

RateKind parse_kind(const std::string& s) {
    if (s == "total") return RateKind::Total;
    if (s == "directional") return RateKind::Directional;
    throw UsageError("unknown kind '" + s + "' (total, directional)");
}

Vec3 parse_vec(const std::string& s) {
    std::stringstream in(s);
    std::string field;
    std::vector<double> v;
    while (std::getline(in, field, ',')) {
        try {
            v.push_back(std::stod(field));
        } catch (const std::logic_error&) {
            throw UsageError("bad vector component '" + field + "'");
        }
    }
    if (v.size() != 3) throw UsageError("vectors are given as x,y,z");
    return {v[0], v[1], v[2]};
}

Band parse_band(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw UsageError("bands are given as lo,hi");
    try {
        Band b{std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
        if (!(b.hi >= b.lo)) throw UsageError("band needs lo <= hi");
        return b;
    } catch (const std::logic_error&) {
        throw UsageError("bad band '" + s + "'");
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::stringstream in(s);
    std::string field;
    std::vector<double> v;
    while (std::getline(in, field, ',')) {
        try {
            v.push_back(std::stod(field));
        } catch (const std::logic_error&) {
            throw UsageError("bad list entry '" + field + "'");
        }
    }
    if (v.empty()) throw UsageError("empty list");
    return v;
}

// Options shared by commands that build a cloud from a family or a file.
struct GeometryOpts {
    std::string family = "line";
    std::size_t n = 10;
    double d = 0.5;
    std::string cloud_path;

    void add(CLI::App* app) {
        app->add_option("--family", family, "line | double_line | square | cubic")->capture_default_str();
        app->add_option("--n", n, "atoms (line families) or sites per axis (square, cubic)")
            ->capture_default_str();
        app->add_option("--d", d, "lattice spacing in wavelengths")->capture_default_str();
        app->add_option("--cloud", cloud_path, "read positions from a text file instead");
    }
    AtomCloud build() const {
        if (!cloud_path.empty()) return load_cloud(cloud_path);
        return build_family(parse_family(family), n, d);
    }
    ParamList params() const {
        if (!cloud_path.empty()) return {{"cloud", cloud_path}};
        return {{"family", family}, {"n", static_cast<long long>(n)}, {"d", d}};
    }
};

struct EmissionOpts {
    std::string kind = "total";
    std::string phi = "0";
    std::string theta = "0.5pi";

    void add(CLI::App* app) {
        app->add_option("--kind", kind, "total | directional")->capture_default_str();
        app->add_option("--phi", phi, "emission azimuth (radians, or e.g. 0.4pi)")->capture_default_str();
        app->add_option("--theta", theta, "emission polar angle")->capture_default_str();
    }
    RateKind rate_kind() const { return parse_kind(kind); }
    std::optional<Vec3> k_f() const {
        if (rate_kind() == RateKind::Total) return std::nullopt;
        return emission_vector(parse_angle(theta), parse_angle(phi));
    }
};

ParamList option_params(const CLI::App* app) {
    ParamList p;
    for (const CLI::Option* opt : app->get_options()) {
        const std::string name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames()[0];
        if (name == "help") continue;
        if (opt->count() > 0) {
            std::string joined;
            for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
            p[name] = joined;
        } else if (!opt->get_default_str().empty()) {
            p[name] = opt->get_default_str();
        }
    }
    return p;
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        out << text;
        if (!text.empty() && text.back() != '\n') out << '\n';
    } else {
        write_text(path, text);
    }
}

}  // namespace

double parse_angle(const std::string& text) {
    std::string s = text;
    double scale = 1.0;
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        scale = kPi;
        s.erase(s.size() - 2);
        if (s.empty() || s == "+") s = "1";
        if (s == "-") s = "-1";
        if (s.back() == '*') s.pop_back();
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw UsageError("bad angle '" + text + "'");
        return v * scale;
    } catch (const std::logic_error&) {
        throw UsageError("bad angle '" + text + "'");
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Early-time superradiance criteria for atomic arrays", "superrad"};
    app.set_version_flag("--version", std::string(library_version()));
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0: SUPERRAD_THREADS or all cores)")
        ->capture_default_str();
    std::string out_path;
    std::uint64_t seed = 1;

    // couple
    auto* couple = app.add_subcommand("couple", "write the Gamma/Omega coupling table as CSV");
    GeometryOpts couple_geo;
    couple_geo.add(couple);
    couple->add_option("--out", out_path, "output CSV (default stdout)");

    // slope
    auto* slope = app.add_subcommand("slope", "early-time slope of the photon rate (JSON)");
    GeometryOpts slope_geo;
    EmissionOpts slope_em;
    std::string alpha_text = "pi";
    std::string ki_text;
    std::string reading = "detection";
    bool second = false;
    slope_geo.add(slope);
    slope_em.add(slope);
    slope->add_option("--alpha", alpha_text, "inversion angle, pi = fully inverted")->capture_default_str();
    slope->add_option("--ki", ki_text, "drive direction x,y,z (default: no drive phase)");
    slope->add_option("--reading", reading, "directional partial reading: detection | as_printed")
        ->capture_default_str();
    slope->add_flag("--second", second, "also compute the second derivative (fully inverted only)");
    slope->add_option("--out", out_path, "output JSON (default stdout)");

    // map
    auto* map = app.add_subcommand("map", "region map over (N, d) or (phi, d)");
    std::string map_family = "line";
    EmissionOpts map_em;
    std::string axes = "n-d";
    std::size_t n_min = 2, n_max = 100, map_n = 40;
    double d_min = 0.05, d_max = 1.5, d_step = 0.005;
    std::size_t phi_steps = 200;
    std::string csv_path, pgm_path;
    map->add_option("--family", map_family, "line | double_line | square | cubic")->capture_default_str();
    map_em.add(map);
    map->add_option("--axes", axes, "n-d | phi-d")->capture_default_str();
    map->add_option("--n-min", n_min)->capture_default_str();
    map->add_option("--n-max", n_max)->capture_default_str();
    map->add_option("--n", map_n, "size for phi-d maps")->capture_default_str();
    map->add_option("--d-min", d_min)->capture_default_str();
    map->add_option("--d-max", d_max)->capture_default_str();
    map->add_option("--d-step", d_step)->capture_default_str();
    map->add_option("--phi-steps", phi_steps, "samples of phi over [0, 2pi)")->capture_default_str();
    map->add_option("--csv", csv_path, "CSV output (default stdout when no --pgm)");
    map->add_option("--pgm", pgm_path, "PGM image output");

    // threshold
    auto* thr = app.add_subcommand("threshold", "smallest array size with a positive slope (JSON)");
    int dim = 3;
    double lat_d = 1.0;
    std::size_t n1_max = 0;
    EmissionOpts thr_em;
    thr->add_option("--dim", dim, "1, 2 or 3")->capture_default_str();
    thr->add_option("--d", lat_d, "spacing in wavelengths")->capture_default_str();
    thr->add_option("--n1-max", n1_max, "search bound (default 20000 / 2000 / 200 by dim)");
    thr_em.add(thr);
    thr->add_option("--out", out_path, "output JSON (default stdout)");

    // fit
    auto* fit = app.add_subcommand("fit", "asymptotic fit of the scaled total slope (JSON)");
    std::size_t n1_lo = 0, n1_hi = 0;
    fit->add_option("--dim", dim, "2 or 3")->capture_default_str();
    fit->add_option("--d", lat_d, "spacing in wavelengths")->capture_default_str();
    fit->add_option("--n1-lo", n1_lo, "fit window start (default 50 / 6)");
    fit->add_option("--n1-hi", n1_hi, "fit window end (default 400 / 60)");
    fit->add_option("--out", out_path, "output JSON (default stdout)");

    // thin
    auto* thin = app.add_subcommand("thin", "remove atoms at random and write the positions");
    GeometryOpts thin_geo;
    double p_remove = 0.2;
    thin_geo.add(thin);
    thin->add_option("--p", p_remove, "removal probability")->capture_default_str();
    thin->add_option("--seed", seed)->capture_default_str();
    thin->add_option("--out", out_path, "output positions (default stdout)");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "compare slope formulas with the master equation (JSON)");
    std::size_t oracle_n = 3;
    double extent = 0.9, min_sep = 0.1, fd_h = 0.02, tol = 1e-4, t_end = 0.0, dt = 1e-3;
    int substeps = 5;
    std::string cloud_path, trajectory_path;
    EmissionOpts oracle_em;
    std::string oracle_alpha = "pi";
    std::string oracle_ki;
    oracle->add_option("--n", oracle_n, "atoms in a random cloud (<= 8)")->capture_default_str();
    oracle->add_option("--seed", seed)->capture_default_str();
    oracle->add_option("--extent", extent, "cloud box edge in wavelengths")->capture_default_str();
    oracle->add_option("--min-sep", min_sep, "minimum separation")->capture_default_str();
    oracle->add_option("--cloud", cloud_path, "read positions from a file instead");
    oracle->add_option("--alpha", oracle_alpha)->capture_default_str();
    oracle->add_option("--ki", oracle_ki, "drive direction x,y,z");
    oracle_em.add(oracle);
    oracle->add_option("--fd-step", fd_h, "coarsest finite-difference step")->capture_default_str();
    oracle->add_option("--substeps", substeps, "RK4 steps per h/4")->capture_default_str();
    oracle->add_option("--tol", tol, "exit 1 above this relative difference")->capture_default_str();
    oracle->add_option("--trajectory", trajectory_path, "also write t,gamma_total,gamma_dir CSV");
    oracle->add_option("--t-end", t_end, "trajectory length")->capture_default_str();
    oracle->add_option("--dt", dt, "trajectory step")->capture_default_str();
    oracle->add_option("--out", out_path, "output JSON (default stdout)");

    // limit1d
    auto* lim = app.add_subcommand("limit1d", "infinite-line scaled slope (JSON)");
    long nu_max = 100000;
    EmissionOpts lim_em;
    lim->add_option("--d", lat_d, "spacing in wavelengths")->capture_default_str();
    lim->add_option("--nu-max", nu_max, "symmetric truncation")->capture_default_str();
    lim_em.add(lim);
    lim->add_option("--out", out_path, "output JSON (default stdout)");

    // removal
    auto* rem = app.add_subcommand("removal", "random atom removal survival study (JSON)");
    std::string rem_family = "line";
    std::size_t rem_n = 100, trials = 100;
    EmissionOpts rem_em;
    std::string band_text = "0.5,0.6";
    std::string p_text = "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7";
    double band_step = 0.005;
    rem->add_option("--family", rem_family)->capture_default_str();
    rem->add_option("--n", rem_n)->capture_default_str();
    rem_em.add(rem);
    rem->add_option("--band", band_text, "spacing band lo,hi")->capture_default_str();
    rem->add_option("--d-step", band_step)->capture_default_str();
    rem->add_option("--p", p_text, "comma-separated removal probabilities")->capture_default_str();
    rem->add_option("--trials", trials)->capture_default_str();
    rem->add_option("--seed", seed)->capture_default_str();
    rem->add_option("--out", out_path, "output JSON (default stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "partial-inversion sweep over excited fraction and d");
    std::string sw_family = "line";
    std::size_t sw_n = 100;
    EmissionOpts sw_em;
    std::string fractions_text = "1,0.95,0.9,0.85,0.8,0.75,0.7";
    std::string sw_ki = "0,0,1";
    std::string sw_band;
    sweep->add_option("--family", sw_family)->capture_default_str();
    sweep->add_option("--n", sw_n)->capture_default_str();
    sw_em.add(sweep);
    sweep->add_option("--fractions", fractions_text, "excited fractions")->capture_default_str();
    sweep->add_option("--ki", sw_ki, "drive direction x,y,z")->capture_default_str();
    sweep->add_option("--d-min", d_min)->capture_default_str();
    sweep->add_option("--d-max", d_max)->capture_default_str();
    sweep->add_option("--d-step", d_step)->capture_default_str();
    sweep->add_option("--band", sw_band, "also locate the vanishing fraction for this band lo,hi");
    sweep->add_option("--csv", csv_path);
    sweep->add_option("--pgm", pgm_path);
    sweep->add_option("--out", out_path, "summary JSON (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const unsigned nthreads = resolve_threads(threads);
    try {
        CLI::App* sub = app.get_subcommands().front();
        Provenance prov;
        prov.subcommand = sub->get_name();
        prov.params = option_params(sub);
        prov.params["threads"] = static_cast<long long>(nthreads);

        if (sub == couple) {
            const AtomCloud cloud = couple_geo.build();
            const CouplingSet c = build_coupling(cloud, nthreads);
            if (out_path.empty() || out_path == "-") {
                write_coupling_csv(c, out, prov.comment_block());
            } else {
                write_coupling_csv(c, out_path, prov.comment_block());
            }
            return 0;
        }

        if (sub == slope) {
            const AtomCloud cloud = slope_geo.build();
            const CouplingSet c = build_coupling(cloud, nthreads);
            DriveSpec drive{parse_angle(alpha_text), Vec3::Zero()};
            if (!ki_text.empty()) drive.k_i = parse_vec(ki_text);
            const auto k_f = slope_em.k_f();
            const bool inverted = std::abs(drive.alpha - kPi) < 1e-15 && drive.k_i.isZero(0.0);
            SlopeResult r;
            if (second) {
                if (!inverted) throw UsageError("--second needs a fully inverted state");
                r = k_f ? gddot_directional_inverted(c, cloud, *k_f) : gddot_total_inverted(c);
            } else if (inverted) {
                r = k_f ? gdot_directional_inverted(c, cloud, *k_f) : gdot_total_inverted(c);
            } else {
                PartialOptions opts;
                if (reading == "as_printed") {
                    opts.reading = DirectionalPhase::AsPrinted;
                } else if (reading != "detection") {
                    throw UsageError("--reading must be detection or as_printed");
                }
                r = k_f ? gdot_directional_partial(c, cloud, drive, *k_f, opts)
                        : gdot_total_partial(c, cloud, drive, opts);
            }
            emit(out, out_path, slope_json(r, slope_geo.params(), prov));
            return 0;
        }

        if (sub == map) {
            const Family fam = parse_family(map_family);
            const Axis ds = Axis::range("d", d_min, d_max, d_step);
            RegionMap m;
            if (axes == "n-d") {
                const RateKind kind = map_em.rate_kind();
                m = map_n_d(fam, kind, parse_angle(map_em.phi), Axis::integers("N", n_min, n_max), ds,
                            nthreads);
            } else if (axes == "phi-d") {
                if (phi_steps == 0) throw UsageError("--phi-steps must be positive");
                Axis phis = Axis::range("phi", 0.0, 2.0 * kPi * (1.0 - 0.5 / static_cast<double>(phi_steps)),
                                        2.0 * kPi / static_cast<double>(phi_steps));
                m = map_phi_d(fam, map_n, phis, ds, nthreads);
            } else {
                throw UsageError("--axes must be n-d or phi-d");
            }
            if (!pgm_path.empty()) emit_pgm(m, pgm_path, prov);
            if (!csv_path.empty() || pgm_path.empty()) emit(out, csv_path, csv_text(m, &prov));
            return 0;
        }

        if (sub == thr) {
            if (n1_max == 0) n1_max = dim == 1 ? 20000 : dim == 2 ? 2000 : 200;
            const RateKind kind = thr_em.rate_kind();
            const auto r = threshold_n1(dim, lat_d, kind, thr_em.k_f(), n1_max, nthreads);
            emit(out, out_path, threshold_json(r, prov));
            return 0;
        }

        if (sub == fit) {
            const auto f = fit_asymptote(dim, lat_d, n1_lo, n1_hi, nthreads);
            emit(out, out_path, fit_json(f, prov));
            return 0;
        }

        if (sub == thin) {
            const AtomCloud cloud = thin_geo.build();
            const AtomCloud kept = thin_cloud(cloud, p_remove, seed);
            prov.seed = seed;
            if (out_path.empty() || out_path == "-") {
                std::string text = prov.comment_block();
                for (const Vec3& r : kept.positions()) {
                    text += format_double(r.x()) + " " + format_double(r.y()) + " " +
                            format_double(r.z()) + "\n";
                }
                out << text;
            } else {
                save_cloud(kept, out_path);
            }
            return 0;
        }

        if (sub == oracle) {
            prov.seed = seed;
            const AtomCloud cloud = cloud_path.empty() ? random_cloud(oracle_n, extent, min_sep, seed)
                                                       : load_cloud(cloud_path);
            DriveSpec drive{parse_angle(oracle_alpha), Vec3::Zero()};
            if (!oracle_ki.empty()) drive.k_i = parse_vec(oracle_ki);
            const auto k_f = oracle_em.k_f();
            OracleOptions oo;
            oo.h = fd_h;
            oo.substeps = substeps;
            const SlopeCheck chk = slope_check(cloud, drive, k_f, oo);
            json j{{"N", cloud.size()},
                   {"alpha", drive.alpha},
                   {"kind", oracle_em.kind},
                   {"formula_value", chk.formula_value},
                   {"oracle_value", chk.oracle_value},
                   {"exact_moment", chk.exact_moment},
                   {"rel_diff", chk.rel_diff},
                   {"tolerance", tol},
                   {"pass", chk.rel_diff <= tol}};
            if (chk.as_printed_value) {
                j["as_printed_value"] = *chk.as_printed_value;
                j["as_printed_rel_diff"] = *chk.as_printed_rel_diff;
            }
            j["provenance"] = json::parse(prov.json());
            if (!trajectory_path.empty()) {
                EvolveOptions eo;
                eo.dt = dt;
                eo.k_f = k_f;
                const CouplingSet c = build_coupling(cloud);
                const auto tr = evolve(initial_state(cloud, drive), c, cloud,
                                       t_end > 0.0 ? t_end : 5.0, eo);
                write_trajectory_csv(tr, trajectory_path, prov.comment_block());
            }
            emit(out, out_path, j.dump(2));
            return chk.rel_diff <= tol ? 0 : 1;
        }

        if (sub == lim) {
            const auto r = limit_1d(lat_d, lim_em.rate_kind(), lim_em.k_f(), nu_max);
            json j{{"d", lat_d},
                   {"kind", lim_em.kind},
                   {"value", r.value},
                   {"nu_max", r.nu_max},
                   {"conditionally_convergent", r.conditionally_convergent}};
            j["tail_bound"] = r.tail_bound ? json(*r.tail_bound) : json(nullptr);
            j["provenance"] = json::parse(prov.json());
            emit(out, out_path, j.dump(2));
            return 0;
        }

        if (sub == rem) {
            prov.seed = seed;
            const Band band = parse_band(band_text);
            const auto ps = parse_list(p_text);
            const auto k_f_kind = rem_em.rate_kind();
            const auto st = removal_study(parse_family(rem_family), rem_n, k_f_kind,
                                          parse_angle(rem_em.phi), band, band_step, ps, trials, seed,
                                          nthreads);
            json j{{"family", rem_family},
                   {"n", rem_n},
                   {"band", {band.lo, band.hi}},
                   {"p", st.p_values},
                   {"survival", st.survival},
                   {"trials", st.trials},
                   {"seed", st.seed}};
            j["kept_at_half"] = st.kept_at_half ? json(*st.kept_at_half) : json(nullptr);
            j["provenance"] = json::parse(prov.json());
            emit(out, out_path, j.dump(2));
            return 0;
        }

        if (sub == sweep) {
            const Family fam = parse_family(sw_family);
            const Vec3 k_i = parse_vec(sw_ki);
            std::vector<double> alphas;
            for (double f : parse_list(fractions_text)) {
                if (!(f >= 0.0 && f <= 1.0)) throw UsageError("fractions must lie in [0, 1]");
                alphas.push_back(2.0 * std::asin(std::sqrt(f)));
            }
            const RateKind kind = sw_em.rate_kind();
            const double phi = parse_angle(sw_em.phi);
            const auto result = partial_sweep(fam, sw_n, kind, phi, Axis::range("d", d_min, d_max, d_step),
                                              alphas, k_i, nthreads);
            if (!pgm_path.empty()) emit_pgm(result.map, pgm_path, prov);
            if (!csv_path.empty()) emit_csv(result.map, csv_path, prov);
            json j{{"family", sw_family},
                   {"n", sw_n},
                   {"excited_fraction", result.map.x.samples},
                   {"area", result.areas},
                   {"area_monotone", result.area_monotone}};
            if (!sw_band.empty()) {
                const auto t = partial_threshold(fam, sw_n, kind, phi, parse_band(sw_band), d_step, k_i,
                                                 0.05, 1e-3, nthreads);
                j["threshold"] = {
                    {"coarse_present", t.coarse_present ? json(*t.coarse_present) : json(nullptr)},
                    {"coarse_absent", t.coarse_absent ? json(*t.coarse_absent) : json(nullptr)},
                    {"refined", t.refined ? json(*t.refined) : json(nullptr)}};
            }
            j["provenance"] = json::parse(prov.json());
            emit(out, out_path, j.dump(2));
            return 0;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        // invalid arguments, domain errors, size caps and unwritable outputs
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace superrad::cli
