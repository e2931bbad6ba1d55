// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "sscurv/curvature.hpp"
#include "sscurv/diagnostics.hpp"
#include "sscurv/io.hpp"
#include "sscurv/oracles.hpp"
#include "sscurv/raster.hpp"
#include "sscurv/words.hpp"

using namespace sscurv;

namespace {

struct RunConfig {
    std::string preset = "koch";
    std::string ifs_path;
    double p = 1.0 / 3;
    double eps_min = 1e-3;
    double eps_max = 1.0;
    double ppd = 12;
    double h_ratio = 1.0 / 50;
    std::size_t cell_budget = 300'000'000;
    std::string lambda = "auto";
    std::string pair = "1,2";
    int k = 2;
    double eps = 0;
    double delta = 1e-4;
    std::string kind = "sigma";
    std::string out, json_out, svg, config;
};

void apply_config_file(RunConfig& c) {
    if (c.config.empty()) return;
    const json j = read_json_file(c.config);
    try {
        if (j.contains("ifs")) {
            const std::string s = j["ifs"].get<std::string>();
            if (s.size() > 5 && s.substr(s.size() - 5) == ".json")
                c.ifs_path = s;
            else
                c.preset = s;
        }
        if (j.contains("p")) c.p = j["p"].get<double>();
        if (j.contains("ladder")) {
            const auto& l = j["ladder"];
            c.eps_min = l.value("eps_min", c.eps_min);
            c.eps_max = l.value("eps_max", c.eps_max);
            c.ppd = l.value("points_per_decade", c.ppd);
        }
        if (j.contains("grid")) {
            c.h_ratio = j["grid"].value("h_ratio", c.h_ratio);
            c.cell_budget = j["grid"].value("cell_budget", c.cell_budget);
        }
        if (j.contains("lambda")) c.lambda = j["lambda"].is_string() ? j["lambda"].get<std::string>() : format_number(j["lambda"].get<double>());
        if (j.contains("output")) {
            const auto& o = j["output"];
            c.out = o.value("csv", c.out);
            c.json_out = o.value("json", c.json_out);
            c.svg = o.value("svg", c.svg);
        }
    } catch (const json::exception& e) {
        throw ConfigError(c.config + ": " + e.what());
    }
}

Ifs load(const RunConfig& c) {
    if (!c.ifs_path.empty()) return load_ifs(c.ifs_path);
    return preset(c.preset, c.p);
}

void check_grid(const RunConfig& c) {
    if (!(c.h_ratio > 0 && c.h_ratio <= 1.0 / 20)) throw ConfigError("h-ratio must lie in (0, 1/20]");
}

std::vector<double> ladder(const RunConfig& c, const Ifs& f) {
    if (!(c.eps_min > 0 && c.eps_min < c.eps_max)) throw ConfigError("empty ladder: need 0 < eps-min < eps-max");
    if (c.eps_max > f.big_R) throw ConfigError("eps-max exceeds R");
    if (!(c.ppd > 0)) throw ConfigError("ppd must be positive");
    return scan_ladder(c.eps_min, c.eps_max, c.ppd, false);
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

EngineOptions engine_opts(const RunConfig& c) {
    EngineOptions e;
    e.node_budget = c.cell_budget;
    return e;
}

int cmd_analyze(const RunConfig& c) {
    check_grid(c);
    const Ifs f = load(c);
    const auto lad = ladder(c, f);
    CurvatureOptions co;
    co.h_ratio = c.h_ratio;
    co.engine = engine_opts(c);
    std::vector<CurvatureRecord> rows;
    for (double e : lad) rows.push_back(total_curvatures(f, e, co));
    std::ostringstream os;
    write_csv(os, rows);
    emit(c.out, os.str());
    return 0;
}

std::pair<int, int> parse_pair(const std::string& s) {
    int i = 0, j = 0;
    char comma = 0;
    std::istringstream is(s);
    if (!(is >> i >> comma >> j) || comma != ',') throw ConfigError("pair must look like i,j");
    return {i, j};
}

int cmd_scan(const RunConfig& c, const std::string& kind) {
    check_grid(c);
    const Ifs f = load(c);
    if (c.eps_max >= f.big_R) throw ConfigError("scan eps-max must be below R");
    const auto lad = ladder(c, f);
    ScanOptions so;
    so.h_ratio = c.h_ratio;
    so.engine = engine_opts(c);
    ScanSeries s;
    try {
        if (kind == "scbc") {
            const auto [i, j] = parse_pair(c.pair);
            s = scbc_scan(f, i, j, lad, so);
        } else {
            double lambda = 0;
            if (c.lambda == "auto")
                lambda = auto_sosc(f).lambda_min;
            else
                try {
                    lambda = std::stod(c.lambda);
                } catch (const std::exception&) {
                    throw ConfigError("lambda must be a number or auto");
                }
            if (!(lambda >= 1)) throw ConfigError("lambda must be at least 1");
            s = cbc_pairwise_scan(f, lambda, lad, so);
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    std::ostringstream csv;
    write_scan_csv(csv, s);
    if (!c.out.empty()) write_text_file(c.out, csv.str());
    emit(c.json_out, verdict_to_json(s).dump(2) + "\n");
    return 0;
}

int cmd_fractal(const RunConfig& c) {
    if (c.k < 0 || c.k > 2) throw ConfigError("k must be 0, 1 or 2");
    check_grid(c);
    const Ifs f = load(c);
    CurvatureOptions co;
    co.h_ratio = c.h_ratio;
    co.engine = engine_opts(c);
    CurvatureEngine eng(f, co);
    FractalEstimate fe = fractal_integral(eng, c.k, c.eps_min, c.delta, c.ppd);
    fe.esslim_band = esslim_probe(eng, c.k, c.eps_min, c.ppd);
    json j = fractal_to_json(fe);
    j["warning"] = !fe.converged || fe.warn_near_critical;
    emit(c.out, j.dump(2) + "\n");
    return 0;
}

int cmd_oracle(const RunConfig& c, const std::string& which, bool third) {
    json j;
    j["oracle"] = which;
    j["eps"] = num(c.eps);
    try {
        if (which.rfind("cantor", 0) == 0) {
            const auto cp = cantor_params(c.p, third);
            j["p"] = num(c.p);
            j["scale"] = num(cp.s);
            j["critical"] = num(cp.critical());
            if (which == "cantor-n")
                j["value"] = cantor_N(cp, c.eps);
            else if (which == "cantor-alpha")
                j["value"] = num(cantor_alpha(cp, c.eps));
            else if (which == "cantor-c0var")
                j["value"] = num(cantor_c0var(cp, c.eps));
            else
                throw ConfigError("unknown oracle " + which);
        } else if (which == "uset-c0var") {
            j["band"] = uset_band(c.eps);
            j["pairs"] = uset_pairs(c.eps);
            j["value"] = num(uset_c0var(c.eps));
        } else if (which == "koch") {
            const KochConstants k = koch_constants();
            j.erase("eps");
            j["arc_measure"] = num(k.arc_measure);
            j["junction_bounds"] = {num(k.junction_lower), num(k.junction_upper)};
            j["d0"] = num(k.d0);
            j["critical_point"] = {num(k.critical_point.x), num(k.critical_point.y)};
            j["critical_values"] = json::array();
            for (int i = 0; i < 4; ++i) j["critical_values"].push_back(num(k.critical_value(i)));
        } else {
            throw ConfigError("unknown oracle " + which);
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    emit(c.out, j.dump(2) + "\n");
    return 0;
}

int cmd_render(const RunConfig& c, bool highlight, bool render_fine) {
    check_grid(c);
    const Ifs f = load(c);
    if (!(c.eps > 0 && c.eps <= f.big_R)) throw ConfigError("render needs 0 < eps <= R");
    const double h = (render_fine ? c.h_ratio : 1.0 / 10) * c.eps;
    const Ball b = bounding_ball(f);
    const Grid g = Grid::covering(Box::around(b.center, b.radius), h, c.eps);
    if (g.cells() > c.cell_budget) throw ResourceError("render grid exceeds the cell budget");
    CloudOptions co;
    co.include_fixed_points = false;
    const BoundaryPolygons bp = boundary_polygons(distance_field(attractor_cloud(f, h / 2, {}, co), g, c.cell_budget), c.eps);
    std::optional<BinaryMask> reg;
    if (highlight) {
        const auto [i, j] = parse_pair(c.pair);
        if (i < 1 || j < 1 || i > static_cast<int>(f.size()) || j > static_cast<int>(f.size())) throw ConfigError("pair index out of range");
        reg = region_from_cylinders(f, {Word{i}, Word{j}}, c.eps, g, RegionMode::intersection);
    }
    std::ostringstream os;
    write_svg(os, bp, reg ? &*reg : nullptr);
    emit(c.svg.empty() ? c.out : c.svg, os.str());
    return 0;
}

int cmd_dump_words(const RunConfig& c) {
    const Ifs f = load(c);
    if (!(c.eps > 0 && c.eps <= f.big_R)) throw ConfigError("dump-words needs 0 < eps <= R");
    WordFamily fam;
    if (c.kind == "sigma")
        fam = sigma(f, c.eps);
    else if (c.kind == "sigma_b")
        fam = sigma_b(f, c.eps);
    else
        throw ConfigError("kind must be sigma or sigma_b");
    emit(c.out, family_to_json(f, fam).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curvature measures of self-similar sets via sparse rasters"};
    app.require_subcommand(1);
    RunConfig c;
    auto common = [&](CLI::App* s) {
        s->add_option("--preset", c.preset, "koch, uset, cantor-square or square");
        s->add_option("--ifs", c.ifs_path, "IFS description (JSON)");
        s->add_option("--p", c.p, "cantor-square parameter");
        s->add_option("--h-ratio", c.h_ratio, "grid spacing as a fraction of eps");
        s->add_option("--out", c.out, "output path (default stdout)");
        s->add_option("--config", c.config, "JSON run configuration, overrides flags");
    };
    auto ladder_opts = [&](CLI::App* s) {
        s->add_option("--eps-min", c.eps_min);
        s->add_option("--eps-max", c.eps_max);
        s->add_option("--ppd", c.ppd, "ladder points per decade");
    };

    auto* analyze = app.add_subcommand("analyze", "curvature records along an eps ladder (CSV)");
    common(analyze);
    ladder_opts(analyze);

    std::string scan_kind;
    auto* scan = app.add_subcommand("scan", "pairwise intersection scan and growth verdict");
    common(scan);
    ladder_opts(scan);
    scan->add_option("kind", scan_kind, "scbc or cbc")->required()->check(CLI::IsMember({"scbc", "cbc"}));
    scan->add_option("--pair", c.pair, "first-level maps i,j (scbc)");
    scan->add_option("--lambda", c.lambda, "number or auto (cbc)");
    scan->add_option("--json", c.json_out, "verdict path (default stdout)");

    auto* fractal = app.add_subcommand("fractal", "average and integral fractal curvature estimates (JSON)");
    common(fractal);
    fractal->add_option("--k", c.k, "0, 1 or 2");
    fractal->add_option("--eps-min", c.eps_min, "lower end of the integral");
    fractal->add_option("--delta", c.delta, "lower end of the average");
    fractal->add_option("--ppd", c.ppd);

    std::string which;
    bool third = false;
    auto* oracle = app.add_subcommand("oracle", "closed-form reference values (JSON)");
    oracle->add_option("which", which, "cantor-n, cantor-alpha, cantor-c0var, uset-c0var or koch")->required();
    oracle->add_option("--eps", c.eps);
    oracle->add_option("--p", c.p);
    oracle->add_flag("--third-scale", third, "cantor: scale 1/3 instead of p");
    oracle->add_option("--out", c.out);

    bool highlight = false;
    auto* render = app.add_subcommand("render", "boundary of F_eps as SVG");
    common(render);
    render->add_option("--eps", c.eps)->required();
    render->add_option("--svg", c.svg, "SVG path");
    render->add_option("--pair", c.pair, "highlight (S_iF)_eps and (S_jF)_eps overlap");
    render->add_flag("--highlight", highlight);

    auto* dump = app.add_subcommand("dump-words", "word family at eps (JSON)");
    common(dump);
    dump->add_option("--eps", c.eps)->required();
    dump->add_option("--kind", c.kind, "sigma or sigma_b");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    try {
        apply_config_file(c);
        if (analyze->parsed()) return cmd_analyze(c);
        if (scan->parsed()) return cmd_scan(c, scan_kind);
        if (fractal->parsed()) return cmd_fractal(c);
        if (oracle->parsed()) return cmd_oracle(c, which, third);
        if (render->parsed()) return cmd_render(c, highlight || render->count("--pair") > 0, render->count("--h-ratio") > 0);
        if (dump->parsed()) return cmd_dump_words(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}
