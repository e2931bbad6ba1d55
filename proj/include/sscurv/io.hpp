// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "curvature.hpp"
#include "diagnostics.hpp"
#include "errors.hpp"
#include "ifs.hpp"
#include "words.hpp"

namespace sscurv {

using json = nlohmann::ordered_json;

// 12 significant digits; non-finite values become null.
inline json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_number(v));
}

inline Ifs ifs_from_json(const json& j) {
    try {
        Ifs f;
        f.name = j.value("name", std::string("custom"));
        f.big_R = j.at("R").get<double>();
        for (auto& p : j.at("open_set")) f.open_set.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        for (auto& m : j.at("maps")) {
            Similarity s;
            s.ratio = m.at("ratio").get<double>();
            s.rotation = deg(m.value("rotation_deg", 0.0));
            s.reflect = m.value("reflect", false);
            const auto& t = m.at("translation");
            s.translation = {t.at(0).get<double>(), t.at(1).get<double>()};
            f.maps.push_back(s);
        }
        validate(f);
        return f;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad IFS description: ") + e.what());
    }
}

// Full precision, so a description survives the round trip exactly.
inline json ifs_to_json(const Ifs& f) {
    json j;
    j["name"] = f.name;
    j["R"] = json(f.big_R);
    j["open_set"] = json::array();
    for (auto p : f.open_set) j["open_set"].push_back({json(p.x), json(p.y)});
    j["maps"] = json::array();
    for (auto& m : f.maps)
        j["maps"].push_back({{"ratio", json(m.ratio)},
                             {"rotation_deg", json(m.rotation * 180 / std::numbers::pi)},
                             {"reflect", m.reflect},
                             {"translation", {json(m.translation.x), json(m.translation.y)}}});
    return j;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline Ifs load_ifs(const std::string& path) { return ifs_from_json(read_json_file(path)); }

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

inline json family_to_json(const Ifs& f, const WordFamily& fam) {
    json j;
    j["kind"] = fam.kind == FamilyKind::sigma ? "sigma" : "sigma_b";
    j["eps"] = num(fam.epsilon);
    if (fam.kind == FamilyKind::sigma_b) j["slack"] = num(fam.slack);
    j["count"] = fam.words.size();
    j["words"] = json::array();
    for (auto& w : fam.words) j["words"].push_back({{"word", w}, {"ratio", num(word_ratio(f, w))}});
    return j;
}

inline json verdict_to_json(const ScanSeries& s) {
    const Verdict& v = s.verdict;
    json j;
    j["kind"] = s.kind == ScanKind::scbc_pair ? "scbc" : "cbc";
    if (s.kind == ScanKind::scbc_pair)
        j["pair"] = {s.i, s.j};
    else
        j["lambda"] = num(s.lambda);
    j["verdict"] = to_string(v.kind);
    if (v.kind == VerdictKind::unbounded) j["exponent"] = num(v.exponent);
    if (v.kind == VerdictKind::bounded) j["bound"] = num(v.bound_estimate);
    j["fit"] = {{"slope", num(v.slope)}, {"r2", num(v.r2)}, {"points", v.used}, {"decades", num(v.decades)}};
    j["thresholds"] = {{"slope", num(v.thresholds.slope)},
                       {"r2", num(v.thresholds.r2)},
                       {"min_points", v.thresholds.min_points},
                       {"min_decades", num(v.thresholds.min_decades)},
                       {"value_floor", num(v.thresholds.value_floor)}};
    j["heuristic"] = true;
    return j;
}

inline json fractal_to_json(const FractalEstimate& fe) {
    json j;
    j["k"] = fe.k;
    j["D"] = num(fe.D);
    j["eta"] = num(fe.eta);
    j["value_avg"] = num(fe.value_avg);
    j["value_avg_extrapolated"] = num(fe.value_avg_extrapolated);
    j["value_integral"] = num(fe.value_integral);
    j["delta"] = num(fe.delta);
    j["eps_min"] = num(fe.eps_min);
    j["tail_bound"] = num(fe.tail_bound);
    j["converged"] = fe.converged;
    j["warn_near_critical"] = fe.warn_near_critical;
    if (fe.esslim_band)
        j["esslim_band"] = {num(fe.esslim_band->first), num(fe.esslim_band->second)};
    else
        j["esslim_band"] = nullptr;
    return j;
}

}  // namespace sscurv
