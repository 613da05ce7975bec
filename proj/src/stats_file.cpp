// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/error.hpp>
#include <stainforge/stats_file.hpp>

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace stainforge {

namespace {

constexpr std::string_view kLabVariant = "cie-d65";
constexpr std::string_view kHedMatrix = "ruifrok-johnston";

constexpr std::string_view kPreamble =
    "# stainforge statistics file\n"
    "# lab_variant cie-d65: floating-point CIE L*a*b*, D65 white, sRGB transfer curve.\n"
    "#   Alternative not used here: the 8-bit rescaled LAB of some imaging libraries\n"
    "#   (L*255/100, a+128, b+128).\n"
    "# hed_matrix ruifrok-johnston: row-normalized H/E/DAB optical-density vectors.\n"
    "# avg/std blocks: mean = M, std = square root of the diagonal covariance.\n";

std::string fmt9(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

std::string triple(const Vec3& v) {
    return "[" + fmt9(v[0]) + ", " + fmt9(v[1]) + ", " + fmt9(v[2]) + "]";
}

Vec3 sqrt3(const Vec3& v) { return {std::sqrt(v[0]), std::sqrt(v[1]), std::sqrt(v[2])}; }

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::Parse, msg); }

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail("unknown key '" + key + "' in " + where);
    }
}

const YAML::Node require(const YAML::Node& map, const std::string& key, const std::string& where) {
    const YAML::Node n = map[key];
    if (!n) fail("missing key '" + key + "' in " + where);
    return n;
}

Vec3 read_triple(const YAML::Node& n, const std::string& where) {
    if (!n.IsSequence() || n.size() != 3) fail(where + " must be a list of 3 numbers");
    Vec3 v{};
    for (std::size_t i = 0; i < 3; ++i) {
        v[i] = n[i].as<double>();
        if (!std::isfinite(v[i])) fail(where + " contains a non-finite value");
    }
    return v;
}

struct MomentBlock {
    Vec3 mean;
    Vec3 spread;
};

MomentBlock read_block(const YAML::Node& n, const std::string& where) {
    if (!n.IsMap()) fail(where + " must be a mapping");
    check_keys(n, {"mean", "std"}, where);
    MomentBlock b{read_triple(require(n, "mean", where), where + ".mean"),
                  read_triple(require(n, "std", where), where + ".std")};
    for (double s : b.spread)
        if (s < 0.0) fail(where + ".std must be >= 0");
    return b;
}

StyleDistribution read_section(const YAML::Node& doc) {
    if (!doc.IsMap()) fail("statistics section must be a mapping");
    check_keys(doc,
               {"version", "color_space", "family", "dof", "n_samples", "avg", "std", "lab_variant",
                "hed_matrix"},
               "statistics section");

    const int version = require(doc, "version", "section").as<int>();
    if (version != kStatsFileVersion)
        throw Error(ErrorCode::VersionMismatch,
                    "statistics file version " + std::to_string(version) + ", expected " +
                        std::to_string(kStatsFileVersion));

    StyleDistribution d;
    const auto space_name = require(doc, "color_space", "section").as<std::string>();
    try {
        d.space = parse_color_space(space_name);
    } catch (const Error&) {
        fail("unknown color_space '" + space_name + "'");
    }
    const std::string where = std::string(to_string(d.space)) + " section";

    const auto family_name = require(doc, "family", where).as<std::string>();
    if (doc["dof"] && family_name != "t") fail("dof is only valid for family t in " + where);
    const double dof = doc["dof"] ? doc["dof"].as<double>() : DistributionFamily::kDefaultDof;
    try {
        d.family = parse_family(family_name, dof);
    } catch (const Error& e) {
        fail(std::string(e.what()) + " in " + where);
    }

    const long long n = require(doc, "n_samples", where).as<long long>();
    if (n < 0) fail("n_samples must be >= 0 in " + where);
    d.n_samples = static_cast<std::uint64_t>(n);

    const MomentBlock avg = read_block(require(doc, "avg", where), where + " avg");
    const MomentBlock std = read_block(require(doc, "std", where), where + " std");
    d.mean_of_avg = avg.mean;
    d.mean_of_std = std.mean;
    for (std::size_t c = 0; c < 3; ++c) {
        d.var_of_avg[c] = avg.spread[c] * avg.spread[c];
        d.var_of_std[c] = std.spread[c] * std.spread[c];
        if (d.n_samples < 2 && (d.var_of_avg[c] > 0.0 || d.var_of_std[c] > 0.0))
            fail("nonzero spread needs n_samples >= 2 in " + where);
    }

    if (require(doc, "lab_variant", where).as<std::string>() != kLabVariant)
        fail("unsupported lab_variant in " + where);
    if (require(doc, "hed_matrix", where).as<std::string>() != kHedMatrix)
        fail("unsupported hed_matrix in " + where);
    return d;
}

} // namespace

std::string serialize_stats(const StatsSet& stats) {
    std::ostringstream os;
    os << kPreamble;
    bool first = true;
    for (ColorSpace s : kAllColorSpaces) {
        if (!stats.has(s)) continue;
        const StyleDistribution& d = stats.at(s);
        if (!first) os << "---\n";
        first = false;
        os << "version: " << kStatsFileVersion << '\n'
           << "color_space: " << to_string(s) << '\n'
           << "family: " << to_string(d.family.kind) << '\n';
        if (d.family.kind == DistributionFamily::Kind::StudentT) os << "dof: " << fmt9(d.family.dof) << '\n';
        os << "n_samples: " << d.n_samples << '\n'
           << "avg: { mean: " << triple(d.mean_of_avg) << ", std: " << triple(sqrt3(d.var_of_avg)) << " }\n"
           << "std: { mean: " << triple(d.mean_of_std) << ", std: " << triple(sqrt3(d.var_of_std)) << " }\n"
           << "lab_variant: " << kLabVariant << '\n'
           << "hed_matrix: " << kHedMatrix << '\n';
    }
    return os.str();
}

StatsSet parse_stats(std::string_view text) {
    StatsSet out;
    try {
        const std::vector<YAML::Node> docs = YAML::LoadAll(std::string(text));
        for (const auto& doc : docs) {
            if (doc.IsNull()) continue;
            StyleDistribution d = read_section(doc);
            if (out.has(d.space))
                fail("duplicate section for color space " + std::string(to_string(d.space)));
            out.put(std::move(d));
        }
    } catch (const YAML::Exception& e) {
        fail(std::string("malformed statistics file: ") + e.what());
    }
    if (out.empty()) fail("statistics file contains no sections");
    return out;
}

StatsSet load_stats(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open statistics file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_stats(buf.str());
}

void save_stats(const StatsSet& stats, const std::filesystem::path& path) {
    const std::string text = serialize_stats(stats);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot create statistics file " + path.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "failed writing statistics file " + path.string());
}

} // namespace stainforge
