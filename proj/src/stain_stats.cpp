// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

#include <stainforge/error.hpp>
#include <stainforge/stain_stats.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>

namespace stainforge {

DistributionFamily DistributionFamily::student_t(double dof) {
    if (!(dof > 2.0) || !std::isfinite(dof))
        throw Error(ErrorCode::InvalidArgument, "Student-t dof must be finite and > 2");
    return {Kind::StudentT, dof};
}

std::string_view to_string(DistributionFamily::Kind kind) noexcept {
    switch (kind) {
    case DistributionFamily::Kind::Gaussian: return "gaussian";
    case DistributionFamily::Kind::StudentT: return "t";
    case DistributionFamily::Kind::Uniform: return "uniform";
    case DistributionFamily::Kind::Laplace: return "laplace";
    }
    return "?";
}

DistributionFamily parse_family(std::string_view name, double dof) {
    if (name == "gaussian") return DistributionFamily::gaussian();
    if (name == "t") return DistributionFamily::student_t(dof);
    if (name == "uniform") return DistributionFamily::uniform();
    if (name == "laplace") return DistributionFamily::laplace();
    throw Error(ErrorCode::InvalidArgument, "unknown distribution family '" + std::string(name) + "'");
}

ChannelStats channel_stats(const PlaneImage& planes) {
    const std::size_t n = planes.pixel_count();
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "channel_stats on empty planes");
    ChannelStats out{planes.space, {}, {}};
    for (std::size_t c = 0; c < 3; ++c) {
        const auto& ch = planes.channels[c];
        if (ch.size() != n) throw Error(ErrorCode::InvalidArgument, "plane size mismatch");
        double mean = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double delta = ch[i] - mean;
            mean += delta / static_cast<double>(i + 1);
            m2 += delta * (ch[i] - mean);
        }
        out.avg[c] = mean;
        out.std[c] = std::sqrt(std::max(0.0, m2 / static_cast<double>(n)));
    }
    return out;
}

void StyleAccumulator::add(const ChannelStats& stats) {
    if (stats.space != space_)
        throw Error(ErrorCode::MixedColorSpace,
                    "descriptor measured in " + std::string(to_string(stats.space)) +
                        ", accumulator expects " + std::string(to_string(space_)));
    for (std::size_t c = 0; c < 3; ++c)
        if (!std::isfinite(stats.avg[c]) || !std::isfinite(stats.std[c]) || stats.std[c] < 0.0)
            throw Error(ErrorCode::InvalidArgument, "descriptor has non-finite or negative entries");
    ++count_;
    const double n = static_cast<double>(count_);
    // mean' = mean (n-1)/n + x/n and M2 += delta^2 (n-1)/n; for two samples
    // these are exactly (x+y)/2 and (x-y)^2/2.
    const double w = (n - 1.0) / n;
    for (std::size_t c = 0; c < 3; ++c) {
        const double da = stats.avg[c] - mean_avg_[c];
        mean_avg_[c] = mean_avg_[c] * w + stats.avg[c] / n;
        m2_avg_[c] += da * da * w;
        const double ds = stats.std[c] - mean_std_[c];
        mean_std_[c] = mean_std_[c] * w + stats.std[c] / n;
        m2_std_[c] += ds * ds * w;
    }
}

StyleDistribution StyleAccumulator::finish(DistributionFamily family) const {
    if (count_ < 2)
        throw Error(ErrorCode::InsufficientSamples,
                    "fitting needs at least 2 images, got " + std::to_string(count_));
    if (family.kind == DistributionFamily::Kind::StudentT && !(family.dof > 2.0))
        throw Error(ErrorCode::InvalidArgument, "Student-t dof must be > 2");
    StyleDistribution d;
    d.space = space_;
    d.family = family;
    d.n_samples = count_;
    const double denom = static_cast<double>(count_ - 1);
    for (std::size_t c = 0; c < 3; ++c) {
        d.mean_of_avg[c] = mean_avg_[c];
        d.mean_of_std[c] = mean_std_[c];
        d.var_of_avg[c] = std::max(0.0, m2_avg_[c] / denom);
        d.var_of_std[c] = std::max(0.0, m2_std_[c] / denom);
    }
    return d;
}

StyleDistribution fit_style_distribution(std::span<const ChannelStats> stats,
                                         DistributionFamily family) {
    if (stats.size() < 2)
        throw Error(ErrorCode::InsufficientSamples,
                    "fitting needs at least 2 images, got " + std::to_string(stats.size()));
    StyleAccumulator acc(stats.front().space);
    for (const auto& s : stats) acc.add(s);
    return acc.finish(family);
}

std::vector<std::filesystem::path> subsample_corpus(std::span<const std::filesystem::path> paths,
                                                    std::size_t per_class, std::uint64_t seed) {
    if (paths.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus contains no images");
    if (per_class == 0) throw Error(ErrorCode::InvalidArgument, "per_class must be >= 1");

    // Class name -> positions in `paths`, in input order.
    std::map<std::string, std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < paths.size(); ++i)
        classes[paths[i].parent_path().filename().string()].push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> chosen;
    for (const auto& [name, members] : classes) {
        if (members.size() <= per_class) {
            chosen.insert(chosen.end(), members.begin(), members.end());
            continue;
        }
        // std::sample is a selection sampler: picks stay in input order.
        std::sample(members.begin(), members.end(), std::back_inserter(chosen), per_class, rng);
    }
    std::sort(chosen.begin(), chosen.end());

    std::vector<std::filesystem::path> out;
    out.reserve(chosen.size());
    for (std::size_t i : chosen) out.push_back(paths[i]);
    return out;
}

namespace {

void write_double(std::ostream& os, double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    os.write(buf, res.ptr - buf);
}

void write_csv_field(std::ostream& os, std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        os << field;
        return;
    }
    os << '"';
    for (char ch : field) {
        if (ch == '"') os << '"';
        os << ch;
    }
    os << '"';
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"' && cur.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (quoted) throw Error(ErrorCode::Parse, "unterminated quote on line " + std::to_string(line_no));
    fields.push_back(std::move(cur));
    return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::Parse, "bad number '" + s + "' on line " + std::to_string(line_no));
    return v;
}

constexpr std::string_view kCsvHeader = "path,space,a1,a2,a3,d1,d2,d3";

} // namespace

std::size_t export_style_csv(std::span<const StyleRecord> records, std::ostream& sink) {
    if (records.empty())
        throw Error(ErrorCode::InsufficientSamples, "no style records to export");
    sink << kCsvHeader << '\n';
    for (const auto& rec : records) {
        write_csv_field(sink, rec.path);
        sink << ',' << to_string(rec.stats.space);
        for (double v : rec.stats.avg) {
            sink << ',';
            write_double(sink, v);
        }
        for (double v : rec.stats.std) {
            sink << ',';
            write_double(sink, v);
        }
        sink << '\n';
    }
    sink.flush();
    if (!sink) throw Error(ErrorCode::SinkWrite, "failed writing style CSV");
    return records.size();
}

std::vector<StyleRecord> read_style_csv(std::istream& source) {
    std::string line;
    if (!std::getline(source, line) || line != kCsvHeader)
        throw Error(ErrorCode::Parse, "missing or unexpected style CSV header");
    std::vector<StyleRecord> out;
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line, line_no);
        if (f.size() != 8)
            throw Error(ErrorCode::Parse, "expected 8 fields on line " + std::to_string(line_no));
        StyleRecord rec;
        rec.path = f[0];
        rec.stats.space = parse_color_space(f[1]);
        for (std::size_t c = 0; c < 3; ++c) {
            rec.stats.avg[c] = parse_double(f[2 + c], line_no);
            rec.stats.std[c] = parse_double(f[5 + c], line_no);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace stainforge
