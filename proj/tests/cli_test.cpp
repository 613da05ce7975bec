// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the stainforge Project.

// End-to-end checks of the stainforge executable.

#include "support.hpp"

#include <stainforge/image_io.hpp>
#include <stainforge/stain_stats.hpp>
#include <stainforge/stats_file.hpp>

#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

using namespace stainforge;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
    std::map<std::string, std::string> kv;   // key=value lines after the --- marker
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result run(const std::vector<std::string>& args, const std::string& env = "") {
    static int counter = 0;
    const fs::path err_file = fs::temp_directory_path() / ("stainforge-cli-err-" + std::to_string(::getpid()) + "-" +
                                                           std::to_string(counter++));
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += quote(STAINFORGE_CLI);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " 2>" + quote(err_file.string());
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_file);
    fs::remove(err_file);
    const auto marker = r.out.find("---\n");
    if (marker != std::string::npos) {
        std::istringstream lines(r.out.substr(marker + 4));
        std::string line;
        while (std::getline(lines, line)) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) r.kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    return r;
}

void write_corpus(const fs::path& root, int classes, int per_class, std::uint32_t size = 12) {
    for (int c = 0; c < classes; ++c) {
        fs::create_directories(root / ("class" + std::to_string(c)));
        for (int i = 0; i < per_class; ++i)
            save_png(sftest::he_image(size, size, 1000 * c + i),
                     root / ("class" + std::to_string(c)) / ("img" + std::to_string(i) + ".png"));
    }
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[e.path().lexically_relative(root).generic_string()] = slurp(e.path());
    return out;
}

} // namespace

TEST_CASE("usage errors and help") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"apply", "--help"}).code == 0);
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"fit", "--input-dir", "x"}).code == 1);   // --out missing
    CHECK(run({"fit", "--input-dir", "x", "--out", "y", "--bogus"}).code == 1);
    Result v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("fit: two constant images give the analytic fit") {
    sftest::TempDir dir("cli");
    fs::create_directories(dir / "in");
    const RgbImage a = sftest::constant_image(5, 4, 210, 140, 190);
    const RgbImage b = sftest::constant_image(3, 3, 120, 70, 150);
    save_png(a, dir / "in" / "a.png");
    save_png(b, dir / "in" / "b.png");
    Result r = run({"fit", "--input-dir", (dir / "in").string(), "--out", (dir / "s.yaml").string()});
    REQUIRE(r.code == 0);
    CHECK(r.kv["images"] == "2");
    CHECK(r.kv["skipped"] == "0");
    const StatsSet set = load_stats(dir / "s.yaml");
    for (ColorSpace s : kAllColorSpaces) {
        const StyleDistribution& d = set.at(s);
        CHECK(d.n_samples == 2);
        const Vec3 ma = channel_stats(to_planes(a, s)).avg, mb = channel_stats(to_planes(b, s)).avg;
        for (int c = 0; c < 3; ++c) {
            // Hand computation: mean (x+y)/2, sample variance (x-y)^2/2; the
            // file carries 9 significant digits.
            CHECK(d.mean_of_avg[c] == doctest::Approx((ma[c] + mb[c]) / 2).epsilon(1e-8));
            CHECK(std::sqrt(d.var_of_avg[c]) == doctest::Approx(std::abs(ma[c] - mb[c]) / std::sqrt(2.0)).epsilon(1e-8));
            CHECK(d.mean_of_std[c] == 0.0);
            CHECK(d.var_of_std[c] == 0.0);
        }
    }
    CHECK(r.kv.count("lab.avg.mean") == 1);
    CHECK(r.kv["hed.n"] == "2");
}

TEST_CASE("fit: per-class sampling, determinism, spaces and family") {
    sftest::TempDir dir("cli");
    write_corpus(dir / "in", 8, 12, 6);
    const std::vector<std::string> base{"fit", "--input-dir", (dir / "in").string(), "--per-class", "10", "--seed", "4"};
    auto with_out = [&](const std::string& name, std::vector<std::string> extra = {}) {
        auto args = base;
        args.insert(args.end(), {"--out", (dir / name).string()});
        args.insert(args.end(), extra.begin(), extra.end());
        return run(args);
    };
    Result first = with_out("a.yaml");
    REQUIRE(first.code == 0);
    CHECK(first.kv["images"] == "80");
    CHECK(first.kv["lab.n"] == "80");
    REQUIRE(with_out("b.yaml").code == 0);
    CHECK(slurp(dir / "a.yaml") == slurp(dir / "b.yaml"));

    Result t = with_out("t.yaml", {"--spaces", "hed,lab", "--family", "t", "--dof", "6"});
    REQUIRE(t.code == 0);
    const StatsSet set = load_stats(dir / "t.yaml");
    CHECK(!set.has(ColorSpace::Hsv));
    CHECK(set.at(ColorSpace::Hed).family == DistributionFamily::student_t(6.0));
    CHECK(t.kv["hed.family"] == "t");

    Result all = run({"fit", "--input-dir", (dir / "in").string(), "--out", (dir / "all.yaml").string()});
    CHECK(all.kv["images"] == "96");
    CHECK(with_out("x.yaml", {"--spaces", "lab,yuv"}).code == 1);
    CHECK(with_out("x.yaml", {"--family", "t", "--dof", "2"}).code == 1);
    CHECK(run({"fit", "--input-dir", (dir / "in").string(), "--per-class", "0", "--out", (dir / "z.yaml").string()}).code == 1);
    CHECK(!fs::exists(dir / "x.yaml"));
}

TEST_CASE("fit: exit codes for bad inputs and outputs") {
    sftest::TempDir dir("cli");
    CHECK(run({"fit", "--input-dir", (dir / "missing").string(), "--out", (dir / "s.yaml").string()}).code == 2);

    fs::create_directories(dir / "one");
    save_png(sftest::he_image(4, 4, 1), dir / "one" / "a.png");
    std::ofstream(dir / "one" / "broken.png") << "garbage";
    Result few = run({"fit", "--input-dir", (dir / "one").string(), "--out", (dir / "s.yaml").string()});
    CHECK(few.code == 3);
    CHECK(few.err.find("broken.png") != std::string::npos);
    CHECK(!fs::exists(dir / "s.yaml"));

    save_png(sftest::he_image(4, 4, 2), dir / "one" / "b.png");
    Result ok = run({"fit", "--input-dir", (dir / "one").string(), "--out", (dir / "s.yaml").string()});
    CHECK(ok.code == 0);
    CHECK(ok.kv["images"] == "2");
    CHECK(ok.kv["skipped"] == "1");
    CHECK(run({"fit", "--input-dir", (dir / "one").string(), "--out", (dir / "no" / "s.yaml").string()}).code == 4);
}

TEST_CASE("apply: passthrough mirrors the tree losslessly") {
    sftest::TempDir dir("cli");
    write_corpus(dir / "in", 2, 3);
    fs::create_directories(dir / "in" / "class0" / "nested");
    save_png(sftest::noise_image(5, 5, 3), dir / "in" / "class0" / "nested" / "deep.png");
    Result r = run({"apply", "--input-dir", (dir / "in").string(), "--output-dir", (dir / "out").string(), "--mode",
                          "passthrough"});
    REQUIRE(r.code == 0);
    CHECK(r.kv["images"] == "7");
    CHECK(r.kv["clamped_fraction"] == "0");
    for (const auto& e : fs::recursive_directory_iterator(dir / "in")) {
        if (!e.is_regular_file()) continue;
        const fs::path out = dir / "out" / e.path().lexically_relative(dir / "in");
        REQUIRE(fs::exists(out));
        CHECK(load_image(out) == load_image(e.path()));
        CHECK(slurp(out) == slurp(e.path()));   // inputs were written by the same encoder
    }
}

TEST_CASE("apply: output names for jpeg inputs and collisions") {
    sftest::TempDir dir("cli");
    fs::create_directories(dir / "in");
    const RgbImage img = sftest::he_image(6, 6, 1);
    save_png(img, dir / "in" / "a.png");
    fs::copy_file(dir / "in" / "a.png", dir / "in" / "a.tif");
    fs::copy_file(dir / "in" / "a.png", dir / "in" / "b.tiff");
    Result r = run({"apply", "--input-dir", (dir / "in").string(), "--output-dir", (dir / "out").string(), "--mode",
                          "passthrough"});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "out" / "a.png"));
    CHECK(fs::exists(dir / "out" / "a.tif.png"));
    CHECK(fs::exists(dir / "out" / "b.png"));
    CHECK(load_image(dir / "out" / "b.png") == img);
}

TEST_CASE("apply: zero-spread LAB stats pull every output to the mean template") {
    sftest::TempDir dir("cli");
    fs::create_directories(dir / "in");
    for (int i = 0; i < 4; ++i) save_png(sftest::he_image(160, 160, 70 + i, 15.0), dir / "in" / ("x" + std::to_string(i) + ".png"));
    StyleDistribution d;
    d.space = ColorSpace::Lab;
    d.mean_of_avg = {62.0, 24.0, -11.0};
    d.mean_of_std = {13.0, 8.0, 6.5};
    d.n_samples = 10;
    StatsSet set;
    set.put(d);
    save_stats(set, dir / "s.yaml");
    Result r = run({"apply", "--input-dir", (dir / "in").string(), "--output-dir", (dir / "out").string(), "--stats",
                          (dir / "s.yaml").string(), "--space-probs", "1,0,0", "--seed", "3"});
    REQUIRE(r.code == 0);
    CHECK(r.kv["clamped_fraction"] == "0");
    double worst_avg = 0.0, worst_std = 0.0;
    for (const auto& e : fs::directory_iterator(dir / "out")) {
        const ChannelStats s = channel_stats(rgb_to_lab(load_image(e.path())));
        for (int c = 0; c < 3; ++c) {
            worst_avg = std::max(worst_avg, std::abs(s.avg[c] - d.mean_of_avg[c]));
            worst_std = std::max(worst_std, std::abs(s.std[c] - d.mean_of_std[c]));
        }
    }
    MESSAGE("max |A - M_A| = " << worst_avg << ", max |D - M_D| = " << worst_std);
    // The planes match M to 1e-6 before quantization (unit tests); 8-bit
    // rounding adds roughly q^2/(2D) to each std, a few thousandths here.
    CHECK(worst_avg < 0.05);
    CHECK(worst_std < 0.05);

    // Every output is exactly the SN result against the mean template.
    REQUIRE(run({"apply", "--input-dir", (dir / "in").string(), "--output-dir", (dir / "sn").string(), "--stats",
                 (dir / "s.yaml").string(), "--mode", "sn", "--space", "lab"})
                .code == 0);
    CHECK(tree_bytes(dir / "out") == tree_bytes(dir / "sn"));
}

TEST_CASE("apply: worker count does not change any output byte") {
    sftest::TempDir dir("cli");
    write_corpus(dir / "in", 3, 4, 16);
    REQUIRE(run({"fit", "--input-dir", (dir / "in").string(), "--out", (dir / "s.yaml").string()}).code == 0);
    const std::vector<std::vector<std::string>> modes{
        {"--mode", "randstainna"},
        {"--mode", "fixed", "--space", "hsv"},
        {"--mode", "sn", "--space", "hed"},
        {"--mode", "sa1", "--strength", "strong"},
        {"--mode", "sa2", "--space", "lab"},
        {"--mode", "passthrough"},
        {"--mode", "randstainna", "--shared-template"},
    };
    for (const auto& m : modes) {
        CAPTURE(m[1]);
        auto go = [&](const std::string& out, const std::string& workers) {
            std::vector<std::string> args{"apply", "--input-dir", (dir / "in").string(), "--output-dir", (dir / out).string(),
                                          "--seed", "9", "--workers", workers, "--batch-size", "5"};
            if (m[1] != "passthrough") args.insert(args.end(), {"--stats", (dir / "s.yaml").string()});
            args.insert(args.end(), m.begin(), m.end());
            return run(args);
        };
        Result one = go("w1", "1");
        Result four = go("w4", "4");
        CAPTURE(one.err);
        REQUIRE(one.code == 0);
        REQUIRE(four.code == 0);
        CHECK(one.kv["clamped_fraction"] == four.kv["clamped_fraction"]);
        CHECK(tree_bytes(dir / "w1") == tree_bytes(dir / "w4"));
        CHECK(tree_bytes(dir / "w1").size() == 12);
        fs::remove_all(dir / "w1");
        fs::remove_all(dir / "w4");
    }
}

TEST_CASE("apply: results depend on the seed but not on the batch size") {
    sftest::TempDir dir("cli");
    write_corpus(dir / "in", 2, 5, 10);
    REQUIRE(run({"fit", "--input-dir", (dir / "in").string(), "--out", (dir / "s.yaml").string()}).code == 0);
    auto go = [&](const std::string& out, const std::string& seed, const std::string& batch) {
        return run({"apply", "--input-dir", (dir / "in").string(), "--output-dir", (dir / out).string(), "--stats",
                    (dir / "s.yaml").string(), "--seed", seed, "--batch-size", batch});
    };
    REQUIRE(go("a", "1", "32").code == 0);
    REQUIRE(go("b", "1", "3").code == 0);
    REQUIRE(go("c", "2", "32").code == 0);
    CHECK(tree_bytes(dir / "a") == tree_bytes(dir / "b"));
    CHECK(tree_bytes(dir / "a") != tree_bytes(dir / "c"));
}

TEST_CASE("apply: flag conflicts are rejected before touching the disk") {
    sftest::TempDir dir("cli");
    write_corpus(dir / "in", 1, 2);
    const std::string in = (dir / "in").string(), out = (dir / "out").string();
    const std::vector<std::vector<std::string>> bad{
        {"--mode", "fixed"},                                         // needs --space
        {"--mode", "randstainna", "--space", "lab"},                 // space comes from probabilities
        {"--mode", "sn", "--space-probs", "1,0,0"},
        {"--mode", "sa1", "--space", "hsv"},
        {"--mode", "sa2", "--space", "hed"},
        {"--mode", "sa1", "--template-image", "x.png"},
        {"--mode", "fixed", "--space", "lab", "--strength", "light"},
        {"--mode", "sa2", "--family", "t"},
        {"--mode", "passthrough", "--shared-template"},
        {"--space-probs", "0.5,0.5"},
        {"--space-probs", "0.5,0.6,0.1"},
        {"--space-probs", "a,b,c"},
        {"--mode", "sa1", "--strength", "medium"},
        {"--mode", "whatever"},
        {"--batch-size", "0"},
    };
    for (const auto& b : bad) {
        std::vector<std::string> args{"apply", "--input-dir", in, "--output-dir", out, "--stats", "/nonexistent.yaml"};
        args.insert(args.end(), b.begin(), b.end());
        Result r = run(args);
        CAPTURE(b.back());
        CHECK(r.code == 1);
        CHECK(!fs::exists(dir / "out"));
    }
}

TEST_CASE("apply: missing or invalid statistics and inputs") {
    sftest::TempDir dir("cli");
    write_corpus(dir / "in", 1, 2);
    const std::string in = (dir / "in").string(), out = (dir / "out").string();
    CHECK(run({"apply", "--input-dir", in, "--output-dir", out}).code == 2);
    CHECK(run({"apply", "--input-dir", in, "--output-dir", out, "--stats", (dir / "none.yaml").string()}).code == 2);
    std::ofstream(dir / "bad.yaml") << "version: 1\nnonsense: true\n";
    CHECK(run({"apply", "--input-dir", in, "--output-dir", out, "--stats", (dir / "bad.yaml").string()}).code == 2);

    REQUIRE(run({"fit", "--input-dir", in, "--spaces", "lab", "--out", (dir / "lab.yaml").string()}).code == 0);
    CHECK(run({"apply", "--input-dir", in, "--output-dir", out, "--stats", (dir / "lab.yaml").string()}).code == 2);
    CHECK(run({"apply", "--input-dir", in, "--output-dir", out, "--stats", (dir / "lab.yaml").string(), "--space-probs",
               "1,0,0"})
              .code == 0);
    CHECK(run({"apply", "--input-dir", (dir / "nope").string(), "--output-dir", out, "--mode", "passthrough"}).code == 2);
    fs::create_directories(dir / "empty");
    CHECK(run({"apply", "--input-dir", (dir / "empty").string(), "--output-dir", out, "--mode", "passthrough"}).code == 3);

    // SN against an explicit reference image needs no statistics file.
    save_png(sftest::he_image(8, 8, 99), dir / "ref.png");
    Result sn = run({"apply", "--input-dir", in, "--output-dir", (dir / "sn").string(), "--mode", "sn", "--template-image",
                           (dir / "ref.png").string()});
    CHECK(sn.code == 0);
    CHECK(run({"apply", "--input-dir", in, "--output-dir", (dir / "sn2").string(), "--mode", "sn", "--template-image",
               (dir / "missing.png").string()})
              .code == 2);
}

TEST_CASE("apply: unwritable output removes partial results") {
    sftest::TempDir dir("cli");
    write_corpus(dir / "in", 2, 3);
    // A regular file where a class directory must go makes the second class fail.
    fs::create_directories(dir / "out");
    std::ofstream(dir / "out" / "class1") << "in the way";
    Result r = run({"apply", "--input-dir", (dir / "in").string(), "--output-dir", (dir / "out").string(), "--mode",
                          "passthrough"});
    CHECK(r.code == 4);
    CHECK(!fs::exists(dir / "out" / "class0"));
    CHECK(fs::exists(dir / "out" / "class1"));   // pre-existing file untouched

    Result blocked = run({"apply", "--input-dir", (dir / "in").string(), "--output-dir",
                                (dir / "out" / "class1" / "x").string(), "--mode", "passthrough"});
    CHECK(blocked.code == 4);
}

TEST_CASE("apply: undecodable files are skipped and the worker default comes from the environment") {
    sftest::TempDir dir("cli");
    write_corpus(dir / "in", 1, 3);
    std::ofstream(dir / "in" / "class0" / "zz.png") << "garbage";
    Result r = run({"apply", "--input-dir", (dir / "in").string(), "--output-dir", (dir / "out").string(), "--mode",
                          "passthrough"},
                         "STAINFORGE_THREADS=3");
    REQUIRE(r.code == 0);
    CHECK(r.kv["images"] == "3");
    CHECK(r.kv["skipped"] == "1");
    CHECK(r.kv["workers"] == "3");
    CHECK(r.err.find("zz.png") != std::string::npos);
    CHECK(!fs::exists(dir / "out" / "class0" / "zz.png"));
    Result flag = run({"apply", "--input-dir", (dir / "in").string(), "--output-dir", (dir / "out2").string(), "--mode",
                             "passthrough", "--workers", "2"},
                            "STAINFORGE_THREADS=3");
    CHECK(flag.kv["workers"] == "2");
}

TEST_CASE("export-style: csv rows, stdout default and errors") {
    sftest::TempDir dir("cli");
    write_corpus(dir / "in", 1, 5);
    Result f = run({"export-style", "--input-dir", (dir / "in").string(), "--space", "hed", "--out",
                          (dir / "s.csv").string()});
    REQUIRE(f.code == 0);
    CHECK(f.kv["rows"] == "5");
    const std::string csv = slurp(dir / "s.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    CHECK(csv.rfind("path,space,a1,a2,a3,d1,d2,d3\n", 0) == 0);

    Result s = run({"export-style", "--input-dir", (dir / "in").string(), "--space", "hed"});
    REQUIRE(s.code == 0);
    CHECK(s.out == csv);

    std::istringstream in(csv);
    const auto records = read_style_csv(in);
    REQUIRE(records.size() == 5);
    const ChannelStats ref = channel_stats(rgb_to_hed(load_image(records[0].path)));
    for (int c = 0; c < 3; ++c) CHECK(records[0].stats.avg[c] == ref.avg[c]);

    fs::create_directories(dir / "empty");
    CHECK(run({"export-style", "--input-dir", (dir / "empty").string()}).code == 3);
    CHECK(run({"export-style", "--input-dir", (dir / "none").string()}).code == 2);
    CHECK(run({"export-style", "--input-dir", (dir / "in").string(), "--out", (dir / "x" / "y.csv").string()}).code == 4);
    CHECK(run({"export-style", "--input-dir", (dir / "in").string(), "--space", "rgb"}).code == 1);
}

TEST_CASE("bench reports per-mode throughput") {
    Result r = run({"bench", "--images", "6", "--size", "32", "--workers", "1,2", "--repeat", "1"});
    REQUIRE(r.code == 0);
    for (const char* m : {"passthrough", "randstainna", "sn", "sa1", "sa2"})
        for (const char* w : {"1", "2"}) {
            const std::string key = std::string("bench.") + m + ".workers" + w + ".images_per_second";
            REQUIRE(r.kv.count(key) == 1);
            CHECK(std::stod(r.kv.at(key)) > 0.0);
        }
    CHECK(r.kv.count("hardware_threads") == 1);
    CHECK(run({"bench", "--workers", "0"}).code == 1);
    CHECK(run({"bench", "--modes", "gan"}).code == 1);
}

TEST_CASE("bench worker scaling does not regress through 2 workers") {
    Result r = run({"bench", "--images", "48", "--size", "128", "--workers", "1,2", "--modes", "randstainna", "--repeat", "3"});
    REQUIRE(r.code == 0);
    if (std::stoi(r.kv["hardware_threads"]) < 2) {
        MESSAGE("single-core host, scaling not measured");
        return;
    }
    const double one = std::stod(r.kv["bench.randstainna.workers1.images_per_second"]);
    const double two = std::stod(r.kv["bench.randstainna.workers2.images_per_second"]);
    // Timing noise allowance; a real regression shows up as a much larger drop.
    CHECK(two >= 0.95 * one);
}
