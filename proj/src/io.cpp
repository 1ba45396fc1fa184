#include "udd/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace udd {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::filesystem::path& path, const std::string& what) {
    throw ParseError(path.string() + ": " + what);
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ifstream in(path, mode);
    if (!in) throw InputError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    return out;
}

// Next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int parse_positive_int(const std::string& tok, const std::filesystem::path& path,
                       const char* what) {
    if (tok.empty()) parse_fail(path, std::string("missing ") + what);
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (*end != '\0' || v <= 0) parse_fail(path, std::string("malformed ") + what);
    return static_cast<int>(v);
}

ordered_json load_json(const std::filesystem::path& path) {
    std::ifstream in = open_input(path, std::ios::in);
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded()) parse_fail(path, "not valid JSON");
    return j;
}

ordered_json rounded(double x) { return round_sig(x, 12); }

ordered_json rounded(const std::vector<double>& v) {
    ordered_json arr = ordered_json::array();
    for (double x : v) arr.push_back(rounded(x));
    return arr;
}

}  // namespace

double round_sig(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return std::strtod(buf, nullptr);
}

BinaryImage read_pbm(const std::filesystem::path& path) {
    std::ifstream in = open_input(path, std::ios::binary);
    const std::string magic = next_token(in);
    if (magic != "P1" && magic != "P2" && magic != "P4" && magic != "P5") {
        parse_fail(path, "malformed header: expected P1/P2/P4/P5, got '" + magic + "'");
    }
    BinaryImage img;
    img.width = parse_positive_int(next_token(in), path, "width");
    img.height = parse_positive_int(next_token(in), path, "height");
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    img.pixels.reserve(n);

    if (magic == "P1") {
        int c;
        while (img.pixels.size() < n && (c = in.get()) != EOF) {
            if (c == '#') {
                while (c != EOF && c != '\n') c = in.get();
                continue;
            }
            if (std::isspace(c)) continue;
            if (c != '0' && c != '1') parse_fail(path, "P1 payload contains non-bit characters");
            img.pixels.push_back(static_cast<std::uint8_t>(c - '0'));
        }
    } else if (magic == "P2" || magic == "P5") {
        const int maxval = parse_positive_int(next_token(in), path, "maxval");
        if (maxval > 255) parse_fail(path, "graymaps with maxval > 255 are not supported");
        if (magic == "P2") {
            while (img.pixels.size() < n) {
                const std::string tok = next_token(in);
                if (tok.empty()) break;
                char* end = nullptr;
                const long v = std::strtol(tok.c_str(), &end, 10);
                if (*end != '\0' || v < 0 || v > maxval) parse_fail(path, "malformed P2 sample");
                img.pixels.push_back(static_cast<std::uint8_t>(2 * v <= maxval ? 1 : 0));
            }
        } else {
            std::vector<char> raw(n);
            in.read(raw.data(), static_cast<std::streamsize>(n));
            if (static_cast<std::size_t>(in.gcount()) != n) parse_fail(path, "truncated payload");
            for (std::size_t i = 0; i < n; ++i) {
                const int v = static_cast<unsigned char>(raw[i]);
                if (v > maxval) parse_fail(path, "P5 sample above maxval");
                img.pixels.push_back(static_cast<std::uint8_t>(2 * v <= maxval ? 1 : 0));
            }
        }
    } else {  // P4
        const std::size_t row_bytes = (static_cast<std::size_t>(img.width) + 7) / 8;
        std::vector<char> row(row_bytes);
        for (int r = 0; r < img.height; ++r) {
            in.read(row.data(), static_cast<std::streamsize>(row_bytes));
            if (static_cast<std::size_t>(in.gcount()) != row_bytes) {
                parse_fail(path, "truncated payload");
            }
            for (int cix = 0; cix < img.width; ++cix) {
                const unsigned byte = static_cast<unsigned char>(row[static_cast<std::size_t>(cix) / 8]);
                img.pixels.push_back(static_cast<std::uint8_t>((byte >> (7 - cix % 8)) & 1u));
            }
        }
    }
    if (img.pixels.size() != n) parse_fail(path, "truncated payload");
    return img;
}

void write_pbm(const std::filesystem::path& path, const BinaryImage& img, PbmFormat format) {
    if (img.width < 1 || img.height < 1 ||
        img.pixels.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height)) {
        throw InputError("write_pbm: image dimensions do not match pixel count");
    }
    for (std::uint8_t p : img.pixels) {
        if (p > 1) throw InputError("write_pbm: pixels must be 0 or 1");
    }
    std::ofstream out = open_output(path, std::ios::binary);
    if (format == PbmFormat::Ascii) {
        out << "P1\n" << img.width << " " << img.height << "\n";
        for (int r = 0; r < img.height; ++r) {
            int line = 0;
            for (int c = 0; c < img.width; ++c) {
                out << static_cast<char>('0' + img.pixels[static_cast<std::size_t>(r) * img.width + c]);
                if (++line == 64) {
                    out << '\n';
                    line = 0;
                }
            }
            if (line != 0) out << '\n';
        }
    } else {
        out << "P4\n" << img.width << " " << img.height << "\n";
        const std::size_t row_bytes = (static_cast<std::size_t>(img.width) + 7) / 8;
        std::vector<char> row(row_bytes);
        for (int r = 0; r < img.height; ++r) {
            std::fill(row.begin(), row.end(), 0);
            for (int c = 0; c < img.width; ++c) {
                if (img.pixels[static_cast<std::size_t>(r) * img.width + c]) {
                    row[static_cast<std::size_t>(c) / 8] |= static_cast<char>(1u << (7 - c % 8));
                }
            }
            out.write(row.data(), static_cast<std::streamsize>(row_bytes));
        }
    }
    if (!out) throw InputError("write_pbm: write to " + path.string() + " failed");
}

std::vector<BscParam> read_bsc_csv(const std::filesystem::path& path) {
    std::ifstream in = open_input(path, std::ios::in);
    std::string line;
    if (!std::getline(in, line)) parse_fail(path, "empty file");
    auto strip = [](std::string s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
        std::size_t i = 0;
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        return s.substr(i);
    };
    if (strip(line) != "index,b00") parse_fail(path, "malformed header: expected 'index,b00'");
    std::vector<BscParam> params;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = strip(line);
        if (s.empty()) continue;
        const std::size_t comma = s.find(',');
        if (comma == std::string::npos) {
            parse_fail(path, "row " + std::to_string(lineno) + ": missing comma");
        }
        char* end = nullptr;
        const double b = std::strtod(s.c_str() + comma + 1, &end);
        if (end == s.c_str() + comma + 1 || *end != '\0') {
            parse_fail(path, "row " + std::to_string(lineno) + ": malformed value");
        }
        try {
            params.emplace_back(b);
        } catch (const InvalidChannel&) {
            parse_fail(path, "row " + std::to_string(lineno) + ": parameter outside [0,1]");
        }
    }
    if (params.empty()) parse_fail(path, "no parameter rows");
    return params;
}

void write_bsc_csv(const std::filesystem::path& path, std::span<const BscParam> params) {
    std::ofstream out = open_output(path, std::ios::out);
    out << "index,b00\n";
    for (std::size_t i = 0; i < params.size(); ++i) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%zu,%.12g\n", i + 1, params[i].b());
        out << buf;
    }
}

namespace {

Channel channel_from_json(const ordered_json& mat, const std::filesystem::path& path,
                          std::size_t which) {
    if (!mat.is_array() || mat.empty()) {
        parse_fail(path, "channel " + std::to_string(which + 1) + ": expected a matrix");
    }
    const int rows = static_cast<int>(mat.size());
    const int cols = static_cast<int>(mat[0].size());
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (const auto& row : mat) {
        if (!row.is_array() || static_cast<int>(row.size()) != cols) {
            parse_fail(path, "channel " + std::to_string(which + 1) + ": ragged matrix");
        }
        for (const auto& v : row) {
            if (!v.is_number()) {
                parse_fail(path, "channel " + std::to_string(which + 1) + ": non-numeric entry");
            }
            w.push_back(v.get<double>());
        }
    }
    try {
        return Channel(rows, cols, std::move(w));
    } catch (const InputError& e) {
        parse_fail(path, "channel " + std::to_string(which + 1) + ": " + e.what());
    }
}

ordered_json channel_to_json(const Channel& ch) {
    ordered_json mat = ordered_json::array();
    for (int x = 0; x < ch.input_size(); ++x) {
        ordered_json row = ordered_json::array();
        for (int y = 0; y < ch.output_size(); ++y) row.push_back(rounded(ch(x, y)));
        mat.push_back(std::move(row));
    }
    return mat;
}

std::vector<Channel> channels_from_json(const ordered_json& arr,
                                        const std::filesystem::path& path) {
    if (!arr.is_array() || arr.empty()) parse_fail(path, "expected a nonempty channel array");
    std::vector<Channel> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(channel_from_json(arr[i], path, i));
    return out;
}

}  // namespace

std::vector<Channel> read_channels_json(const std::filesystem::path& path) {
    const ordered_json j = load_json(path);
    if (j.is_object() && j.contains("channels")) return channels_from_json(j["channels"], path);
    return channels_from_json(j, path);
}

void write_channels_json(const std::filesystem::path& path, std::span<const Channel> channels) {
    ordered_json arr = ordered_json::array();
    for (const Channel& ch : channels) arr.push_back(channel_to_json(ch));
    ordered_json doc;
    doc["channels"] = std::move(arr);
    std::ofstream out = open_output(path, std::ios::out);
    out << doc.dump(2) << "\n";
}

DependentComponentSystem read_system_json(const std::filesystem::path& path) {
    const ordered_json j = load_json(path);
    if (!j.is_object() || !j.contains("source")) parse_fail(path, "missing 'source'");
    std::vector<double> p;
    for (const auto& v : j["source"]) {
        if (!v.is_number()) parse_fail(path, "non-numeric source entry");
        p.push_back(v.get<double>());
    }
    std::vector<Channel> channels;
    if (j.contains("channels")) {
        channels = channels_from_json(j["channels"], path);
    } else if (j.contains("bsc")) {
        for (const auto& v : j["bsc"]) {
            if (!v.is_number()) parse_fail(path, "non-numeric bsc entry");
            try {
                channels.push_back(Channel::from_bsc(BscParam(v.get<double>())));
            } catch (const InvalidChannel& e) {
                parse_fail(path, e.what());
            }
        }
        if (channels.empty()) parse_fail(path, "empty 'bsc' list");
    } else {
        parse_fail(path, "missing 'channels' or 'bsc'");
    }
    try {
        return DependentComponentSystem(Distribution(std::move(p)), std::move(channels));
    } catch (const InputError& e) {
        parse_fail(path, e.what());
    }
}

void write_system_json(const std::filesystem::path& path, const DependentComponentSystem& sys) {
    ordered_json doc;
    doc["source"] = rounded(sys.source.probs());
    ordered_json arr = ordered_json::array();
    for (const Channel& ch : sys.channels) arr.push_back(channel_to_json(ch));
    doc["channels"] = std::move(arr);
    std::ofstream out = open_output(path, std::ios::out);
    out << doc.dump(2) << "\n";
}

DistortionMeasure read_distortion_json(const std::filesystem::path& path) {
    const ordered_json j = load_json(path);
    const ordered_json& mat = j.is_object() && j.contains("distortion") ? j["distortion"] : j;
    if (!mat.is_array() || mat.empty()) parse_fail(path, "expected a distortion matrix");
    const int n = static_cast<int>(mat.size());
    std::vector<double> d;
    for (const auto& row : mat) {
        if (!row.is_array() || static_cast<int>(row.size()) != n) {
            parse_fail(path, "distortion matrix must be square");
        }
        for (const auto& v : row) {
            if (!v.is_number()) parse_fail(path, "non-numeric distortion entry");
            d.push_back(v.get<double>());
        }
    }
    try {
        return DistortionMeasure(n, std::move(d));
    } catch (const InputError& e) {
        parse_fail(path, e.what());
    }
}

void write_report(const std::filesystem::path& path, const Report& report) {
    ordered_json doc;
    doc["algorithm"] = report.algorithm;
    doc["seed"] = report.seed.has_value() ? ordered_json(*report.seed) : ordered_json(nullptr);
    doc["n"] = report.n.has_value() ? ordered_json(*report.n) : ordered_json(nullptr);
    doc["K"] = report.copies.has_value() ? ordered_json(*report.copies) : ordered_json(nullptr);
    doc["p_hat"] = report.p_hat.has_value() ? rounded(*report.p_hat) : ordered_json(nullptr);
    doc["b_hat"] = report.b_hat.has_value() ? rounded(*report.b_hat) : ordered_json(nullptr);
    doc["branch"] = report.branch.has_value() ? ordered_json(*report.branch) : ordered_json(nullptr);
    if (report.residual_l1.has_value() || report.residual_l2.has_value()) {
        ordered_json res;
        res["l1"] = report.residual_l1.has_value() ? rounded(*report.residual_l1) : ordered_json(nullptr);
        res["l2"] = report.residual_l2.has_value() ? rounded(*report.residual_l2) : ordered_json(nullptr);
        doc["residuals"] = std::move(res);
    } else {
        doc["residuals"] = nullptr;
    }
    doc["expected_distortion"] = report.expected_distortion.has_value()
                                     ? rounded(*report.expected_distortion)
                                     : ordered_json(nullptr);
    doc["achieved_distortion_up_to_permutation"] =
        report.achieved_distortion_up_to_permutation.has_value()
            ? rounded(*report.achieved_distortion_up_to_permutation)
            : ordered_json(nullptr);
    doc["runtime_ms"] = rounded(report.runtime_ms);
    std::ofstream out = open_output(path, std::ios::out);
    out << doc.dump(2) << "\n";
    if (!out) throw InputError("write_report: write to " + path.string() + " failed");
}

void write_manifest(const std::filesystem::path& path, const ObservationManifest& manifest) {
    ordered_json doc;
    doc["n"] = manifest.n;
    doc["K"] = manifest.copies;
    doc["width"] = manifest.width;
    doc["height"] = manifest.height;
    doc["seed"] = manifest.seed;
    doc["rng"] = manifest.rng;
    doc["mode"] = manifest.mode;
    doc["source_type"] =
        manifest.source_type.has_value() ? rounded(*manifest.source_type) : ordered_json(nullptr);
    doc["bsc"] = manifest.bsc.has_value() ? rounded(*manifest.bsc) : ordered_json(nullptr);
    doc["copies"] = manifest.copy_files;
    doc["truth"] = manifest.truth_file.has_value() ? ordered_json(*manifest.truth_file)
                                                   : ordered_json(nullptr);
    std::ofstream out = open_output(path, std::ios::out);
    out << doc.dump(2) << "\n";
}

ObservationManifest read_manifest(const std::filesystem::path& path) {
    const ordered_json j = load_json(path);
    ObservationManifest m;
    try {
        m.n = j.at("n").get<std::uint64_t>();
        m.copies = j.at("K").get<int>();
        m.width = j.at("width").get<int>();
        m.height = j.at("height").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.rng = j.at("rng").get<std::string>();
        m.mode = j.at("mode").get<std::string>();
        if (j.contains("source_type") && !j["source_type"].is_null()) {
            m.source_type = j["source_type"].get<std::vector<double>>();
        }
        if (j.contains("bsc") && !j["bsc"].is_null()) {
            m.bsc = j["bsc"].get<std::vector<double>>();
        }
        m.copy_files = j.at("copies").get<std::vector<std::string>>();
        if (j.contains("truth") && !j["truth"].is_null()) {
            m.truth_file = j["truth"].get<std::string>();
        }
    } catch (const nlohmann::json::exception& e) {
        parse_fail(path, e.what());
    }
    return m;
}

ObservationSet load_observation_dir(const std::filesystem::path& dir) {
    ObservationManifest manifest = read_manifest(dir / "manifest.json");
    if (manifest.copy_files.empty()) throw ParseError("manifest lists no copies");
    const int K = static_cast<int>(manifest.copy_files.size());
    if (K != manifest.copies) throw ParseError("manifest K does not match the copy list");
    std::vector<std::uint8_t> data(manifest.n * static_cast<std::size_t>(K));
    for (int j = 0; j < K; ++j) {
        const BinaryImage img = read_pbm(dir / manifest.copy_files[static_cast<std::size_t>(j)]);
        if (img.size() != manifest.n) {
            throw ParseError("copy " + manifest.copy_files[static_cast<std::size_t>(j)] +
                             " has " + std::to_string(img.size()) + " pixels, manifest says " +
                             std::to_string(manifest.n));
        }
        for (std::size_t i = 0; i < manifest.n; ++i) {
            data[i * static_cast<std::size_t>(K) + static_cast<std::size_t>(j)] = img.pixels[i];
        }
    }
    return ObservationSet{ObservationMatrix(2, manifest.n, K, std::move(data)), std::move(manifest)};
}

}  // namespace udd
