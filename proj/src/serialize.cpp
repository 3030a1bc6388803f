#include "symdyn/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "symdyn/errors.hpp"

namespace symdyn::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

fs::path sidecar_path(const fs::path& path) {
    auto p = path;
    p += ".json";
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_sequence(const fs::path& path, const SymbolicSequence& x) {
    const auto buf = x.buffer();
    write_text(path, std::string(reinterpret_cast<const char*>(buf.data()), buf.size()));
    nlohmann::json side;
    side["alphabet_size"] = x.alphabet_size();
    side["length"] = x.length();
    side["generator_id"] = x.generator_id();
    side["params"] = nlohmann::json::parse(x.params_json());
    write_text(sidecar_path(path), side.dump(2) + "\n");
}

SymbolicSequence read_sequence(const fs::path& path) {
    const auto side = nlohmann::json::parse(read_text(sidecar_path(path)));
    const auto bytes = read_text(path);
    const auto k = side.at("alphabet_size").get<unsigned>();
    const auto length = side.at("length").get<std::size_t>();
    if (bytes.size() != length) {
        throw ArgumentError("read_sequence: " + path.string() + " holds " + std::to_string(bytes.size()) +
                            " bytes, sidecar says " + std::to_string(length));
    }
    std::vector<Symbol> symbols(bytes.begin(), bytes.end());
    return SymbolicSequence(k, std::move(symbols), side.at("generator_id").get<std::string>(),
                            side.at("params").dump());
}

void write_occurrences(const fs::path& path, const OccurrenceIndex& index) {
    std::string text;
    char buf[32];
    for (auto q : index.positions) {
        const auto res = std::to_chars(buf, buf + sizeof buf, q);
        text.append(buf, res.ptr);
        text.push_back('\n');
    }
    write_text(path, text);
}

std::vector<std::size_t> read_occurrences(const fs::path& path) {
    const auto text = read_text(path);
    std::vector<std::size_t> out;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
        std::size_t v = 0;
        const auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc{} || res.ptr == end || *res.ptr != '\n') {
            throw ArgumentError("read_occurrences: malformed line in " + path.string());
        }
        out.push_back(v);
        p = res.ptr + 1;
    }
    return out;
}

nlohmann::json to_json(const density::DensityEstimate& est) {
    nlohmann::json j;
    j["kind"] = density::to_string(est.kind);
    j["horizon"] = est.horizon;
    j["window_lengths"] = est.window_lengths;
    j["counts"] = est.counts;
    j["argmax_start"] = est.argmax_start;
    j["per_window"] = est.per_window;
    j["value"] = est.value;
    j["note"] = "estimate at horizon N=" + std::to_string(est.horizon);
    return j;
}

std::string density_csv(const density::DensityEstimate& est) {
    std::string out = "kind,n,value\n";
    const auto kind = density::to_string(est.kind);
    for (std::size_t i = 0; i < est.window_lengths.size(); ++i) {
        out += kind + "," + std::to_string(est.window_lengths[i]) + "," + format_double(est.per_window[i]) + "\n";
    }
    return out;
}

std::string diam_series_csv(const est::DiamSeries& series) {
    std::string out = "i,diam\n";
    out.reserve(out.size() + series.horizon * 12);
    for (std::size_t i = 1; i <= series.horizon; ++i) {
        out += std::to_string(i);
        out.push_back(',');
        out += format_double(series.value(i));
        out.push_back('\n');
    }
    return out;
}

}  // namespace symdyn::io
