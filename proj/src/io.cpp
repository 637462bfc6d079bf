#include "rbmlab/io.hpp"

#include <cstdio>
#include <stdexcept>

namespace rbmlab {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& header)
    : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path.string());
    out_ << header << "\n";
}

void CsvWriter::row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out_ << ",";
        out_ << fmt_double(v);
        first = false;
    }
    out_ << "\n";
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << "\n"; }

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

namespace {

void sample_record(std::ofstream& out, const TraceSample& s) {
    out << "{\"t\":" << fmt_double(s.t) << ",\"x\":[" << fmt_double(s.x.x) << ","
        << fmt_double(s.x.y) << "," << fmt_double(s.x.z)
        << "],\"l\":" << fmt_double(s.l) << "}\n";
}

} // namespace

void write_trace_jsonl(const std::filesystem::path& path, const nlohmann::json& header,
                       std::span<const TraceSample> samples) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << header.dump() << "\n";
    for (const auto& s : samples) sample_record(out, s);
}

void write_pair_trace_jsonl(const std::filesystem::path& path,
                            const nlohmann::json& header,
                            std::span<const TraceSample> samples_x,
                            std::span<const TraceSample> samples_y) {
    if (samples_x.size() != samples_y.size())
        throw std::invalid_argument("write_pair_trace_jsonl: trace length mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << header.dump() << "\n";
    for (std::size_t i = 0; i < samples_x.size(); ++i) {
        const auto& sx = samples_x[i];
        const auto& sy = samples_y[i];
        out << "{\"t\":" << fmt_double(sx.t) << ",\"x\":[" << fmt_double(sx.x.x) << ","
            << fmt_double(sx.x.y) << "," << fmt_double(sx.x.z)
            << "],\"l\":" << fmt_double(sx.l) << ",\"y\":[" << fmt_double(sy.x.x) << ","
            << fmt_double(sy.x.y) << "," << fmt_double(sy.x.z)
            << "],\"ly\":" << fmt_double(sy.l) << "}\n";
    }
}

} // namespace rbmlab
