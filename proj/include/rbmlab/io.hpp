#pragma once

#include "rbmlab/sde.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>

namespace rbmlab {

/// Shortest round-trip formatting; used everywhere numbers leave the process
/// so that identical runs produce byte-identical files.
std::string fmt_double(double v);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header);
    void row(std::initializer_list<double> values);
    void raw_row(const std::string& line);

private:
    std::ofstream out_;
};

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// One header record with the configuration, then one record per sample:
/// {t, x[3], l} for single paths, plus {y[3], ly} when coupled.
void write_trace_jsonl(const std::filesystem::path& path, const nlohmann::json& header,
                       std::span<const TraceSample> samples);
void write_pair_trace_jsonl(const std::filesystem::path& path,
                            const nlohmann::json& header,
                            std::span<const TraceSample> samples_x,
                            std::span<const TraceSample> samples_y);

} // namespace rbmlab
